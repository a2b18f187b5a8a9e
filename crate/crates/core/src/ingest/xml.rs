//! Streaming reader and writer for the Stack Exchange `Posts.xml` schema.

use std::borrow::Cow;
use std::collections::VecDeque;
use std::io::{self, BufRead, Read, Write};

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{link_answers, parse_tags, Answer, Question};
use crate::timestamp;
use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseDiagnostics {
    pub question_rows: usize,
    pub answer_rows: usize,
    /// Rows with a PostTypeId other than 1 or 2 (wiki, tag excerpts, ...).
    pub other_rows: usize,
    /// Answers whose parent question is not in the stream.
    pub orphan_answers: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedPosts {
    pub questions: Vec<Question>,
    pub answers: Vec<Answer>,
    pub diagnostics: ParseDiagnostics,
}

/// Records newline offsets as bytes are consumed so a byte position can
/// be mapped back to a line. Offsets before the start of the event being
/// parsed are folded into a running count, keeping memory bounded.
struct LineCounter<R> {
    inner: R,
    consumed: u64,
    base_lines: u64,
    pending: VecDeque<u64>,
}

impl<R> LineCounter<R> {
    fn new(inner: R) -> Self {
        Self {
            inner,
            consumed: 0,
            base_lines: 0,
            pending: VecDeque::new(),
        }
    }

    fn record(&mut self, bytes: &[u8]) {
        record(&mut self.pending, &mut self.consumed, bytes);
    }

    fn forget_before(&mut self, pos: u64) {
        while self.pending.front().is_some_and(|&o| o < pos) {
            self.pending.pop_front();
            self.base_lines += 1;
        }
    }

    /// 1-based line of byte offset `pos`.
    fn line_at(&self, pos: u64) -> u64 {
        self.base_lines + self.pending.iter().take_while(|&&o| o < pos).count() as u64 + 1
    }
}

fn record(pending: &mut VecDeque<u64>, consumed: &mut u64, bytes: &[u8]) {
    for (i, &b) in bytes.iter().enumerate() {
        if b == b'\n' {
            pending.push_back(*consumed + i as u64);
        }
    }
    *consumed += bytes.len() as u64;
}

impl<R: BufRead> Read for LineCounter<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.record(&buf[..n]);
        Ok(n)
    }
}

impl<R: BufRead> BufRead for LineCounter<R> {
    fn fill_buf(&mut self) -> io::Result<&[u8]> {
        self.inner.fill_buf()
    }

    fn consume(&mut self, amt: usize) {
        if let Ok(buf) = self.inner.fill_buf() {
            record(
                &mut self.pending,
                &mut self.consumed,
                &buf[..amt.min(buf.len())],
            );
        }
        self.inner.consume(amt);
    }
}

#[derive(Default)]
struct RawRow {
    id: Option<String>,
    post_type: Option<String>,
    parent_id: Option<String>,
    accepted_answer_id: Option<String>,
    score: Option<String>,
    title: Option<String>,
    body: Option<String>,
    tags: Option<String>,
    creation_date: Option<String>,
}

/// Parses a `Posts.xml` stream into questions and answers.
///
/// `is_accepted` comes from the parent question's `AcceptedAnswerId`.
/// Answers whose parent question is missing are dropped and counted in
/// [`ParseDiagnostics::orphan_answers`].
pub fn parse_posts<R: BufRead>(stream: R) -> Result<ParsedPosts> {
    let mut reader = Reader::from_reader(LineCounter::new(stream));
    let mut buf = Vec::new();
    let mut out = ParsedPosts::default();

    loop {
        let start = reader.buffer_position();
        reader.get_mut().forget_before(start);
        let line = reader.get_ref().line_at(start);
        let event = match reader.read_event_into(&mut buf) {
            Ok(event) => event,
            Err(e) => {
                return Err(Error::Xml {
                    line: reader.get_ref().line_at(reader.error_position()),
                    message: e.to_string(),
                })
            }
        };
        match event {
            Event::Start(ref e) | Event::Empty(ref e) if e.name().as_ref() == b"row" => {
                let row = read_row(e, line)?;
                push_row(row, line, &mut out)?;
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }

    out.diagnostics.orphan_answers = link_answers(&out.questions, &mut out.answers);
    Ok(out)
}

fn read_row(e: &BytesStart<'_>, line: u64) -> Result<RawRow> {
    let mut row = RawRow::default();
    for attr in e.attributes() {
        let attr = attr.map_err(|err| Error::Xml {
            line,
            message: err.to_string(),
        })?;
        let value = attr
            .unescape_value()
            .map_err(|err| Error::Xml {
                line,
                message: err.to_string(),
            })?
            .into_owned();
        let slot = match attr.key.as_ref() {
            b"Id" => &mut row.id,
            b"PostTypeId" => &mut row.post_type,
            b"ParentId" => &mut row.parent_id,
            b"AcceptedAnswerId" => &mut row.accepted_answer_id,
            b"Score" => &mut row.score,
            b"Title" => &mut row.title,
            b"Body" => &mut row.body,
            b"Tags" => &mut row.tags,
            b"CreationDate" => &mut row.creation_date,
            _ => continue,
        };
        *slot = Some(value);
    }
    Ok(row)
}

fn push_row(row: RawRow, line: u64, out: &mut ParsedPosts) -> Result<()> {
    let bad = |message: String| Error::Xml { line, message };
    let required = |v: &Option<String>, name: &str| -> Result<String> {
        v.clone()
            .ok_or_else(|| bad(format!("row is missing the {name} attribute")))
    };
    let int = |v: String, name: &str| -> Result<i64> {
        v.trim()
            .parse::<i64>()
            .map_err(|_| bad(format!("{name} is not an integer: {v:?}")))
    };
    let id_of = |v: String, name: &str| -> Result<u64> {
        let n = int(v, name)?;
        u64::try_from(n)
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| bad(format!("{name} must be a positive integer")))
    };

    let post_type = required(&row.post_type, "PostTypeId")?;
    match post_type.trim() {
        "1" | "2" => {}
        _ => {
            out.diagnostics.other_rows += 1;
            return Ok(());
        }
    }
    let id = id_of(required(&row.id, "Id")?, "Id")?;
    let raw_date = required(&row.creation_date, "CreationDate")?;
    let creation_date = timestamp::parse(&raw_date)
        .ok_or_else(|| bad(format!("CreationDate is not ISO-8601: {raw_date:?}")))?;

    if post_type.trim() == "1" {
        let accepted_answer_id = match row.accepted_answer_id {
            Some(v) if !v.trim().is_empty() => Some(id_of(v, "AcceptedAnswerId")?),
            _ => None,
        };
        out.diagnostics.question_rows += 1;
        out.questions.push(Question {
            id,
            title: row.title.unwrap_or_default(),
            body_html: row.body.unwrap_or_default(),
            tags: parse_tags(row.tags.as_deref().unwrap_or("")),
            creation_date,
            accepted_answer_id,
        });
    } else {
        let question_id = id_of(required(&row.parent_id, "ParentId")?, "ParentId")?;
        let votes = int(required(&row.score, "Score")?, "Score")?;
        out.diagnostics.answer_rows += 1;
        out.answers.push(Answer {
            id,
            question_id,
            body_html: row.body.unwrap_or_default(),
            votes,
            is_accepted: false,
            creation_date,
        });
    }
    Ok(())
}

/// Writes questions and answers back out in the `Posts.xml` schema.
/// Questions are written with `Score="0"` (question scores are not
/// modeled). Parsing the output reproduces the inputs.
pub fn write_posts<W: Write>(
    mut w: W,
    questions: &[Question],
    answers: &[Answer],
) -> io::Result<()> {
    writeln!(w, "<?xml version=\"1.0\" encoding=\"utf-8\"?>")?;
    writeln!(w, "<posts>")?;
    for q in questions {
        let tags: String = q.tags.iter().map(|t| format!("<{t}>")).collect();
        write!(w, "  <row Id=\"{}\" PostTypeId=\"1\"", q.id)?;
        if let Some(a) = q.accepted_answer_id {
            write!(w, " AcceptedAnswerId=\"{a}\"")?;
        }
        writeln!(
            w,
            " CreationDate=\"{}\" Score=\"0\" Body=\"{}\" Title=\"{}\" Tags=\"{}\" />",
            timestamp::format(&q.creation_date),
            escape_attr(&q.body_html),
            escape_attr(&q.title),
            escape_attr(&tags),
        )?;
    }
    for a in answers {
        writeln!(
            w,
            "  <row Id=\"{}\" PostTypeId=\"2\" ParentId=\"{}\" CreationDate=\"{}\" Score=\"{}\" Body=\"{}\" />",
            a.id,
            a.question_id,
            timestamp::format(&a.creation_date),
            a.votes,
            escape_attr(&a.body_html),
        )?;
    }
    writeln!(w, "</posts>")
}

fn escape_attr(s: &str) -> Cow<'_, str> {
    if !s
        .chars()
        .any(|c| matches!(c, '&' | '<' | '>' | '"' | '\'' | '\n' | '\r' | '\t'))
    {
        return Cow::Borrowed(s);
    }
    let mut out = String::with_capacity(s.len() + 16);
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\n' => out.push_str("&#xA;"),
            '\r' => out.push_str("&#xD;"),
            '\t' => out.push_str("&#x9;"),
            c => out.push(c),
        }
    }
    Cow::Owned(out)
}
