//! Minimal lenient HTML lexer, rich-content detection and plain-text
//! conversion for Stack Exchange post bodies.

use std::borrow::Cow;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token<'a> {
    Text(&'a str),
    Open {
        name: String,
        attrs: &'a str,
    },
    Close {
        name: String,
    },
    /// Comments, doctypes, processing instructions, unterminated tags.
    Skip,
}

fn starts_tag(next: Option<u8>) -> bool {
    matches!(next, Some(b) if b.is_ascii_alphabetic() || b == b'/' || b == b'!' || b == b'?')
}

/// Splits `html` into text runs and tags. Never fails: a `<` that cannot
/// start a tag is text, and a tag left open at end of input is dropped.
fn lex(html: &str) -> Vec<Token<'_>> {
    let bytes = html.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut text_start = 0;

    while i < bytes.len() {
        if bytes[i] != b'<' || !starts_tag(bytes.get(i + 1).copied()) {
            i += 1;
            continue;
        }
        if text_start < i {
            tokens.push(Token::Text(&html[text_start..i]));
        }

        if html[i..].starts_with("<!--") {
            i = html[i + 4..]
                .find("-->")
                .map_or(bytes.len(), |p| i + 4 + p + 3);
            tokens.push(Token::Skip);
            text_start = i;
            continue;
        }

        let end = match find_tag_end(bytes, i + 1) {
            Some(end) => end,
            None => {
                tokens.push(Token::Skip);
                i = bytes.len();
                text_start = i;
                break;
            }
        };
        let inner = &html[i + 1..end];
        tokens.push(classify(inner));
        i = end + 1;
        text_start = i;
    }
    if text_start < bytes.len() {
        tokens.push(Token::Text(&html[text_start..]));
    }
    tokens
}

/// Index of the `>` closing a tag that starts at `from`, honoring quoted
/// attribute values.
fn find_tag_end(bytes: &[u8], from: usize) -> Option<usize> {
    let mut quote = None;
    for (offset, &b) in bytes[from..].iter().enumerate() {
        match (quote, b) {
            (Some(q), b) if b == q => quote = None,
            (Some(_), _) => {}
            (None, b'"') | (None, b'\'') => quote = Some(b),
            (None, b'>') => return Some(from + offset),
            _ => {}
        }
    }
    None
}

fn classify(inner: &str) -> Token<'_> {
    if inner.starts_with('!') || inner.starts_with('?') {
        return Token::Skip;
    }
    let (closing, rest) = match inner.strip_prefix('/') {
        Some(rest) => (true, rest),
        None => (false, inner),
    };
    let name_len = rest
        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-' || c == ':'))
        .unwrap_or(rest.len());
    let name = rest[..name_len].to_ascii_lowercase();
    if name.is_empty() {
        return Token::Skip;
    }
    if closing {
        Token::Close { name }
    } else {
        Token::Open {
            name,
            attrs: &rest[name_len..],
        }
    }
}

fn has_attribute(attrs: &str, wanted: &str) -> bool {
    let bytes = attrs.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        while i < bytes.len() && (bytes[i].is_ascii_whitespace() || bytes[i] == b'/') {
            i += 1;
        }
        let start = i;
        while i < bytes.len()
            && !bytes[i].is_ascii_whitespace()
            && bytes[i] != b'='
            && bytes[i] != b'/'
        {
            i += 1;
        }
        if attrs[start..i].eq_ignore_ascii_case(wanted) {
            return true;
        }
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'=' {
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            match bytes.get(i) {
                Some(&q) if q == b'"' || q == b'\'' => {
                    i += 1;
                    while i < bytes.len() && bytes[i] != q {
                        i += 1;
                    }
                    i += 1;
                }
                _ => {
                    while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
                        i += 1;
                    }
                }
            }
        }
        if start == i {
            i += 1;
        }
    }
    false
}

/// True when the body carries an image, a hyperlink (`<a>` with `href`)
/// or a `<pre><code>` block.
pub fn reject_rich_content(body_html: &str) -> bool {
    let tokens = lex(body_html);
    for (idx, token) in tokens.iter().enumerate() {
        if let Token::Open { name, attrs } = token {
            match name.as_str() {
                "img" => return true,
                "a" if has_attribute(attrs, "href") => return true,
                "pre" => {
                    let next = tokens[idx + 1..].iter().find(|t| match t {
                        Token::Text(s) => !s.trim().is_empty(),
                        Token::Skip => false,
                        _ => true,
                    });
                    if matches!(next, Some(Token::Open { name, .. }) if name == "code") {
                        return true;
                    }
                }
                _ => {}
            }
        }
    }
    false
}

const BLOCK_ELEMENTS: &[&str] = &[
    "address",
    "article",
    "aside",
    "blockquote",
    "br",
    "dd",
    "details",
    "div",
    "dl",
    "dt",
    "figcaption",
    "figure",
    "footer",
    "h1",
    "h2",
    "h3",
    "h4",
    "h5",
    "h6",
    "header",
    "hr",
    "li",
    "main",
    "nav",
    "ol",
    "p",
    "pre",
    "section",
    "summary",
    "table",
    "tbody",
    "td",
    "tfoot",
    "th",
    "thead",
    "tr",
    "ul",
];

const RAW_TEXT_ELEMENTS: &[&str] = &["script", "style"];

/// Converts an HTML body to plain text.
///
/// Tags are removed, entities decoded, block-level elements become line
/// breaks, whitespace runs collapse to one space within a line, lines are
/// trimmed and empty lines dropped. Literal `<` before a letter and `&`
/// sequences that would decode as entities get a space inserted after the
/// first character, so the output is inert when sanitized again.
pub fn sanitize_html(body_html: &str) -> String {
    let tokens = lex(body_html);
    let mut raw = String::with_capacity(body_html.len());
    let mut skipping: Option<&str> = None;

    for token in &tokens {
        if let Some(element) = skipping {
            if matches!(token, Token::Close { name } if name == element) {
                skipping = None;
            }
            continue;
        }
        match token {
            Token::Text(t) => raw.push_str(&html_escape::decode_html_entities(t)),
            Token::Open { name, .. } | Token::Close { name } => {
                if let Token::Open { name, .. } = token {
                    if let Some(el) = RAW_TEXT_ELEMENTS.iter().find(|el| **el == name) {
                        skipping = Some(el);
                        continue;
                    }
                }
                if BLOCK_ELEMENTS.contains(&name.as_str()) {
                    raw.push('\n');
                }
            }
            Token::Skip => {}
        }
    }

    neutralize(&normalize_whitespace(&raw)).into_owned()
}

fn normalize_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for line in text.split('\n') {
        let mut first = true;
        for word in line.split(char::is_whitespace).filter(|w| !w.is_empty()) {
            if first {
                if !out.is_empty() {
                    out.push('\n');
                }
                first = false;
            } else {
                out.push(' ');
            }
            out.push_str(word);
        }
    }
    out
}

fn neutralize(text: &str) -> Cow<'_, str> {
    let bytes = text.as_bytes();
    let needs = |i: usize| match bytes[i] {
        b'<' => starts_tag(bytes.get(i + 1).copied()),
        b'&' => decodes_at(text, i),
        _ => false,
    };
    if !(0..bytes.len()).any(needs) {
        return Cow::Borrowed(text);
    }
    let mut out = String::with_capacity(text.len() + 8);
    let mut last = 0;
    for i in 0..bytes.len() {
        if needs(i) {
            out.push_str(&text[last..=i]);
            out.push(' ');
            last = i + 1;
        }
    }
    out.push_str(&text[last..]);
    Cow::Owned(out)
}

/// Whether the `&` at `i` starts a character reference the decoder would
/// expand.
fn decodes_at(text: &str, i: usize) -> bool {
    let rest = &text[i + 1..];
    let Some(semi) = rest.find(';') else {
        return false;
    };
    let candidate = &text[i..=i + 1 + semi];
    if candidate[1..].contains('&') {
        return false;
    }
    html_escape::decode_html_entities(candidate) != candidate
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_paragraph_is_not_rich() {
        assert!(!reject_rich_content("<p>Use the builtin</p>"));
    }

    #[test]
    fn code_block_is_rich() {
        assert!(reject_rich_content("<pre><code>x=1</code></pre>"));
        assert!(reject_rich_content(
            "<p>try</p><pre class=\"lang-py\">\n  <code>x=1</code></pre>"
        ));
    }

    #[test]
    fn bare_pre_and_inline_code_are_kept() {
        assert!(!reject_rich_content("<pre>plain</pre>"));
        assert!(!reject_rich_content("<p>call <code>len()</code></p>"));
    }

    #[test]
    fn links_need_href() {
        assert!(reject_rich_content(
            "<p>see <a href='http://x'>this</a></p>"
        ));
        assert!(reject_rich_content("<p>see <A HREF=http://x>this</A></p>"));
        assert!(!reject_rich_content("<p><a name=\"top\">anchor</a></p>"));
        assert!(!reject_rich_content(
            "<p><a title=\"no href here\">x</a></p>"
        ));
    }

    #[test]
    fn images_always_rich() {
        assert!(reject_rich_content("<p><img></p>"));
        assert!(reject_rich_content("<img src=\"a.png\" alt=\"x\"/>"));
    }

    #[test]
    fn entity_decoding() {
        assert_eq!(sanitize_html("<p>a&amp;b</p>"), "a&b");
        assert_eq!(
            sanitize_html("<p>&#65;&#x42;&hellip;&nbsp;z</p>"),
            "AB\u{2026} z"
        );
    }

    #[test]
    fn block_boundaries() {
        assert_eq!(sanitize_html("<p>x</p><p>y</p>"), "x\ny");
        assert_eq!(sanitize_html("a<br>b<br/>c"), "a\nb\nc");
        assert_eq!(
            sanitize_html("<ul>\n<li>one <em>two</em></li>\n<li>three</li></ul>"),
            "one two\nthree"
        );
    }

    #[test]
    fn whitespace_collapse() {
        assert_eq!(sanitize_html("  <p>  a \t  b  </p>  "), "a b");
    }

    #[test]
    fn inline_code_unwrapped() {
        assert_eq!(
            sanitize_html("<p>call <code>len(x)</code> now</p>"),
            "call len(x) now"
        );
    }

    #[test]
    fn lenient_on_broken_markup() {
        assert_eq!(sanitize_html("<p>a < b and 3<4</p>"), "a < b and 3<4");
        assert_eq!(sanitize_html("<p>dangling <b"), "dangling");
        assert_eq!(sanitize_html("x <!-- note --> y"), "x y");
        assert_eq!(sanitize_html("<p>unclosed <em>em"), "unclosed em");
    }

    #[test]
    fn scripts_dropped() {
        assert_eq!(sanitize_html("a<script>var x = '<p>';</script>b"), "ab");
    }

    #[test]
    fn escaped_markup_stays_inert() {
        let out = sanitize_html("<p>use &lt;div&gt; and &amp;amp;</p>");
        assert_eq!(out, "use < div> and & amp;");
        assert_eq!(sanitize_html(&out), out);
    }

    #[test]
    fn ampersands_that_are_not_references_untouched() {
        assert_eq!(sanitize_html("AT&amp;T &amp; co; x"), "AT&T & co; x");
    }
}
