use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenizerMode {
    /// WMT `13a` conventions: punctuation split off words, case kept.
    Bleu13a,
    /// Lowercased alphanumeric runs.
    Simple,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedText {
    pub original: String,
    pub tokens: Vec<String>,
}

impl TokenizedText {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

pub fn tokenize(text: &str, mode: TokenizerMode) -> TokenizedText {
    let tokens = match mode {
        TokenizerMode::Bleu13a => tokenize_13a(text),
        TokenizerMode::Simple => text
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
            .collect(),
    };
    TokenizedText {
        original: text.to_string(),
        tokens,
    }
}

struct Rules13a {
    punctuation: Regex,
    period_comma_after: Regex,
    period_comma_before: Regex,
    dash_after_digit: Regex,
}

fn rules_13a() -> &'static Rules13a {
    static RULES: OnceLock<Rules13a> = OnceLock::new();
    RULES.get_or_init(|| Rules13a {
        punctuation: Regex::new(r"([\{-~\[-` -&\(-\+:-@/])").unwrap(),
        period_comma_after: Regex::new(r"([^0-9])([\.,])").unwrap(),
        period_comma_before: Regex::new(r"([\.,])([^0-9])").unwrap(),
        dash_after_digit: Regex::new(r"([0-9])(-)").unwrap(),
    })
}

fn tokenize_13a(text: &str) -> Vec<String> {
    let mut line = text
        .replace("<skipped>", "")
        .replace("-\n", "")
        .replace('\n', " ");
    if line.contains('&') {
        line = line
            .replace("&quot;", "\"")
            .replace("&amp;", "&")
            .replace("&lt;", "<")
            .replace("&gt;", ">");
    }
    let rules = rules_13a();
    let line = format!(" {line} ");
    let line = rules.punctuation.replace_all(&line, " ${1} ");
    let line = rules.period_comma_after.replace_all(&line, "${1} ${2} ");
    let line = rules.period_comma_before.replace_all(&line, " ${1} ${2}");
    let line = rules.dash_after_digit.replace_all(&line, "${1} ${2} ");
    line.split_whitespace().map(str::to_string).collect()
}
