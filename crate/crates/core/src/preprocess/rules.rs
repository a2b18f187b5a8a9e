use regex::{RegexSet, RegexSetBuilder};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The shipped API-usage ruleset.
pub const DEFAULT_RULES_JSON: &str = include_str!("../../data/api_usage_rules.json");

pub const API_USAGE: &str = "API Usage";

/// A named category identified by case-insensitive regular expressions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaxonomyRuleSet {
    pub category: String,
    pub patterns: Vec<String>,
}

/// A validated, compiled [`TaxonomyRuleSet`].
#[derive(Debug, Clone)]
pub struct CompiledRules {
    category: String,
    set: RegexSet,
}

impl TaxonomyRuleSet {
    pub fn compile(&self) -> Result<CompiledRules> {
        if self.patterns.is_empty() {
            return Err(Error::invalid(format!(
                "ruleset {:?} has no patterns",
                self.category
            )));
        }
        for pattern in &self.patterns {
            regex::RegexBuilder::new(pattern)
                .case_insensitive(true)
                .build()
                .map_err(|source| Error::Pattern {
                    pattern: pattern.clone(),
                    source,
                })?;
        }
        let set = RegexSetBuilder::new(&self.patterns)
            .case_insensitive(true)
            .build()
            .map_err(|source| Error::Pattern {
                pattern: self.patterns.join(" | "),
                source,
            })?;
        Ok(CompiledRules {
            category: self.category.clone(),
            set,
        })
    }
}

impl CompiledRules {
    pub fn category(&self) -> &str {
        &self.category
    }

    pub fn is_match(&self, text: &str) -> bool {
        self.set.is_match(text)
    }
}

/// Parses a ruleset file: a JSON list of `{category, patterns[]}`.
pub fn parse_rulesets(json: &str) -> Result<Vec<TaxonomyRuleSet>> {
    serde_json::from_str(json).map_err(|e| Error::invalid(format!("ruleset file: {e}")))
}

/// Picks `category` out of a ruleset file.
pub fn select(rulesets: &[TaxonomyRuleSet], category: &str) -> Result<TaxonomyRuleSet> {
    rulesets
        .iter()
        .find(|r| r.category.eq_ignore_ascii_case(category))
        .cloned()
        .ok_or_else(|| Error::invalid(format!("ruleset has no category {category:?}")))
}

pub fn default_api_usage() -> TaxonomyRuleSet {
    let all = parse_rulesets(DEFAULT_RULES_JSON).expect("shipped ruleset parses");
    select(&all, API_USAGE).expect("shipped ruleset has API Usage")
}
