//! Splits a prompt into its main description and trailing keyword tail.
//!
//! The prompt is tokenized on commas. The first token always belongs to the
//! main part. Scanning the remaining tokens, the first one with fewer than
//! four whitespace-separated words starts the keyword tail: it and every
//! later token are keywords. Longer tokens before it stay in the main part.
//! Tokens are trimmed; empty tokens (e.g. from a trailing comma) are dropped.

use serde::{Deserialize, Serialize};

const KEYWORD_MAX_WORDS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSplit {
    pub main: String,
    pub keywords: Vec<String>,
}

pub fn split_prompt(text: &str) -> PromptSplit {
    let mut tokens = text.split(',').map(str::trim);
    let first = tokens.next().unwrap_or_default();
    let mut main = vec![first];
    let mut keywords = Vec::new();
    for token in tokens.filter(|t| !t.is_empty()) {
        if keywords.is_empty() && token.split_whitespace().count() > KEYWORD_MAX_WORDS {
            main.push(token);
        } else {
            keywords.push(token.to_owned());
        }
    }
    PromptSplit {
        main: main.join(", "),
        keywords,
    }
}
