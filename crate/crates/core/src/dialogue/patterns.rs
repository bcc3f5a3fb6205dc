use std::path::Path;

use regex::{Regex, RegexBuilder};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PatternError {
    #[error("pattern line {line}: invalid regex: {source}")]
    InvalidRegex {
        line: usize,
        #[source]
        source: regex::Error,
    },
    #[error("pattern set is empty")]
    Empty,
    #[error("reading pattern file: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
enum Pattern {
    Literal(String),
    Regex(Regex),
}

/// Filters for contentless utterances.
///
/// File format: one pattern per line; `re:` introduces a regular expression,
/// `#` starts a comment line, blank lines are ignored. Literals must equal the
/// trimmed utterance; regexes must match it in full. Both ignore case.
#[derive(Debug, Clone)]
pub struct PatternSet {
    patterns: Vec<Pattern>,
}

impl PatternSet {
    pub fn parse(src: &str) -> Result<Self, PatternError> {
        let mut patterns = Vec::new();
        for (idx, raw) in src.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(expr) = line.strip_prefix("re:") {
                let re = RegexBuilder::new(&format!("^(?:{})$", expr.trim()))
                    .case_insensitive(true)
                    .build()
                    .map_err(|source| PatternError::InvalidRegex { line: idx + 1, source })?;
                patterns.push(Pattern::Regex(re));
            } else {
                patterns.push(Pattern::Literal(line.to_lowercase()));
            }
        }
        if patterns.is_empty() {
            return Err(PatternError::Empty);
        }
        Ok(Self { patterns })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PatternError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// The filters shipped in `data/patterns.txt`.
    pub fn builtin() -> Self {
        Self::parse(include_str!("../../../../data/patterns.txt")).expect("bundled patterns are valid")
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn matches(&self, utterance: &str) -> bool {
        let trimmed = utterance.trim();
        let lowered = trimmed.to_lowercase();
        self.patterns.iter().any(|p| match p {
            Pattern::Literal(l) => *l == lowered,
            Pattern::Regex(re) => re.is_match(trimmed),
        })
    }
}

/// True when `utterance` carries no content and the engine should steer.
pub fn detect_stalemate(patterns: &PatternSet, utterance: &str) -> bool {
    patterns.matches(utterance)
}
