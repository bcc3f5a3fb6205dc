//! Weighted entity graph used to pick what to talk about next.
//!
//! The file format is one directed edge per line, `e1<TAB>e2<TAB>w`, with a
//! strictly positive weight. Blank lines and lines starting with `#` are
//! skipped.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::Path;

use aho_corasick::AhoCorasick;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KgError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("reading knowledge graph: {0}")]
    Io(#[from] std::io::Error),
    #[error("building entity matcher: {0}")]
    Matcher(#[from] aho_corasick::BuildError),
}

/// Directed edge `e1 → e2` with relatedness `w > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeTuple {
    pub e1: String,
    pub e2: String,
    pub w: f64,
}

/// Finds entity mentions in free text.
pub trait EntityExtractor {
    fn extract(&self, texts: &[&str]) -> Vec<String>;
}

#[derive(Debug, Clone)]
pub struct EntityGraph {
    adjacency: BTreeMap<String, Vec<(String, f64)>>,
    vocabulary: BTreeSet<String>,
    matcher: Option<AhoCorasick>,
    /// Vocabulary in matcher pattern-id order.
    patterns: Vec<String>,
    num_edges: usize,
}

impl EntityGraph {
    /// Builds the graph; a repeated `(e1, e2)` pair keeps its largest weight.
    pub fn from_tuples(tuples: impl IntoIterator<Item = KnowledgeTuple>) -> Result<Self, KgError> {
        let mut edges: BTreeMap<(String, String), f64> = BTreeMap::new();
        for t in tuples {
            let w = edges.entry((t.e1, t.e2)).or_insert(t.w);
            *w = w.max(t.w);
        }
        let mut adjacency: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
        let mut vocabulary = BTreeSet::new();
        let num_edges = edges.len();
        for ((e1, e2), w) in edges {
            vocabulary.insert(e1.clone());
            vocabulary.insert(e2.clone());
            adjacency.entry(e1).or_default().push((e2, w));
        }
        for neighbours in adjacency.values_mut() {
            neighbours.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        }
        let patterns: Vec<String> = vocabulary.iter().cloned().collect();
        let matcher = if patterns.is_empty() {
            None
        } else {
            Some(AhoCorasick::builder().ascii_case_insensitive(true).build(&patterns)?)
        };
        Ok(Self { adjacency, vocabulary, matcher, patterns, num_edges })
    }

    pub fn parse(reader: impl BufRead) -> Result<Self, KgError> {
        let mut tuples = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let malformed = |message: String| KgError::Malformed { line: lineno, message };
            if fields.len() != 3 {
                return Err(malformed(format!("expected 3 tab-separated fields, found {}", fields.len())));
            }
            let (e1, e2) = (fields[0].trim(), fields[1].trim());
            if e1.is_empty() || e2.is_empty() {
                return Err(malformed("empty entity name".into()));
            }
            let w: f64 = fields[2]
                .trim()
                .parse()
                .map_err(|_| malformed(format!("weight `{}` is not a number", fields[2].trim())))?;
            if !(w > 0.0 && w.is_finite()) {
                return Err(malformed(format!("weight {w} must be positive")));
            }
            tuples.push(KnowledgeTuple { e1: e1.to_string(), e2: e2.to_string(), w });
        }
        Self::from_tuples(tuples)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, KgError> {
        let file = std::fs::File::open(path)?;
        Self::parse(std::io::BufReader::new(file))
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn vocabulary(&self) -> &BTreeSet<String> {
        &self.vocabulary
    }

    pub fn contains(&self, entity: &str) -> bool {
        self.vocabulary.contains(entity)
    }

    /// Heaviest outgoing neighbours of `entity`, ties in lexicographic order.
    pub fn related_entities(&self, entity: &str, k: usize) -> Vec<(String, f64)> {
        self.adjacency.get(entity).map(|n| n.iter().take(k).cloned().collect()).unwrap_or_default()
    }

    /// Vocabulary entries mentioned in `texts`, in order of first appearance.
    ///
    /// Each text is scanned left to right taking the longest entry that
    /// starts at the current position; matches never overlap. ASCII letters
    /// match case-insensitively, and an entry that begins or ends with an
    /// ASCII letter or digit must sit on a word boundary there ("Eve" does
    /// not match inside "never"). Results use the vocabulary spelling.
    pub fn extract_entities<S: AsRef<str>>(&self, texts: &[S]) -> Vec<String> {
        let Some(matcher) = &self.matcher else {
            return Vec::new();
        };
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for text in texts {
            let text = text.as_ref();
            let mut hits: Vec<(usize, usize, usize)> = matcher
                .find_overlapping_iter(text)
                .filter(|m| on_word_boundary(text, m.start(), m.end()))
                .map(|m| (m.start(), m.end(), m.pattern().as_usize()))
                .collect();
            hits.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
            let mut cursor = 0;
            for (start, end, id) in hits {
                if start < cursor {
                    continue;
                }
                cursor = end;
                let entity = &self.patterns[id];
                if seen.insert(entity.as_str()) {
                    out.push(entity.clone());
                }
            }
        }
        out
    }
}

fn on_word_boundary(text: &str, start: usize, end: usize) -> bool {
    let word = |c: char| c.is_ascii_alphanumeric();
    let first = text[start..end].chars().next();
    let last = text[start..end].chars().next_back();
    let before = text[..start].chars().next_back();
    let after = text[end..].chars().next();
    let left_ok = !(first.is_some_and(word) && before.is_some_and(word));
    let right_ok = !(last.is_some_and(word) && after.is_some_and(word));
    left_ok && right_ok
}

impl EntityExtractor for EntityGraph {
    fn extract(&self, texts: &[&str]) -> Vec<String> {
        self.extract_entities(texts)
    }
}

/// Free-function form of [`EntityGraph::load`].
pub fn load_kg(path: impl AsRef<Path>) -> Result<EntityGraph, KgError> {
    EntityGraph::load(path)
}
