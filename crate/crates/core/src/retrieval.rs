//! Inverted index over query–reply pairs and candidate retrieval.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{tokenize, CorpusStats};

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("duplicate pair id {0}")]
    DuplicateId(usize),
    #[error("pair ids must be dense from 0; missing {0}")]
    SparseIds(usize),
    #[error("corpus line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("introducing-mode retrieval needs at least one entity")]
    NoEntities,
    #[error("reading corpus: {0}")]
    Io(#[from] std::io::Error),
    #[error("index file: {0}")]
    Format(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryReplyPair {
    pub id: usize,
    pub query_text: String,
    pub reply_text: String,
}

/// Reads `query<TAB>reply` lines. Ids follow line order, skipping blank lines.
pub fn parse_corpus(reader: impl BufRead) -> Result<Vec<QueryReplyPair>, RetrievalError> {
    let mut pairs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let Some((query, reply)) = line.split_once('\t') else {
            return Err(RetrievalError::Malformed { line: idx + 1, message: "missing tab separator".into() });
        };
        if reply.contains('\t') {
            return Err(RetrievalError::Malformed { line: idx + 1, message: "more than two fields".into() });
        }
        pairs.push(QueryReplyPair {
            id: pairs.len(),
            query_text: query.trim().to_string(),
            reply_text: reply.trim().to_string(),
        });
    }
    Ok(pairs)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<QueryReplyPair>, RetrievalError> {
    let file = std::fs::File::open(path)?;
    parse_corpus(std::io::BufReader::new(file))
}

/// Token postings plus the tf·idf statistics of the same corpus.
///
/// Every query text and every reply text counts as one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Index {
    pairs: Vec<QueryReplyPair>,
    postings: BTreeMap<String, Vec<usize>>,
    reply_lengths: Vec<usize>,
    stats: CorpusStats,
}

impl Index {
    pub fn pairs(&self) -> &[QueryReplyPair] {
        &self.pairs
    }

    pub fn pair(&self, id: usize) -> Option<&QueryReplyPair> {
        self.pairs.get(id)
    }

    pub fn stats(&self) -> &CorpusStats {
        &self.stats
    }

    /// Ids of pairs whose query or reply contains `token`, ascending.
    pub fn postings(&self, token: &str) -> &[usize] {
        self.postings.get(token).map_or(&[], Vec::as_slice)
    }

    pub fn reply_token_count(&self, id: usize) -> usize {
        self.reply_lengths[id]
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), RetrievalError> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(file, self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RetrievalError> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        Ok(serde_json::from_reader(file)?)
    }
}

pub fn build_index(pairs: Vec<QueryReplyPair>) -> Result<Index, RetrievalError> {
    if pairs.is_empty() {
        return Err(RetrievalError::EmptyCorpus);
    }
    let mut pairs = pairs;
    pairs.sort_by_key(|p| p.id);
    for w in pairs.windows(2) {
        if w[0].id == w[1].id {
            return Err(RetrievalError::DuplicateId(w[0].id));
        }
    }
    if let Some((expected, _)) = pairs.iter().enumerate().find(|(i, p)| p.id != *i) {
        return Err(RetrievalError::SparseIds(expected));
    }

    let mut postings: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    let mut stats = CorpusStats::default();
    let mut reply_lengths = Vec::with_capacity(pairs.len());
    for p in &pairs {
        stats.add_document(&p.query_text);
        stats.add_document(&p.reply_text);
        let reply_tokens = tokenize(&p.reply_text);
        reply_lengths.push(reply_tokens.len());
        for t in tokenize(&p.query_text).tokens().iter().chain(reply_tokens.tokens()) {
            postings.entry(t.clone()).or_default().insert(p.id);
        }
    }
    let postings = postings.into_iter().map(|(t, ids)| (t, ids.into_iter().collect())).collect();
    Ok(Index { pairs, postings, reply_lengths, stats })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetrievalMode {
    /// Replies must mention one of the target entities.
    Introducing,
    /// Plain context-similarity retrieval.
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetrievalCaps {
    pub per_entity: usize,
    pub total: usize,
    /// Replies with fewer tokens are dropped before ranking.
    pub min_len: usize,
}

impl Default for RetrievalCaps {
    fn default() -> Self {
        Self { per_entity: 10, total: 50, min_len: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub mode: RetrievalMode,
    pub candidates: Vec<Candidate>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn ids(&self) -> Vec<usize> {
        self.candidates.iter().map(|c| c.id).collect()
    }
}

fn sort_candidates(c: &mut [Candidate]) {
    c.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.id.cmp(&b.id)));
}

/// Retrieves candidate replies scored by tf·idf cosine between the
/// concatenated context and the whole pair (query and reply).
///
/// Introducing mode keeps, for each entity, the best `per_entity` replies
/// containing it verbatim, merges them (a reply reached through several
/// entities keeps its score once) and truncates to `total`. General mode
/// scores every reply. Both drop replies shorter than `min_len` tokens first.
pub fn retrieve_candidates<S: AsRef<str>>(
    index: &Index,
    context_texts: &[S],
    entities: &[(String, f64)],
    mode: RetrievalMode,
    caps: RetrievalCaps,
) -> Result<CandidateSet, RetrievalError> {
    let context = context_texts.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(" ");
    let context_vec = index.stats.vectorize(&context);
    let eligible = |p: &&QueryReplyPair| index.reply_lengths[p.id] >= caps.min_len;
    let score = |p: &QueryReplyPair| Candidate {
        id: p.id,
        score: context_vec.cosine(&index.stats.vectorize(&format!("{} {}", p.query_text, p.reply_text))),
    };

    let mut candidates = match mode {
        RetrievalMode::General => index.pairs.iter().filter(eligible).map(score).collect::<Vec<_>>(),
        RetrievalMode::Introducing => {
            if entities.is_empty() {
                return Err(RetrievalError::NoEntities);
            }
            let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
            for (entity, _) in entities {
                let mut hits: Vec<Candidate> = index
                    .pairs
                    .iter()
                    .filter(eligible)
                    .filter(|p| p.reply_text.contains(entity.as_str()))
                    .map(score)
                    .collect();
                sort_candidates(&mut hits);
                for c in hits.into_iter().take(caps.per_entity) {
                    let s = merged.entry(c.id).or_insert(c.score);
                    *s = s.max(c.score);
                }
            }
            merged.into_iter().map(|(id, score)| Candidate { id, score }).collect()
        }
    };
    sort_candidates(&mut candidates);
    candidates.truncate(caps.total);
    Ok(CandidateSet { mode, candidates })
}
