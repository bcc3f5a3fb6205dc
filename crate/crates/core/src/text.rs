//! Tokenization, tf·idf vectors and the text scores used as graph weights.
//!
//! Space-delimited scripts are split on anything that is not alphanumeric and
//! lowercased. Runs of CJK characters have no word boundaries, so they are
//! cut into overlapping character bigrams; a lone CJK character is kept as a
//! unigram.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<String> {
        self.0
    }

    pub fn distinct(&self) -> BTreeSet<&str> {
        self.0.iter().map(String::as_str).collect()
    }
}

fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3040..=0x30FF       // hiragana, katakana
        | 0x3400..=0x4DBF     // CJK extension A
        | 0x4E00..=0x9FFF     // CJK unified ideographs
        | 0xAC00..=0xD7AF     // hangul syllables
        | 0xF900..=0xFAFF     // compatibility ideographs
        | 0x20000..=0x2FA1F) // supplementary ideographs
}

fn flush_cjk(run: &mut Vec<char>, out: &mut Vec<String>) {
    match run.len() {
        0 => {}
        1 => out.push(run[0].to_string()),
        _ => out.extend(run.windows(2).map(|w| w.iter().collect())),
    }
    run.clear();
}

fn flush_word(word: &mut String, out: &mut Vec<String>) {
    if !word.is_empty() {
        out.push(std::mem::take(word));
    }
}

pub fn tokenize(text: &str) -> TokenSequence {
    let mut out = Vec::new();
    let mut word = String::new();
    let mut run = Vec::new();
    for c in text.chars() {
        if is_cjk(c) {
            flush_word(&mut word, &mut out);
            run.push(c);
        } else if c.is_alphanumeric() {
            flush_cjk(&mut run, &mut out);
            // lowercase expansions can carry combining marks; keep only the
            // alphanumeric part so re-tokenizing is stable
            word.extend(c.to_lowercase().filter(|l| l.is_alphanumeric()));
        } else {
            flush_word(&mut word, &mut out);
            flush_cjk(&mut run, &mut out);
        }
    }
    flush_word(&mut word, &mut out);
    flush_cjk(&mut run, &mut out);
    TokenSequence(out)
}

/// Document frequencies over a fixed document set.
///
/// `idf(t) = ln((N + 1) / (df(t) + 1)) + 1`, so unseen tokens still get a
/// positive weight.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    num_docs: usize,
    doc_freq: BTreeMap<String, usize>,
}

impl CorpusStats {
    pub fn from_documents<'a>(docs: impl IntoIterator<Item = &'a str>) -> Self {
        let mut stats = Self::default();
        for doc in docs {
            stats.add_document(doc);
        }
        stats
    }

    pub fn add_document(&mut self, doc: &str) {
        self.num_docs += 1;
        for t in tokenize(doc).distinct() {
            *self.doc_freq.entry(t.to_string()).or_default() += 1;
        }
    }

    pub fn num_docs(&self) -> usize {
        self.num_docs
    }

    pub fn doc_freq(&self, token: &str) -> usize {
        self.doc_freq.get(token).copied().unwrap_or(0)
    }

    pub fn idf(&self, token: &str) -> f64 {
        ((self.num_docs as f64 + 1.0) / (self.doc_freq(token) as f64 + 1.0)).ln() + 1.0
    }

    pub fn vectorize(&self, text: &str) -> TfIdfVector {
        let mut tf: BTreeMap<String, f64> = BTreeMap::new();
        for t in tokenize(text).into_vec() {
            *tf.entry(t).or_default() += 1.0;
        }
        let weights: BTreeMap<String, f64> = tf
            .into_iter()
            .map(|(t, count)| {
                let w = count * self.idf(&t);
                (t, w)
            })
            .collect();
        let norm = weights.values().map(|w| w * w).sum::<f64>().sqrt();
        TfIdfVector { weights, norm }
    }
}

/// Sparse tf·idf vector keyed by token.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TfIdfVector {
    weights: BTreeMap<String, f64>,
    norm: f64,
}

impl TfIdfVector {
    pub fn weights(&self) -> &BTreeMap<String, f64> {
        &self.weights
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Cosine in [0, 1]; zero when either side is empty. The dot product
    /// walks tokens in sorted order so the result is symmetric bit-for-bit.
    pub fn cosine(&self, other: &TfIdfVector) -> f64 {
        if self.norm == 0.0 || other.norm == 0.0 {
            return 0.0;
        }
        let (small, large) = if self.weights.len() <= other.weights.len() { (self, other) } else { (other, self) };
        let mut pairs: Vec<(&String, f64)> =
            small.weights.iter().filter_map(|(t, a)| large.weights.get(t).map(|b| (t, a * b))).collect();
        pairs.sort_by(|a, b| a.0.cmp(b.0));
        let dot: f64 = pairs.iter().map(|(_, p)| p).sum();
        (dot / (self.norm * other.norm)).clamp(0.0, 1.0)
    }
}

/// Cosine similarity of the tf·idf vectors of `a` and `b`.
pub fn similarity(a: &str, b: &str, stats: &CorpusStats) -> f64 {
    stats.vectorize(a).cosine(&stats.vectorize(b))
}

/// Jaccard overlap of the two token sets; zero when both are empty.
pub fn token_jaccard(a: &str, b: &str) -> f64 {
    let (ta, tb) = (tokenize(a), tokenize(b));
    let (sa, sb) = (ta.distinct(), tb.distinct());
    let union = sa.union(&sb).count();
    if union == 0 {
        return 0.0;
    }
    sa.intersection(&sb).count() as f64 / union as f64
}

/// Query–reply relevance strictly inside (0, 1).
///
/// Implementations must be deterministic and symmetric enough to be used as
/// bipartite edge weights.
pub trait RelevanceScorer: Send + Sync {
    fn score(&self, query: &str, reply: &str, stats: &CorpusStats) -> f64;
}

/// `ε + (1 − 2ε)·(½·cosine + ½·jaccard)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlendedRelevance {
    pub epsilon: f64,
}

impl Default for BlendedRelevance {
    fn default() -> Self {
        Self { epsilon: 0.01 }
    }
}

impl RelevanceScorer for BlendedRelevance {
    fn score(&self, query: &str, reply: &str, stats: &CorpusStats) -> f64 {
        let blend = 0.5 * similarity(query, reply, stats) + 0.5 * token_jaccard(query, reply);
        self.epsilon + (1.0 - 2.0 * self.epsilon) * blend
    }
}

/// Relevance with the default blended scorer.
pub fn relevance_phi(q: &str, r: &str, stats: &CorpusStats) -> f64 {
    BlendedRelevance::default().score(q, r, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn strs(tokens: &[&str]) -> Vec<String> {
        tokens.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tokenize_ascii() {
        assert_eq!(tokenize("Hello, World!").into_vec(), strs(&["hello", "world"]));
        assert!(tokenize("").is_empty());
        assert!(tokenize("  …!? ").is_empty());
    }

    #[test]
    fn tokenize_cjk_bigrams() {
        assert_eq!(tokenize("天外飞仙").into_vec(), strs(&["天外", "外飞", "飞仙"]));
        assert_eq!(tokenize("啊…").into_vec(), strs(&["啊"]));
        assert_eq!(tokenize("我不是瓦力，WALL-E").into_vec(), strs(&["我不", "不是", "是瓦", "瓦力", "wall", "e"]));
    }

    fn fixture() -> CorpusStats {
        CorpusStats::from_documents(["good movie tonight", "good movie", "movie night"])
    }

    #[test]
    fn idf_smoothing() {
        let s = fixture();
        assert_eq!(s.num_docs(), 3);
        assert!((s.idf("movie") - 1.0).abs() < 1e-15);
        assert!((s.idf("good") - ((4.0f64 / 3.0).ln() + 1.0)).abs() < 1e-15);
        assert!((s.idf("unseen") - (4.0f64.ln() + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn similarity_reference() {
        // hand-computed tf·idf cosine, see tests/oracle/reference.py
        let s = fixture();
        let v = similarity("good movie tonight", "good movie", &s);
        assert!((v - 0.6936279421797704).abs() < 1e-10, "{v}");
        let phi = relevance_phi("good movie tonight", "good movie", &s);
        assert!((phi - 0.6765443583347541).abs() < 1e-10, "{phi}");
    }

    #[test]
    fn similarity_extremes() {
        let s = fixture();
        assert!((similarity("good movie", "good movie", &s) - 1.0).abs() < 1e-12);
        assert_eq!(similarity("good movie", "quiet night", &s), 0.0);
        assert_eq!(similarity("", "good movie", &s), 0.0);
        assert!((relevance_phi("good movie", "good movie", &s) - 0.99).abs() < 1e-12);
        assert!((relevance_phi("good movie", "quiet night", &s) - 0.01).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn scores_symmetric_and_bounded(a in "[a-e ]{0,20}", b in "[a-e ]{0,20}") {
            let s = CorpusStats::from_documents([a.as_str(), b.as_str(), "a b c"]);
            let ab = similarity(&a, &b, &s);
            prop_assert_eq!(ab, similarity(&b, &a, &s));
            prop_assert!((0.0..=1.0).contains(&ab));
            let phi = relevance_phi(&a, &b, &s);
            prop_assert_eq!(phi, relevance_phi(&b, &a, &s));
            prop_assert!(phi > 0.0 && phi < 1.0);
        }

        #[test]
        fn retokenizing_is_stable(text in "\\PC{0,40}") {
            prop_assume!(!text.chars().any(is_cjk));
            let once = tokenize(&text).into_vec();
            let twice = tokenize(&once.join(" ")).into_vec();
            prop_assert_eq!(once, twice);
        }
    }
}
