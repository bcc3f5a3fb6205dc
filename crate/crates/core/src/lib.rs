//! Proactive retrieval-based conversation engine.
//!
//! When a user stalls the conversation ("Errr", "…"), the engine looks at the
//! last few utterances, expands the entities it finds through a weighted
//! knowledge graph, retrieves replies mentioning those entities and reranks
//! them with an alternating PageRank / Co-HITS random walk over the bipartite
//! graph of context utterances (hubs) and candidate replies (authorities).
//!
//! Module map:
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`ranking`] | normalization, PageRank with prior, Co-HITS, the bipartite solver, baselines |
//! | [`text`] | tokenization, tf·idf cosine similarity, relevance scoring |
//! | [`kg`] | entity graph loading, top-k expansion, dictionary entity extraction |
//! | [`retrieval`] | inverted index and candidate retrieval |
//! | [`dialogue`] | sessions, stalemate detection, the respond pipeline |
//! | [`eval`] | p@1 / MAP / nDCG and the grouped method comparison |

pub mod dialogue;
pub mod eval;
pub mod kg;
pub mod ranking;
pub mod retrieval;
pub mod text;

pub use dialogue::{
    detect_stalemate, respond, ConversationSession, DialogueError, PatternSet, Resources, ResponseMode, ResponseTrace,
    Speaker, Utterance,
};
pub use eval::{compute_metrics, run_eval, Group, LabeledInstance, MetricReport, Metrics};
pub use kg::{EntityGraph, KnowledgeTuple};
pub use ranking::{
    bi_pagerank_hits, co_hits_solve, column_normalize, compute_priors, hits_weight_matrix, pagerank_solve,
    rank_baseline, rank_with, Baseline, Orientation, RankError, RankMethod, RankParams, RankedList, RerankState,
    ScoreVector, WeightMatrix,
};
pub use retrieval::{
    build_index, retrieve_candidates, CandidateSet, Index, QueryReplyPair, RetrievalCaps, RetrievalMode,
};
pub use text::{relevance_phi, similarity, tokenize, BlendedRelevance, CorpusStats, RelevanceScorer};
