//! The respond loop: decide whether to steer, pick what to introduce, and
//! select a reply.
//!
//! ```text
//! utterance ──► stalemate? ──no──────────────────────────► general mode
//!                  │yes
//!                  ▼
//!          entities in last 4 utterances? ──none──────────► general mode
//!                  │
//!                  ▼
//!          top-5 KG neighbours of each ──► entity-constrained retrieval
//!                  │                         (empty ⇒ general mode)
//!                  ▼
//!          bipartite rerank against the context ──► top-1 reply
//! ```

mod patterns;
mod session;

pub use patterns::{detect_stalemate, PatternError, PatternSet};
pub use session::{ConversationSession, Speaker, Utterance, CONTEXT_WINDOW};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kg::EntityGraph;
use crate::ranking::{bi_pagerank_hits, rank_baseline, Baseline, RankError, RankParams, RankedList, RerankState};
use crate::retrieval::{retrieve_candidates, CandidateSet, Index, RetrievalCaps, RetrievalError, RetrievalMode};
use crate::text::{BlendedRelevance, RelevanceScorer};

/// Neighbours kept per context entity.
pub const EXPANSION_K: usize = 5;

#[derive(Debug, Error)]
pub enum DialogueError {
    #[error("no candidate reply found")]
    NoReply { trace: Box<ResponseTrace> },
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseMode {
    Introducing,
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpandedEntity {
    pub entity: String,
    pub weight: f64,
    /// Context entity this one was reached from.
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceCandidate {
    pub id: usize,
    pub text: String,
    pub retrieval_score: f64,
    /// Score assigned by the reranker.
    pub final_score: f64,
}

/// Everything the pipeline decided on the way to a reply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseTrace {
    pub mode: ResponseMode,
    pub stalemate: bool,
    pub context: Vec<String>,
    pub detected_entities: Vec<String>,
    pub expanded_entities: Vec<ExpandedEntity>,
    /// Retrieved candidates in retrieval order.
    pub candidates: Vec<TraceCandidate>,
    /// Reranking over `candidates`; entry indices point into that list.
    pub ranking: Option<RankedList>,
    pub chosen_id: Option<usize>,
}

impl ResponseTrace {
    /// Candidates in final rank order.
    pub fn ranked_candidates(&self) -> Vec<&TraceCandidate> {
        match &self.ranking {
            Some(r) => r.entries.iter().map(|e| &self.candidates[e.index]).collect(),
            None => Vec::new(),
        }
    }
}

/// Shared, read-only inputs of the pipeline.
pub struct Resources {
    pub index: Index,
    pub graph: EntityGraph,
    pub patterns: PatternSet,
    pub params: RankParams,
    pub caps: RetrievalCaps,
    pub scorer: Box<dyn RelevanceScorer>,
}

impl Resources {
    pub fn new(index: Index, graph: EntityGraph, patterns: PatternSet) -> Self {
        Self {
            index,
            graph,
            patterns,
            params: RankParams::default(),
            caps: RetrievalCaps::default(),
            scorer: Box::new(BlendedRelevance::default()),
        }
    }
}

impl std::fmt::Debug for Resources {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Resources")
            .field("pairs", &self.index.pairs().len())
            .field("kg_edges", &self.graph.num_edges())
            .field("patterns", &self.patterns.len())
            .field("params", &self.params)
            .field("caps", &self.caps)
            .finish_non_exhaustive()
    }
}

/// Expands each context entity to its heaviest neighbours.
///
/// A neighbour reached from several context entities keeps its largest
/// weight and the first source that produced it.
fn expand(graph: &EntityGraph, entities: &[String]) -> Vec<ExpandedEntity> {
    let mut out: Vec<ExpandedEntity> = Vec::new();
    for source in entities {
        for (entity, weight) in graph.related_entities(source, EXPANSION_K) {
            match out.iter_mut().find(|e| e.entity == entity) {
                Some(existing) => existing.weight = existing.weight.max(weight),
                None => out.push(ExpandedEntity { entity, weight, source: source.clone() }),
            }
        }
    }
    out
}

/// Context entities (weight 1) plus their expansions, one entry per entity.
fn retrieval_targets(detected: &[String], expanded: &[ExpandedEntity]) -> Vec<(String, f64)> {
    let mut targets: BTreeMap<&str, f64> = BTreeMap::new();
    let mut order = Vec::new();
    let all = detected.iter().map(|e| (e.as_str(), 1.0)).chain(expanded.iter().map(|e| (e.entity.as_str(), e.weight)));
    for (entity, weight) in all {
        match targets.get_mut(entity) {
            Some(w) => *w = w.max(weight),
            None => {
                targets.insert(entity, weight);
                order.push(entity);
            }
        }
    }
    order.into_iter().map(|e| (e.to_string(), targets[e])).collect()
}

fn rerank(
    resources: &Resources,
    context: &[String],
    set: &CandidateSet,
    mode: ResponseMode,
) -> Result<(Vec<TraceCandidate>, RankedList), DialogueError> {
    let texts: Vec<String> = set.candidates.iter().map(|c| resources.index.pairs()[c.id].reply_text.clone()).collect();
    let state = RerankState::from_texts(context.to_vec(), texts.clone(), resources.index.stats(), &*resources.scorer)?;
    let ranking = match mode {
        ResponseMode::Introducing => bi_pagerank_hits(&state, &resources.params)?,
        ResponseMode::General => rank_baseline(Baseline::Textual, &state, &resources.params)?,
    };
    let scores = ranking.scores_by_index();
    let candidates = set
        .candidates
        .iter()
        .zip(texts)
        .zip(scores)
        .map(|((c, text), final_score)| TraceCandidate { id: c.id, text, retrieval_score: c.score, final_score })
        .collect();
    Ok((candidates, ranking))
}

/// Produces the computer's next reply.
///
/// On success the human utterance and the reply are both appended to
/// `session`. On failure the session is left untouched; a
/// [`DialogueError::NoReply`] carries the trace gathered so far.
pub fn respond(
    session: &mut ConversationSession,
    utterance: &str,
    resources: &Resources,
) -> Result<(String, ResponseTrace), DialogueError> {
    let mut context = session.window(CONTEXT_WINDOW - 1);
    context.push(utterance.to_string());

    let stalemate = detect_stalemate(&resources.patterns, utterance);
    let detected = resources.graph.extract_entities(&context);
    let mut trace = ResponseTrace {
        mode: ResponseMode::General,
        stalemate,
        context: context.clone(),
        detected_entities: detected.clone(),
        expanded_entities: Vec::new(),
        candidates: Vec::new(),
        ranking: None,
        chosen_id: None,
    };

    let mut selected = None;
    if stalemate && !detected.is_empty() {
        trace.expanded_entities = expand(&resources.graph, &detected);
        if !trace.expanded_entities.is_empty() {
            let targets = retrieval_targets(&detected, &trace.expanded_entities);
            let set =
                retrieve_candidates(&resources.index, &context, &targets, RetrievalMode::Introducing, resources.caps)?;
            if !set.is_empty() {
                selected = Some((ResponseMode::Introducing, set));
            }
        }
    }
    let (mode, set) = match selected {
        Some(s) => s,
        None => {
            let set = retrieve_candidates(&resources.index, &context, &[], RetrievalMode::General, resources.caps)?;
            (ResponseMode::General, set)
        }
    };
    trace.mode = mode;
    if set.is_empty() {
        return Err(DialogueError::NoReply { trace: Box::new(trace) });
    }

    let (candidates, ranking) = rerank(resources, &context, &set, mode)?;
    let top = ranking.top().expect("nonempty candidate set");
    let chosen = &candidates[top.index];
    let reply = chosen.text.clone();
    trace.chosen_id = Some(chosen.id);
    trace.candidates = candidates;
    trace.ranking = Some(ranking);

    session.push(Speaker::Human, utterance);
    session.push(Speaker::Computer, reply.clone());
    Ok((reply, trace))
}
