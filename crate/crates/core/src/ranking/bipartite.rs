use serde::{Deserialize, Serialize};

use super::baseline::RankMethod;
use super::cohits::{co_hits_solve, compute_priors, hits_weight_matrix};
use super::matrix::{mean_square_diff, Orientation, ScoreVector, WeightMatrix};
use super::pagerank::pagerank_solve;
use super::{RankError, RankParams, Result};
use crate::text::{CorpusStats, RelevanceScorer};

/// One reranking problem: context utterances (queries, the hubs) against
/// candidate replies (the authorities).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerankState {
    query_texts: Vec<String>,
    candidate_texts: Vec<String>,
    m_q: WeightMatrix,
    m_r: WeightMatrix,
    phi: WeightMatrix,
    x_hat: ScoreVector,
    y_hat: ScoreVector,
}

impl RerankState {
    /// Scores every pair of texts.
    ///
    /// Same-side graphs use tf·idf cosine with an empty diagonal, cross-side
    /// edges use `scorer`, and the hub/authority priors come from the cosine
    /// similarity between queries and replies.
    pub fn from_texts(
        query_texts: Vec<String>,
        candidate_texts: Vec<String>,
        stats: &CorpusStats,
        scorer: &dyn RelevanceScorer,
    ) -> Result<Self> {
        if query_texts.is_empty() || candidate_texts.is_empty() {
            return Err(RankError::Empty("need at least one query and one candidate".into()));
        }
        let qv: Vec<_> = query_texts.iter().map(|t| stats.vectorize(t)).collect();
        let rv: Vec<_> = candidate_texts.iter().map(|t| stats.vectorize(t)).collect();
        let (nq, nr) = (qv.len(), rv.len());

        let same_side = |vs: &[crate::text::TfIdfVector], orientation| {
            WeightMatrix::from_fn(
                vs.len(),
                vs.len(),
                orientation,
                |i, j| {
                    if i == j {
                        0.0
                    } else {
                        vs[i].cosine(&vs[j])
                    }
                },
            )
        };
        let m_q = same_side(&qv, Orientation::QueryQuery);
        let m_r = same_side(&rv, Orientation::ReplyReply);
        let sim_qr = WeightMatrix::from_fn(nq, nr, Orientation::QueryToReply, |i, j| qv[i].cosine(&rv[j]));
        let phi = WeightMatrix::from_fn(nq, nr, Orientation::QueryToReply, |i, j| {
            scorer.score(&query_texts[i], &candidate_texts[j], stats)
        });
        Self::from_matrices(query_texts, candidate_texts, m_q, m_r, phi, &sim_qr)
    }

    /// Assembles a state from precomputed matrices.
    ///
    /// `phi` and `sim_qr` are query×reply. Relevance values must lie strictly
    /// inside (0, 1).
    pub fn from_matrices(
        query_texts: Vec<String>,
        candidate_texts: Vec<String>,
        m_q: WeightMatrix,
        m_r: WeightMatrix,
        phi: WeightMatrix,
        sim_qr: &WeightMatrix,
    ) -> Result<Self> {
        let (nq, nr) = (query_texts.len(), candidate_texts.len());
        if nq == 0 || nr == 0 {
            return Err(RankError::Empty("need at least one query and one candidate".into()));
        }
        let check = |name: &str, m: &WeightMatrix, rows: usize, cols: usize| {
            if m.rows() != rows || m.cols() != cols {
                Err(RankError::DimensionMismatch(format!(
                    "{name} is {}x{}, expected {rows}x{cols}",
                    m.rows(),
                    m.cols()
                )))
            } else {
                Ok(())
            }
        };
        check("query similarity", &m_q, nq, nq)?;
        check("reply similarity", &m_r, nr, nr)?;
        check("relevance", &phi, nq, nr)?;
        check("query-reply similarity", sim_qr, nq, nr)?;
        if phi.orientation() != Orientation::QueryToReply {
            return Err(RankError::InvalidMatrix("relevance matrix must be query→reply".into()));
        }
        for i in 0..nq {
            if let Some(v) = phi.row(i).iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
                return Err(RankError::InvalidMatrix(format!("relevance {v} outside (0, 1)")));
            }
        }
        let (x_hat, y_hat) = compute_priors(sim_qr)?;
        Ok(Self { query_texts, candidate_texts, m_q, m_r, phi, x_hat, y_hat })
    }

    pub fn query_texts(&self) -> &[String] {
        &self.query_texts
    }

    pub fn candidate_texts(&self) -> &[String] {
        &self.candidate_texts
    }

    pub fn num_queries(&self) -> usize {
        self.query_texts.len()
    }

    pub fn num_candidates(&self) -> usize {
        self.candidate_texts.len()
    }

    pub fn query_similarity(&self) -> &WeightMatrix {
        &self.m_q
    }

    pub fn reply_similarity(&self) -> &WeightMatrix {
        &self.m_r
    }

    /// Query×reply relevance.
    pub fn phi(&self) -> &WeightMatrix {
        &self.phi
    }

    pub fn x_hat(&self) -> &ScoreVector {
        &self.x_hat
    }

    pub fn y_hat(&self) -> &ScoreVector {
        &self.y_hat
    }
}

/// Snapshot taken at the end of one global iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalIteration {
    pub iteration: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Mean-square difference of `(x, y)` against the previous iteration
    /// (against the priors for the first one).
    pub mean_square_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BipartiteSolution {
    /// Query PageRank scores from the last global iteration.
    pub q: ScoreVector,
    /// Reply PageRank scores from the last global iteration.
    pub r: ScoreVector,
    /// Hub scores.
    pub x: ScoreVector,
    /// Authority scores, used for the final ranking.
    pub y: ScoreVector,
    pub trace: Vec<GlobalIteration>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    /// Position of the candidate in the input list.
    pub index: usize,
    pub score: f64,
}

/// Candidates ordered by descending score, ties by ascending index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub method: RankMethod,
    pub entries: Vec<RankedEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<GlobalIteration>,
}

impl RankedList {
    pub fn from_scores(method: RankMethod, scores: &[f64], trace: Vec<GlobalIteration>) -> Self {
        let mut entries: Vec<RankedEntry> =
            scores.iter().enumerate().map(|(index, &score)| RankedEntry { index, score }).collect();
        entries.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.index.cmp(&b.index)));
        Self { method, entries, trace }
    }

    pub fn top(&self) -> Option<RankedEntry> {
        self.entries.first().copied()
    }

    pub fn order(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.index).collect()
    }

    /// Scores indexed by candidate position.
    pub fn scores_by_index(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.entries.len()];
        for e in &self.entries {
            out[e.index] = e.score;
        }
        out
    }
}

/// Runs the alternating PageRank / Co-HITS solver and keeps every
/// intermediate vector.
///
/// Each global iteration:
/// 1. query priors: uniform on the first pass, the hub scores `x` afterwards;
/// 2. PageRank over the query similarity graph gives `q`;
/// 3. `W̃_qr = φ·q` and a Co-HITS pass;
/// 4. reply priors: uniform on the first pass, the authority scores `y` afterwards;
/// 5. PageRank over the reply similarity graph gives `r`;
/// 6. `W̃_rq = φᵀ·r` and another Co-HITS pass.
///
/// The loop stops once the mean-square change of `(x, y)` between global
/// iterations drops below `params.global_tol`. Before the first reply
/// PageRank the reply-side weights use uniform `r`.
pub fn bi_pagerank_hits_solution(state: &RerankState, params: &RankParams) -> Result<BipartiteSolution> {
    params.validate()?;
    let (nq, nr) = (state.num_queries(), state.num_candidates());
    let phi_rq = state.phi.transpose();

    let mut x = state.x_hat.clone();
    let mut y = state.y_hat.clone();
    let mut r = ScoreVector::uniform(nr);
    let mut trace: Vec<GlobalIteration> = Vec::new();

    for iteration in 1..=params.max_global_iters {
        let query_prior = if iteration == 1 { ScoreVector::uniform(nq) } else { x.clone() };
        let q = pagerank_solve(&state.m_q, &query_prior, params)?;
        let w_qr = hits_weight_matrix(&state.phi, &q, Orientation::QueryToReply)?;
        let w_rq = hits_weight_matrix(&phi_rq, &r, Orientation::ReplyToQuery)?;
        let (_, y_mid) = co_hits_solve(&w_qr, &w_rq, &state.x_hat, &state.y_hat, params)?;

        let reply_prior = if iteration == 1 { ScoreVector::uniform(nr) } else { y_mid };
        r = pagerank_solve(&state.m_r, &reply_prior, params)?;
        let w_rq = hits_weight_matrix(&phi_rq, &r, Orientation::ReplyToQuery)?;
        let (nx, ny) = co_hits_solve(&w_qr, &w_rq, &state.x_hat, &state.y_hat, params)?;

        let diff = (mean_square_diff(nx.as_slice(), x.as_slice()) * nq as f64
            + mean_square_diff(ny.as_slice(), y.as_slice()) * nr as f64)
            / (nq + nr) as f64;
        x = nx;
        y = ny;
        trace.push(GlobalIteration {
            iteration,
            x: x.as_slice().to_vec(),
            y: y.as_slice().to_vec(),
            mean_square_diff: diff,
        });
        if diff < params.global_tol {
            return Ok(BipartiteSolution { q, r, x, y, trace });
        }
    }
    Err(RankError::GlobalNonConvergence { trace })
}

/// Ranks candidates by their authority scores after global convergence.
pub fn bi_pagerank_hits(state: &RerankState, params: &RankParams) -> Result<RankedList> {
    let solution = bi_pagerank_hits_solution(state, params)?;
    Ok(RankedList::from_scores(RankMethod::BiPageRankHits, solution.y.as_slice(), solution.trace))
}
