//! Random-walk ranking over the query/reply bipartite graph.
//!
//! Queries (context utterances) are hubs, candidate replies are authorities.
//! Each side gets a PageRank pass over its own similarity graph, then a
//! Co-HITS pass propagates scores across the bipartite edges. The
//! [`bi_pagerank_hits`] solver alternates the two until the hub/authority
//! scores stop moving.

mod baseline;
mod bipartite;
mod cohits;
mod matrix;
mod pagerank;

pub use baseline::{rank_baseline, rank_with, Baseline, RankMethod};
pub use bipartite::{
    bi_pagerank_hits, bi_pagerank_hits_solution, BipartiteSolution, GlobalIteration, RankedEntry, RankedList,
    RerankState,
};
pub use cohits::{co_hits_solve, compute_priors, hits_weight_matrix};
pub use matrix::{column_normalize, mean_square_diff, Orientation, ScoreVector, WeightMatrix};
pub use pagerank::pagerank_solve;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used when checking that a vector or column is stochastic.
pub const STOCHASTIC_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RankError {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid score vector: {0}")]
    InvalidScores(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    LocalNonConvergence { solver: &'static str, iterations: usize, residual: f64, last: Vec<f64> },
    #[error("global iteration did not converge after {} iterations", trace.len())]
    GlobalNonConvergence { trace: Vec<GlobalIteration> },
    #[error("unknown ranking method `{0}`")]
    UnknownMethod(String),
    #[error("empty problem: {0}")]
    Empty(String),
}

pub type Result<T> = std::result::Result<T, RankError>;

/// Parameters shared by every solver.
///
/// Tolerances are thresholds on the mean-square difference between
/// successive iterates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RankParams {
    /// PageRank restart probability.
    pub mu: f64,
    /// Weight of the propagated term in the hub (query) update.
    pub alpha_x: f64,
    /// Weight of the propagated term in the authority (reply) update.
    pub alpha_y: f64,
    pub local_tol: f64,
    pub global_tol: f64,
    pub max_local_iters: usize,
    pub max_global_iters: usize,
}

impl Default for RankParams {
    fn default() -> Self {
        Self {
            mu: 0.15,
            alpha_x: 0.3,
            alpha_y: 1.0,
            local_tol: 1e-9,
            global_tol: 1e-6,
            max_local_iters: 1000,
            max_global_iters: 100,
        }
    }
}

impl RankParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mu", self.mu), ("alpha_x", self.alpha_x), ("alpha_y", self.alpha_y)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(RankError::InvalidParams(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        for (name, v) in [("local_tol", self.local_tol), ("global_tol", self.global_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(RankError::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_local_iters == 0 || self.max_global_iters == 0 {
            return Err(RankError::InvalidParams("iteration caps must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_alphas(mut self, alpha_x: f64, alpha_y: f64) -> Self {
        self.alpha_x = alpha_x;
        self.alpha_y = alpha_y;
        self
    }

    pub fn with_tolerances(mut self, local_tol: f64, global_tol: f64) -> Self {
        self.local_tol = local_tol;
        self.global_tol = global_tol;
        self
    }
}
