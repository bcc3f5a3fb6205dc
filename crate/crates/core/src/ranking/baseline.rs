use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::bipartite::{bi_pagerank_hits, RankedList, RerankState};
use super::cohits::{co_hits_solve, hits_weight_matrix};
use super::matrix::{Orientation, ScoreVector};
use super::pagerank::pagerank_solve;
use super::{RankError, RankParams, Result};

/// Reference rankers the bipartite solver is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    /// Mean query relevance of each candidate.
    Textual,
    /// PageRank over the reply similarity graph with a uniform prior.
    #[serde(rename = "reply_pagerank")]
    ReplyPageRank,
    /// Co-HITS with both mixing weights at 1, on uniformly weighted edges.
    Hits,
    /// Co-HITS with the configured mixing weights and textual priors.
    CoHits,
}

/// Every ranking method, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankMethod {
    Textual,
    Hits,
    #[serde(rename = "reply_pagerank")]
    ReplyPageRank,
    CoHits,
    #[serde(rename = "bi_pagerank_hits")]
    BiPageRankHits,
}

impl RankMethod {
    pub const ALL: [RankMethod; 5] = [
        RankMethod::Textual,
        RankMethod::Hits,
        RankMethod::ReplyPageRank,
        RankMethod::CoHits,
        RankMethod::BiPageRankHits,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Self::Textual => "textual",
            Self::Hits => "hits",
            Self::ReplyPageRank => "reply_pagerank",
            Self::CoHits => "co_hits",
            Self::BiPageRankHits => "bi_pagerank_hits",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Self::Textual => "Textual similarity",
            Self::Hits => "HITS",
            Self::ReplyPageRank => "Reply PageRank",
            Self::CoHits => "Co-HITS",
            Self::BiPageRankHits => "Bi-PageRank-HITS",
        }
    }

    fn baseline(self) -> Option<Baseline> {
        match self {
            Self::Textual => Some(Baseline::Textual),
            Self::Hits => Some(Baseline::Hits),
            Self::ReplyPageRank => Some(Baseline::ReplyPageRank),
            Self::CoHits => Some(Baseline::CoHits),
            Self::BiPageRankHits => None,
        }
    }
}

impl fmt::Display for RankMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for RankMethod {
    type Err = RankError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|m| m.label() == s).ok_or_else(|| RankError::UnknownMethod(s.to_string()))
    }
}

impl From<Baseline> for RankMethod {
    fn from(b: Baseline) -> Self {
        match b {
            Baseline::Textual => Self::Textual,
            Baseline::ReplyPageRank => Self::ReplyPageRank,
            Baseline::Hits => Self::Hits,
            Baseline::CoHits => Self::CoHits,
        }
    }
}

impl FromStr for Baseline {
    type Err = RankError;

    fn from_str(s: &str) -> Result<Self> {
        RankMethod::from_str(s)?.baseline().ok_or_else(|| RankError::UnknownMethod(format!("{s} is not a baseline")))
    }
}

/// Ranks candidates with one of the reference methods.
pub fn rank_baseline(method: Baseline, state: &RerankState, params: &RankParams) -> Result<RankedList> {
    params.validate()?;
    let (nq, nr) = (state.num_queries(), state.num_candidates());
    let scores: Vec<f64> = match method {
        Baseline::Textual => {
            let phi = state.phi();
            let mut means = phi.column_sums();
            for m in &mut means {
                *m /= nq as f64;
            }
            means
        }
        Baseline::ReplyPageRank => {
            pagerank_solve(state.reply_similarity(), &ScoreVector::uniform(nr), params)?.into_vec()
        }
        Baseline::Hits | Baseline::CoHits => {
            let w_qr = hits_weight_matrix(state.phi(), &ScoreVector::uniform(nq), Orientation::QueryToReply)?;
            let w_rq =
                hits_weight_matrix(&state.phi().transpose(), &ScoreVector::uniform(nr), Orientation::ReplyToQuery)?;
            let params = if method == Baseline::Hits { params.with_alphas(1.0, 1.0) } else { *params };
            co_hits_solve(&w_qr, &w_rq, state.x_hat(), state.y_hat(), &params)?.1.into_vec()
        }
    };
    Ok(RankedList::from_scores(method.into(), &scores, Vec::new()))
}

/// Dispatches to a baseline or to the bipartite solver.
pub fn rank_with(method: RankMethod, state: &RerankState, params: &RankParams) -> Result<RankedList> {
    match method.baseline() {
        Some(b) => rank_baseline(b, state, params),
        None => bi_pagerank_hits(state, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for m in RankMethod::ALL {
            assert_eq!(m.label().parse::<RankMethod>().unwrap(), m);
        }
        assert!(matches!("pagerank".parse::<RankMethod>(), Err(RankError::UnknownMethod(_))));
        assert!("bi_pagerank_hits".parse::<Baseline>().is_err());
        assert_eq!("co_hits".parse::<Baseline>().unwrap(), Baseline::CoHits);
    }

    #[test]
    fn serde_uses_labels() {
        assert_eq!(serde_json::to_string(&RankMethod::BiPageRankHits).unwrap(), "\"bi_pagerank_hits\"");
        assert_eq!(serde_json::to_string(&RankMethod::ReplyPageRank).unwrap(), "\"reply_pagerank\"");
    }
}
