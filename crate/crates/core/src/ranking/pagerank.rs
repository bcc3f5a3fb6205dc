use super::matrix::{column_normalize, mean_square_diff, ScoreVector, WeightMatrix};
use super::{RankError, RankParams, Result};

/// PageRank with a prior restart distribution over one side of the graph.
///
/// Iterates `v ← (1−μ)·T·v + μ·prior` from `v = prior`, where
/// `T = column_normalize(Diag(prior) · simᵀ)`, until the mean-square change
/// drops below `params.local_tol`.
pub fn pagerank_solve(sim: &WeightMatrix, prior: &ScoreVector, params: &RankParams) -> Result<ScoreVector> {
    params.validate()?;
    let n = sim.rows();
    if sim.cols() != n {
        return Err(RankError::DimensionMismatch(format!(
            "similarity matrix must be square, got {}x{}",
            n,
            sim.cols()
        )));
    }
    if prior.len() != n {
        return Err(RankError::DimensionMismatch(format!("prior has {} entries for {n} nodes", prior.len())));
    }

    let p = prior.as_slice();
    let transition = column_normalize(&WeightMatrix::from_fn(n, n, sim.orientation(), |i, j| p[i] * sim.get(j, i)));

    let damp = 1.0 - params.mu;
    let mut v = p.to_vec();
    let mut residual = f64::INFINITY;
    for _ in 0..params.max_local_iters {
        let next: Vec<f64> =
            transition.mul_vec(&v).into_iter().zip(p).map(|(tv, pi)| damp * tv + params.mu * pi).collect();
        residual = mean_square_diff(&next, &v);
        v = next;
        if residual < params.local_tol {
            return Ok(ScoreVector::from_solver(v));
        }
    }
    Err(RankError::LocalNonConvergence { solver: "pagerank", iterations: params.max_local_iters, residual, last: v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranking::Orientation;

    fn sym(rows: Vec<Vec<f64>>) -> WeightMatrix {
        WeightMatrix::from_rows(rows, Orientation::QueryQuery).unwrap()
    }

    #[test]
    fn symmetric_pair_stays_uniform() {
        let v = pagerank_solve(
            &sym(vec![vec![0.0, 1.0], vec![1.0, 0.0]]),
            &ScoreVector::uniform(2),
            &RankParams::default(),
        )
        .unwrap();
        for s in v.as_slice() {
            assert!((s - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn mu_one_returns_prior_exactly() {
        let prior = ScoreVector::from_weights(vec![0.2, 0.7, 0.1]).unwrap();
        let params = RankParams { mu: 1.0, ..RankParams::default() };
        let sim = sym(vec![vec![0.0, 0.3, 0.9], vec![0.3, 0.0, 0.4], vec![0.9, 0.4, 0.0]]);
        let v = pagerank_solve(&sim, &prior, &params).unwrap();
        assert_eq!(v, prior);
    }

    #[test]
    fn three_node_reference() {
        // numpy linear solve of v = μ(I − (1−μ)T)⁻¹ p, see tests/oracle/reference.py
        let expected = [0.43079175924055746, 0.34786911735003023, 0.22133912340941223];
        let sim = sym(vec![vec![0.0, 1.0, 0.5], vec![1.0, 0.0, 0.2], vec![0.5, 0.2, 0.0]]);
        let params = RankParams::default().with_tolerances(1e-24, 1e-6);
        let v = pagerank_solve(&sim, &ScoreVector::uniform(3), &params).unwrap();
        for (a, b) in v.as_slice().iter().zip(expected) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn dimension_errors() {
        let sim = sym(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let err = pagerank_solve(&sim, &ScoreVector::uniform(3), &RankParams::default()).unwrap_err();
        assert!(matches!(err, RankError::DimensionMismatch(_)));
        let rect = WeightMatrix::from_rows(vec![vec![0.0, 1.0, 1.0]], Orientation::QueryQuery).unwrap();
        assert!(pagerank_solve(&rect, &ScoreVector::uniform(1), &RankParams::default()).is_err());
    }

    #[test]
    fn non_convergence_reports_last_iterate() {
        let sim = sym(vec![vec![0.0, 1.0, 0.5], vec![1.0, 0.0, 0.2], vec![0.5, 0.2, 0.0]]);
        let params = RankParams { max_local_iters: 2, local_tol: 1e-30, ..RankParams::default() };
        match pagerank_solve(&sim, &ScoreVector::uniform(3), &params) {
            Err(RankError::LocalNonConvergence { iterations, last, residual, .. }) => {
                assert_eq!(iterations, 2);
                assert_eq!(last.len(), 3);
                assert!(residual > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
