use super::matrix::{column_normalize, mean_square_diff, Orientation, ScoreVector, WeightMatrix};
use super::{RankError, RankParams, Result};

/// Unnormalized bipartite weights `W̃_ij = φ(i, j) · score_i`.
///
/// Rows index the source side: queries for [`Orientation::QueryToReply`],
/// replies for [`Orientation::ReplyToQuery`]. `phi` must already be laid out
/// in that orientation.
pub fn hits_weight_matrix(
    phi: &WeightMatrix,
    source_scores: &ScoreVector,
    direction: Orientation,
) -> Result<WeightMatrix> {
    if !matches!(direction, Orientation::QueryToReply | Orientation::ReplyToQuery) {
        return Err(RankError::InvalidMatrix(format!("HITS weights need a bipartite direction, got {direction:?}")));
    }
    if phi.orientation() != direction {
        return Err(RankError::DimensionMismatch(format!(
            "relevance matrix is laid out {:?} but {direction:?} was requested",
            phi.orientation()
        )));
    }
    if source_scores.len() != phi.rows() {
        return Err(RankError::DimensionMismatch(format!(
            "{} source scores for {} source rows",
            source_scores.len(),
            phi.rows()
        )));
    }
    let s = source_scores.as_slice();
    Ok(WeightMatrix::from_fn(phi.rows(), phi.cols(), direction, |i, j| phi.get(i, j) * s[i]))
}

/// Hub and authority priors from the query×reply textual similarity matrix.
///
/// `x̂_i ∝ mean_j sim(q_i, r_j)` and `ŷ_j ∝ mean_i sim(q_i, r_j)`, each
/// self-normalized; an all-zero side falls back to uniform.
pub fn compute_priors(sim_qr: &WeightMatrix) -> Result<(ScoreVector, ScoreVector)> {
    let (nq, nr) = (sim_qr.rows(), sim_qr.cols());
    if nq == 0 || nr == 0 {
        return Err(RankError::Empty("similarity matrix has no entries".into()));
    }
    let row_means = (0..nq).map(|i| sim_qr.row(i).iter().sum::<f64>() / nr as f64).collect();
    let col_means = sim_qr.column_sums().into_iter().map(|s| s / nq as f64).collect();
    Ok((ScoreVector::from_weights(row_means)?, ScoreVector::from_weights(col_means)?))
}

/// `[[W]ᵀ]`: column-normalize, transpose, column-normalize again.
///
/// Turns a source-side weight matrix into the transition operator that
/// carries source scores over to the target side.
pub(crate) fn propagation_operator(w: &WeightMatrix) -> WeightMatrix {
    column_normalize(&column_normalize(w).transpose())
}

/// Co-HITS over the query/reply bipartite graph.
///
/// With `A = [[w_rq]ᵀ]` (replies → queries) and `B = [[w_qr]ᵀ]`
/// (queries → replies) this iterates
///
/// ```text
/// x ← αx·A·y + (1−αx)·x̂
/// y ← αy·B·x + (1−αy)·ŷ
/// ```
///
/// starting from the priors, with the y-update reading the freshly computed
/// x. Stops when the mean-square change over the concatenated `(x, y)` drops
/// below `params.local_tol`.
pub fn co_hits_solve(
    w_qr: &WeightMatrix,
    w_rq: &WeightMatrix,
    x_hat: &ScoreVector,
    y_hat: &ScoreVector,
    params: &RankParams,
) -> Result<(ScoreVector, ScoreVector)> {
    params.validate()?;
    let (nq, nr) = (x_hat.len(), y_hat.len());
    if w_qr.rows() != nq || w_qr.cols() != nr {
        return Err(RankError::DimensionMismatch(format!(
            "query→reply weights are {}x{}, expected {nq}x{nr}",
            w_qr.rows(),
            w_qr.cols()
        )));
    }
    if w_rq.rows() != nr || w_rq.cols() != nq {
        return Err(RankError::DimensionMismatch(format!(
            "reply→query weights are {}x{}, expected {nr}x{nq}",
            w_rq.rows(),
            w_rq.cols()
        )));
    }

    let to_queries = propagation_operator(w_rq);
    let to_replies = propagation_operator(w_qr);
    let (ax, ay) = (params.alpha_x, params.alpha_y);
    let (xh, yh) = (x_hat.as_slice(), y_hat.as_slice());

    let mut x = xh.to_vec();
    let mut y = yh.to_vec();
    let mut residual = f64::INFINITY;
    for _ in 0..params.max_local_iters {
        let nx: Vec<f64> =
            to_queries.mul_vec(&y).into_iter().zip(xh).map(|(p, prior)| ax * p + (1.0 - ax) * prior).collect();
        let ny: Vec<f64> =
            to_replies.mul_vec(&nx).into_iter().zip(yh).map(|(p, prior)| ay * p + (1.0 - ay) * prior).collect();
        residual = (mean_square_diff(&nx, &x) * nq as f64 + mean_square_diff(&ny, &y) * nr as f64) / (nq + nr) as f64;
        x = nx;
        y = ny;
        if residual < params.local_tol {
            return Ok((ScoreVector::from_solver(x), ScoreVector::from_solver(y)));
        }
    }
    x.extend(y);
    Err(RankError::LocalNonConvergence { solver: "co-hits", iterations: params.max_local_iters, residual, last: x })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qr(rows: Vec<Vec<f64>>) -> WeightMatrix {
        WeightMatrix::from_rows(rows, Orientation::QueryToReply).unwrap()
    }

    fn rq(rows: Vec<Vec<f64>>) -> WeightMatrix {
        WeightMatrix::from_rows(rows, Orientation::ReplyToQuery).unwrap()
    }

    #[test]
    fn weight_matrix_query_to_reply() {
        let q = ScoreVector::new(vec![0.8, 0.2]).unwrap();
        let w = hits_weight_matrix(&qr(vec![vec![0.5, 0.5], vec![0.5, 0.5]]), &q, Orientation::QueryToReply).unwrap();
        assert_eq!(w.to_rows(), vec![vec![0.4, 0.4], vec![0.1, 0.1]]);
    }

    #[test]
    fn weight_matrix_uniform_scores_scale() {
        let phi = qr(vec![vec![0.3, 0.9], vec![0.6, 0.2]]);
        let w = hits_weight_matrix(&phi, &ScoreVector::uniform(2), Orientation::QueryToReply).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(w.get(i, j), 0.5 * phi.get(i, j));
            }
        }
    }

    #[test]
    fn weight_matrix_reply_to_query() {
        let r = ScoreVector::new(vec![1.0, 0.0]).unwrap();
        let w = hits_weight_matrix(&rq(vec![vec![0.9, 0.1], vec![0.2, 0.8]]), &r, Orientation::ReplyToQuery).unwrap();
        assert_eq!(w.to_rows(), vec![vec![0.9, 0.1], vec![0.0, 0.0]]);
    }

    #[test]
    fn weight_matrix_dimension_errors() {
        let phi = qr(vec![vec![0.5, 0.5, 0.5], vec![0.5, 0.5, 0.5]]);
        assert!(hits_weight_matrix(&phi, &ScoreVector::uniform(3), Orientation::QueryToReply).is_err());
        assert!(hits_weight_matrix(&phi, &ScoreVector::uniform(2), Orientation::ReplyToQuery).is_err());
    }

    #[test]
    fn priors_constant_matrix_uniform() {
        let (x, y) = compute_priors(&qr(vec![vec![0.4; 3]; 2])).unwrap();
        assert_eq!(x.as_slice(), &[0.5, 0.5]);
        for v in y.as_slice() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn priors_single_mass() {
        let (x, y) = compute_priors(&qr(vec![vec![1.0, 0.0], vec![0.0, 0.0]])).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 0.0]);
        assert_eq!(y.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn priors_zero_matrix_uniform() {
        let (x, y) = compute_priors(&qr(vec![vec![0.0; 2]; 2])).unwrap();
        assert_eq!(x.as_slice(), &[0.5, 0.5]);
        assert_eq!(y.as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn zero_alphas_return_priors_exactly() {
        let xh = ScoreVector::from_weights(vec![0.1, 0.6, 0.3]).unwrap();
        let yh = ScoreVector::from_weights(vec![0.7, 0.3]).unwrap();
        let w_qr = qr(vec![vec![0.2, 0.9], vec![0.5, 0.1], vec![0.3, 0.3]]);
        let w_rq = rq(vec![vec![0.4, 0.1, 0.7], vec![0.2, 0.8, 0.6]]);
        let params = RankParams::default().with_alphas(0.0, 0.0);
        let (x, y) = co_hits_solve(&w_qr, &w_rq, &xh, &yh, &params).unwrap();
        assert_eq!(x, xh);
        assert_eq!(y, yh);
    }

    #[test]
    fn equal_weights_uniform_priors_stay_uniform() {
        let w_qr = qr(vec![vec![0.3; 3]; 2]);
        let w_rq = rq(vec![vec![0.3; 2]; 3]);
        let (x, y) =
            co_hits_solve(&w_qr, &w_rq, &ScoreVector::uniform(2), &ScoreVector::uniform(3), &RankParams::default())
                .unwrap();
        for v in x.as_slice() {
            assert!((v - 0.5).abs() < 1e-15);
        }
        for v in y.as_slice() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn two_by_two_reference() {
        // independent fixed-point iteration to 1e-30 and linear solve agree,
        // see tests/oracle/reference.py
        let (ex, ey) = ([0.5075369155045119, 0.4924630844954881], [0.5, 0.5]);
        let params = RankParams::default().with_tolerances(1e-24, 1e-6);
        let (x, y) = co_hits_solve(
            &qr(vec![vec![0.4, 0.4], vec![0.1, 0.1]]),
            &rq(vec![vec![0.9, 0.1], vec![0.2, 0.8]]),
            &ScoreVector::uniform(2),
            &ScoreVector::uniform(2),
            &params,
        )
        .unwrap();
        for (a, b) in x.as_slice().iter().chain(y.as_slice()).zip(ex.iter().chain(&ey)) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn full_hits_converges_despite_bipartite_periodicity() {
        let params = RankParams::default().with_alphas(1.0, 1.0);
        let (x, y) = co_hits_solve(
            &qr(vec![vec![0.9, 0.1, 0.4], vec![0.2, 0.6, 0.5]]),
            &rq(vec![vec![0.9, 0.2], vec![0.1, 0.6], vec![0.4, 0.5]]),
            &ScoreVector::new(vec![1.0, 0.0]).unwrap(),
            &ScoreVector::new(vec![0.0, 0.0, 1.0]).unwrap(),
            &params,
        )
        .unwrap();
        assert!(x.is_stochastic(1e-9));
        assert!(y.is_stochastic(1e-9));
    }
}
