//! Reference solvers and random instance generators shared by the
//! integration and acceptance tests. Written against nalgebra directly so
//! they share no code with the crate under test.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rekindle_core::{Orientation, RankParams, RerankState, WeightMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_dmatrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let (r, c) = (rows.len(), rows.first().map_or(0, Vec::len));
    DMatrix::from_fn(r, c, |i, j| rows[i][j])
}

/// Symmetric, zero diagonal, roughly `sparsity` of off-diagonal pairs zeroed.
pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, sparsity: f64) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for (i, j) in (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))) {
        let v = if rng.random::<f64>() < sparsity { 0.0 } else { rng.random::<f64>() };
        m[i][j] = v;
        m[j][i] = v;
    }
    m
}

pub fn random_stochastic(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| 0.05 + rng.random::<f64>()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Entries strictly inside (0, 1).
pub fn random_open_unit(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows).map(|_| (0..cols).map(|_| 0.01 + 0.98 * rng.random::<f64>()).collect()).collect()
}

pub fn random_unit(rng: &mut ChaCha8Rng, rows: usize, cols: usize, sparsity: f64) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| if rng.random::<f64>() < sparsity { 0.0 } else { rng.random::<f64>() }).collect())
        .collect()
}

/// Column sums to one; an all-zero column becomes uniform.
pub fn colnorm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    let n = m.nrows() as f64;
    for mut col in out.column_iter_mut() {
        let s = col.sum();
        if s > 0.0 {
            col /= s;
        } else {
            col.fill(1.0 / n);
        }
    }
    out
}

/// Fixed point of PageRank with prior, solved as a linear system:
/// `(I − (1−μ)T) v = μ·prior` with `T = colnorm(Diag(prior)·simᵀ)`.
pub fn pagerank_linear(sim: &[Vec<f64>], prior: &[f64], mu: f64) -> Vec<f64> {
    let n = prior.len();
    let s = to_dmatrix(sim);
    let d = DMatrix::from_diagonal(&DVector::from_column_slice(prior));
    let t = colnorm(&(d * s.transpose()));
    let a = DMatrix::<f64>::identity(n, n) - t * (1.0 - mu);
    let b = DVector::from_column_slice(prior) * mu;
    a.lu().solve(&b).expect("PageRank system is nonsingular for mu > 0").as_slice().to_vec()
}

/// The two bipartite transition operators `A` (replies → queries) and
/// `B` (queries → replies) built from source-side weights.
pub fn propagation(w_qr: &[Vec<f64>], w_rq: &[Vec<f64>]) -> (DMatrix<f64>, DMatrix<f64>) {
    let a = colnorm(&colnorm(&to_dmatrix(w_rq)).transpose());
    let b = colnorm(&colnorm(&to_dmatrix(w_qr)).transpose());
    (a, b)
}

/// Co-HITS by simultaneous (Jacobi) updates until the largest change is
/// below `tol`.
pub fn co_hits_fixed_point(
    w_qr: &[Vec<f64>],
    w_rq: &[Vec<f64>],
    x_hat: &[f64],
    y_hat: &[f64],
    alpha_x: f64,
    alpha_y: f64,
    tol: f64,
) -> (Vec<f64>, Vec<f64>) {
    let (a, b) = propagation(w_qr, w_rq);
    let xh = DVector::from_column_slice(x_hat);
    let yh = DVector::from_column_slice(y_hat);
    let (mut x, mut y) = (xh.clone(), yh.clone());
    for _ in 0..1_000_000 {
        let nx = &a * &y * alpha_x + &xh * (1.0 - alpha_x);
        let ny = &b * &x * alpha_y + &yh * (1.0 - alpha_y);
        let delta = (&nx - &x).amax().max((&ny - &y).amax());
        x = nx;
        y = ny;
        if delta < tol {
            return (x.as_slice().to_vec(), y.as_slice().to_vec());
        }
    }
    panic!("reference co-HITS iteration did not converge");
}

/// Co-HITS fixed point by elimination: for `αx·αy < 1`,
/// `(I − αxαy·A·B) x = (1−αx)x̂ + αx(1−αy)·A·ŷ` and `y = αy·B·x + (1−αy)ŷ`.
pub fn co_hits_linear(
    w_qr: &[Vec<f64>],
    w_rq: &[Vec<f64>],
    x_hat: &[f64],
    y_hat: &[f64],
    alpha_x: f64,
    alpha_y: f64,
) -> (Vec<f64>, Vec<f64>) {
    let (a, b) = propagation(w_qr, w_rq);
    let n = x_hat.len();
    let xh = DVector::from_column_slice(x_hat);
    let yh = DVector::from_column_slice(y_hat);
    let lhs = DMatrix::<f64>::identity(n, n) - &a * &b * (alpha_x * alpha_y);
    let rhs = &xh * (1.0 - alpha_x) + &a * &yh * (alpha_x * (1.0 - alpha_y));
    let x = lhs.lu().solve(&rhs).expect("Co-HITS system is nonsingular");
    let y = &b * &x * alpha_y + &yh * (1.0 - alpha_y);
    (x.as_slice().to_vec(), y.as_slice().to_vec())
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Solver settings tight enough for agreement with the references at 1e-8.
pub fn tight() -> RankParams {
    RankParams { max_local_iters: 100_000, ..RankParams::default() }.with_tolerances(1e-24, 1e-6)
}

/// Raw matrices of a reranking instance.
#[derive(Debug, Clone)]
pub struct Parts {
    pub m_q: Vec<Vec<f64>>,
    pub m_r: Vec<Vec<f64>>,
    pub phi: Vec<Vec<f64>>,
    pub sim: Vec<Vec<f64>>,
}

impl Parts {
    pub fn random(rng: &mut ChaCha8Rng, nq: usize, nr: usize) -> Self {
        Self {
            m_q: random_symmetric(rng, nq, 0.2),
            m_r: random_symmetric(rng, nr, 0.5),
            phi: random_open_unit(rng, nq, nr),
            sim: random_unit(rng, nq, nr, 0.4),
        }
    }

    /// Reorders candidates so that new position `b` holds old candidate `perm[b]`.
    pub fn permute_replies(&self, perm: &[usize]) -> Self {
        let cols = |m: &Vec<Vec<f64>>| m.iter().map(|row| perm.iter().map(|&j| row[j]).collect()).collect();
        Self {
            m_q: self.m_q.clone(),
            m_r: perm.iter().map(|&a| perm.iter().map(|&b| self.m_r[a][b]).collect()).collect(),
            phi: cols(&self.phi),
            sim: cols(&self.sim),
        }
    }

    pub fn state(&self) -> RerankState {
        let (nq, nr) = (self.m_q.len(), self.m_r.len());
        let m = |rows: &Vec<Vec<f64>>, o| WeightMatrix::from_rows(rows.clone(), o).unwrap();
        RerankState::from_matrices(
            (0..nq).map(|i| format!("q{i}")).collect(),
            (0..nr).map(|j| format!("r{j}")).collect(),
            m(&self.m_q, Orientation::QueryQuery),
            m(&self.m_r, Orientation::ReplyReply),
            m(&self.phi, Orientation::QueryToReply),
            &m(&self.sim, Orientation::QueryToReply),
        )
        .unwrap()
    }
}

/// A random reranking instance with `nq` queries and `nr` candidates.
pub fn random_state(rng: &mut ChaCha8Rng, nq: usize, nr: usize) -> RerankState {
    Parts::random(rng, nq, nr).state()
}

/// Dimensions for the convergence study: up to 10 queries and 50 candidates.
pub fn random_dims(rng: &mut ChaCha8Rng) -> (usize, usize) {
    (rng.random_range(1..=10), rng.random_range(1..=50))
}
