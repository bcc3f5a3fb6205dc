use serde::{Deserialize, Serialize};

use super::{RankError, Result, STOCHASTIC_EPS};

/// A probability distribution over the nodes of one side of the graph.
///
/// Entries are nonnegative and sum to one. Solvers keep their outputs
/// stochastic by construction, so the vector is never silently renormalized
/// after a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScoreVector(Vec<f64>);

impl ScoreVector {
    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    /// Validates an already-normalized distribution.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(RankError::InvalidScores("empty vector".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(RankError::InvalidScores(format!("entry {v} is negative or not finite")));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > STOCHASTIC_EPS {
            return Err(RankError::InvalidScores(format!("entries sum to {sum}, expected 1")));
        }
        Ok(Self(values))
    }

    /// Self-normalizes nonnegative weights. An all-zero vector becomes uniform.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(RankError::InvalidScores("empty vector".into()));
        }
        if let Some(v) = weights.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(RankError::InvalidScores(format!("weight {v} is negative or not finite")));
        }
        let sum: f64 = weights.iter().sum();
        if sum == 0.0 {
            return Ok(Self::uniform(weights.len()));
        }
        Ok(Self(weights.into_iter().map(|w| w / sum).collect()))
    }

    /// Wraps the output of a stochastic update without re-checking it.
    pub(crate) fn from_solver(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_stochastic(&self, eps: f64) -> bool {
        self.0.iter().all(|v| *v >= 0.0) && (self.0.iter().sum::<f64>() - 1.0).abs() <= eps
    }
}

impl std::ops::Index<usize> for ScoreVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Which kind of nodes the rows and columns of a [`WeightMatrix`] index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Rows are queries, columns are replies.
    QueryToReply,
    /// Rows are replies, columns are queries.
    ReplyToQuery,
    QueryQuery,
    ReplyReply,
}

impl Orientation {
    pub fn transposed(self) -> Self {
        match self {
            Self::QueryToReply => Self::ReplyToQuery,
            Self::ReplyToQuery => Self::QueryToReply,
            other => other,
        }
    }
}

/// Dense row-major matrix of nonnegative weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    orientation: Orientation,
}

impl WeightMatrix {
    /// Builds a matrix from rows. Fails on ragged input or on any negative or
    /// non-finite entry, so every `WeightMatrix` in circulation is nonnegative.
    pub fn from_rows(rows: Vec<Vec<f64>>, orientation: Orientation) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if n_rows == 0 || n_cols == 0 {
            return Err(RankError::InvalidMatrix("matrix has no entries".into()));
        }
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n_cols {
                return Err(RankError::InvalidMatrix(format!("row {i} has {} entries, expected {n_cols}", row.len())));
            }
            data.extend(row);
        }
        Self::from_vec(n_rows, n_cols, data, orientation)
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>, orientation: Orientation) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(RankError::InvalidMatrix(format!("{} entries do not fill a {rows}x{cols} matrix", data.len())));
        }
        if let Some((k, v)) = data.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(RankError::InvalidMatrix(format!(
                "entry ({}, {}) = {v} is negative or not finite",
                k / cols,
                k % cols
            )));
        }
        Ok(Self { rows, cols, data, orientation })
    }

    pub(crate) fn from_fn(
        rows: usize,
        cols: usize,
        orientation: Orientation,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data, orientation }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, self.orientation.transposed(), |i, j| self.get(j, i))
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for row in self.data.chunks(self.cols) {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }

    /// `self · v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        self.data.chunks(self.cols).map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// True when every column sums to one within `eps`.
    pub fn is_left_stochastic(&self, eps: f64) -> bool {
        self.column_sums().iter().all(|s| (s - 1.0).abs() <= eps)
    }
}

/// Scales every column to sum to one. All-zero columns become uniform.
pub fn column_normalize(m: &WeightMatrix) -> WeightMatrix {
    let sums = m.column_sums();
    let uniform = 1.0 / m.rows as f64;
    WeightMatrix::from_fn(
        m.rows,
        m.cols,
        m.orientation,
        |i, j| {
            if sums[j] > 0.0 {
                m.get(i, j) / sums[j]
            } else {
                uniform
            }
        },
    )
}

pub fn mean_square_diff(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if a.is_empty() {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: Vec<Vec<f64>>) -> WeightMatrix {
        WeightMatrix::from_rows(rows, Orientation::QueryQuery).unwrap()
    }

    #[test]
    fn normalize_equal_mass_columns() {
        let out = column_normalize(&m(vec![vec![1.0, 2.0], vec![1.0, 2.0]]));
        assert_eq!(out.to_rows(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
    }

    #[test]
    fn normalize_zero_column_is_uniform() {
        let out = column_normalize(&m(vec![vec![0.0, 1.0], vec![0.0, 3.0]]));
        assert_eq!(out.to_rows(), vec![vec![0.5, 0.25], vec![0.5, 0.75]]);
    }

    #[test]
    fn normalize_direct_arithmetic() {
        let input = m(vec![vec![1.0, 0.0], vec![3.0, 1.0]]);
        let out = column_normalize(&input);
        assert_eq!(out.to_rows(), vec![vec![0.25, 0.0], vec![0.75, 1.0]]);
        // input unchanged
        assert_eq!(input.to_rows(), vec![vec![1.0, 0.0], vec![3.0, 1.0]]);
    }

    #[test]
    fn negative_entry_rejected() {
        let err = WeightMatrix::from_rows(vec![vec![1.0, -0.5]], Orientation::QueryQuery).unwrap_err();
        assert!(matches!(err, RankError::InvalidMatrix(_)));
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(WeightMatrix::from_rows(vec![vec![1.0, 0.5], vec![1.0]], Orientation::QueryQuery).is_err());
        assert!(WeightMatrix::from_rows(vec![], Orientation::QueryQuery).is_err());
    }

    #[test]
    fn transpose_flips_orientation() {
        let w = WeightMatrix::from_rows(vec![vec![1.0, 2.0, 3.0]], Orientation::QueryToReply).unwrap();
        let t = w.transpose();
        assert_eq!(t.orientation(), Orientation::ReplyToQuery);
        assert_eq!(t.to_rows(), vec![vec![1.0], vec![2.0], vec![3.0]]);
    }

    #[test]
    fn score_vector_from_weights() {
        let v = ScoreVector::from_weights(vec![1.0, 3.0]).unwrap();
        assert_eq!(v.as_slice(), &[0.25, 0.75]);
        let z = ScoreVector::from_weights(vec![0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(z.as_slice(), &[0.25; 4]);
        assert!(ScoreVector::from_weights(vec![1.0, -1.0]).is_err());
        assert!(ScoreVector::new(vec![0.5, 0.6]).is_err());
        assert!(ScoreVector::new(vec![0.5, 0.5]).is_ok());
    }
}
