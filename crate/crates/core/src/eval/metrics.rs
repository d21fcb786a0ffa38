//! Outcome matrices and the pass, recall and improvement-rate metrics.

use serde::{Deserialize, Serialize};

use super::EvalError;

/// `pass[n][k][m]`: whether submission `k` for problem `n` passes case `m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeMatrix {
    n: usize,
    k: usize,
    m: usize,
    cells: Vec<bool>,
}

impl OutcomeMatrix {
    /// An all-false matrix. Every dimension must be positive.
    pub fn new(n: usize, k: usize, m: usize) -> Result<Self, EvalError> {
        if n == 0 || k == 0 || m == 0 {
            return Err(EvalError::Config(format!(
                "outcome matrix dimensions must be positive, got {n}x{k}x{m}"
            )));
        }
        Ok(Self {
            n,
            k,
            m,
            cells: vec![false; n * k * m],
        })
    }

    /// Builds a matrix from `rows[n][k][m]`; every row must be K×M.
    pub fn from_rows(rows: &[Vec<Vec<bool>>]) -> Result<Self, EvalError> {
        let k = rows.first().map_or(0, Vec::len);
        let m = rows.first().and_then(|r| r.first()).map_or(0, Vec::len);
        let mut matrix = Self::new(rows.len(), k, m)?;
        for (n, row) in rows.iter().enumerate() {
            matrix.set_row(n, row)?;
        }
        Ok(matrix)
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n, self.k, self.m)
    }

    fn index(&self, n: usize, k: usize, m: usize) -> usize {
        assert!(n < self.n && k < self.k && m < self.m, "cell ({n},{k},{m}) out of range");
        (n * self.k + k) * self.m + m
    }

    pub fn get(&self, n: usize, k: usize, m: usize) -> bool {
        self.cells[self.index(n, k, m)]
    }

    pub fn set(&mut self, n: usize, k: usize, m: usize, value: bool) {
        let i = self.index(n, k, m);
        self.cells[i] = value;
    }

    pub fn set_row(&mut self, n: usize, row: &[Vec<bool>]) -> Result<(), EvalError> {
        if row.len() != self.k || row.iter().any(|s| s.len() != self.m) {
            return Err(EvalError::Config(format!(
                "row {n} is not {}x{}",
                self.k, self.m
            )));
        }
        for (k, sample) in row.iter().enumerate() {
            for (m, v) in sample.iter().enumerate() {
                self.set(n, k, m, *v);
            }
        }
        Ok(())
    }

    pub fn row(&self, n: usize) -> Vec<Vec<bool>> {
        (0..self.k)
            .map(|k| (0..self.m).map(|m| self.get(n, k, m)).collect())
            .collect()
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }
}

/// Share of problems for which at least one of the K submissions passes all
/// M cases.
pub fn pass_at_k(matrix: &OutcomeMatrix) -> f64 {
    let (n, k, m) = matrix.dims();
    let solved = matrix
        .cells
        .chunks(k * m)
        .filter(|row| row.chunks(m).any(|sample| sample.iter().all(|c| *c)))
        .count();
    solved as f64 / n as f64
}

/// Share of all N·K·M case runs that passed.
pub fn recall_at_k(matrix: &OutcomeMatrix) -> f64 {
    let passed = matrix.cells.iter().filter(|c| **c).count();
    passed as f64 / matrix.cells.len() as f64
}

/// Relative improvement from `pre` to `post`, in percent. A zero baseline is
/// an error rather than an infinite rate.
///
/// The result is rounded to nine decimal places so that, for example,
/// 0.4 to 0.6 gives exactly 50 rather than 49.99999999999999. A nonzero
/// change is never rounded to zero.
pub fn tir(pre: f64, post: f64) -> Result<f64, EvalError> {
    if pre <= 0.0 {
        return Err(EvalError::UndefinedBaseline);
    }
    let raw = (post - pre) / pre * 100.0;
    let rounded = (raw * 1e9).round() / 1e9;
    Ok(if rounded == 0.0 && raw != 0.0 { raw } else { rounded })
}
