//! Recovering gains and discounts from a fitted utility, and scoring fits.

use crate::encoding::{utility, UtilityVector};
use crate::error::{invalid, Error, Result};
use crate::learner::PreferencePair;

/// Utility weights arranged as an `L x K` matrix: row `l` is a grade slot (best
/// grade first), column `k` a position.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    rows: usize,
    cols: usize,
    /// Row-major.
    entries: Vec<f64>,
}

impl WeightMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(invalid(format!("{} entries do not form a {rows}x{cols} matrix", entries.len())));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_utility(w: &UtilityVector) -> Self {
        let (rows, cols) = (w.block_size(), w.positions());
        let mut entries = vec![0.0; rows * cols];
        for (k, block) in w.blocks().enumerate() {
            for (l, &x) in block.iter().enumerate() {
                entries[l * cols + k] = x;
            }
        }
        Self { rows, cols, entries }
    }

    pub fn to_utility(&self) -> UtilityVector {
        let mut weights = vec![0.0; self.rows * self.cols];
        for l in 0..self.rows {
            for k in 0..self.cols {
                weights[k * self.rows + l] = self.get(l, k);
            }
        }
        UtilityVector::new(weights, self.rows).expect("non-empty matrix")
    }

    /// `sigma * u v^T`.
    pub fn outer(u: &[f64], v: &[f64], sigma: f64) -> Self {
        let entries = u.iter().flat_map(|&a| v.iter().map(move |&b| sigma * a * b)).collect();
        Self { rows: u.len(), cols: v.len(), entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.cols + col]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }

    fn gram(&self) -> Vec<f64> {
        let n = self.cols;
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..self.rows).map(|r| self.get(r, i) * self.get(r, j)).sum();
                g[i * n + j] = s;
                g[j * n + i] = s;
            }
        }
        g
    }

    fn times(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|r| (0..self.cols).map(|c| self.get(r, c) * v[c]).sum()).collect()
    }
}

/// Leading singular triple of a [`WeightMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneFactors {
    /// `sigma1 * u1`, one entry per grade slot (best grade first).
    pub gains_est: Vec<f64>,
    /// `v1`, unit norm, one entry per position.
    pub discounts_est: Vec<f64>,
    pub sigma1: f64,
    /// `sigma2 / sigma1`.
    pub residual_ratio: f64,
}

impl RankOneFactors {
    pub fn left_singular(&self) -> Vec<f64> {
        self.gains_est.iter().map(|g| g / self.sigma1).collect()
    }

    pub fn approximation(&self) -> WeightMatrix {
        WeightMatrix::outer(&self.gains_est, &self.discounts_est, 1.0)
    }
}

const POWER_MAX_ITERATIONS: usize = 100_000;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Top eigenpair of a symmetric PSD `n x n` matrix by power iteration, started
/// from its largest column. Returns `None` for the zero matrix.
fn top_eigenpair(m: &[f64], n: usize, tol: f64) -> Option<(f64, Vec<f64>)> {
    let col = |j: usize| -> Vec<f64> { (0..n).map(|i| m[i * n + j]).collect() };
    let start = (0..n).map(col).max_by(|a, b| norm(a).total_cmp(&norm(b)))?;
    let start_norm = norm(&start);
    if start_norm == 0.0 {
        return None;
    }
    let mut v: Vec<f64> = start.iter().map(|x| x / start_norm).collect();
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITERATIONS {
        let mv: Vec<f64> = (0..n).map(|i| (0..n).map(|j| m[i * n + j] * v[j]).sum()).collect();
        let next = norm(&mv);
        if next == 0.0 {
            return Some((0.0, v));
        }
        let next_v: Vec<f64> = mv.iter().map(|x| x / next).collect();
        let moved = norm(&next_v.iter().zip(&v).map(|(a, b)| a - b).collect::<Vec<_>>());
        let settled = (next - lambda).abs() <= tol * next && moved <= tol.sqrt();
        lambda = next;
        v = next_v;
        if settled {
            break;
        }
    }
    Some((lambda, v))
}

/// Best rank-one approximation `sigma1 u1 v1^T` by power iteration on `W^T W`.
///
/// Singular vectors are flipped together so that `v1` has a positive sum.
pub fn rank_one_factorize(w: &WeightMatrix, tol: f64) -> Result<RankOneFactors> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(invalid("tolerance must be positive"));
    }
    if w.entries.iter().all(|&x| x == 0.0) {
        return Err(Error::Degenerate("cannot factorize the zero matrix".into()));
    }
    let (_, mut v) = top_eigenpair(&w.gram(), w.cols, tol)
        .ok_or_else(|| Error::Degenerate("cannot factorize the zero matrix".into()))?;
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    // sigma1 u1 = W v1, which is more accurate than sqrt of the eigenvalue
    let gains_est = w.times(&v);
    let sigma1 = norm(&gains_est);

    let residual = WeightMatrix {
        rows: w.rows,
        cols: w.cols,
        entries: w.entries.iter().zip(WeightMatrix::outer(&gains_est, &v, 1.0).entries).map(|(a, b)| a - b).collect(),
    };
    let sigma2 = top_eigenpair(&residual.gram(), w.cols, tol).map_or(0.0, |(l, _)| l.max(0.0).sqrt());

    Ok(RankOneFactors { gains_est, discounts_est: v, sigma1, residual_ratio: sigma2 / sigma1 })
}

/// Fraction of pairs whose winner scores strictly higher than the loser.
pub fn precision(w_hat: &UtilityVector, pairs: &[PreferencePair]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(invalid("empty test set"));
    }
    let mut correct = 0usize;
    for p in pairs {
        if utility(w_hat, &p.winner)? > utility(w_hat, &p.loser)? {
            correct += 1;
        }
    }
    Ok(correct as f64 / pairs.len() as f64)
}

/// Subtracts the last entry of every block from the whole block.
pub fn t_transform(w: &UtilityVector) -> UtilityVector {
    let weights = w
        .blocks()
        .flat_map(|b| {
            let offset = b[b.len() - 1];
            b.iter().map(move |x| x - offset)
        })
        .collect();
    UtilityVector::new(weights, w.block_size()).expect("same shape")
}

/// Cosine of `T(w)` and `T(w_hat)`.
pub fn similarity(w: &UtilityVector, w_hat: &UtilityVector) -> Result<f64> {
    if w.dim() != w_hat.dim() || w.block_size() != w_hat.block_size() {
        return Err(invalid("utility vectors differ in shape"));
    }
    let (a, b) = (t_transform(w), t_transform(w_hat));
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Degenerate("T-transform of a utility vector is zero".into()));
    }
    let dot: f64 = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Number of positions at which two equally long lists differ.
pub fn hamming<T: PartialEq>(a: &[T], b: &[T]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(invalid(format!("lengths differ: {} vs {}", a.len(), b.len())));
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count())
}

/// Cosine of two equally long vectors.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    dot / (norm(a) * norm(b))
}
