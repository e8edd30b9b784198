//! Independent reference computations for the integration tests.

#![allow(dead_code)]

use dcglearn::{Encoding, PreferencePair};
use nalgebra::{DMatrix, DVector};

/// Every permutation of `0..n` (Heap's algorithm).
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        heap(k - 1, a, out);
        for i in 0..k - 1 {
            if k.is_multiple_of(2) {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
            heap(k - 1, a, out);
        }
    }
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    heap(n, &mut a, &mut out);
    out
}

/// Plain DCG, written independently of the library.
pub fn plain_dcg(grades: &[usize], gains: &[f64], discounts: &[f64], k: usize) -> f64 {
    (0..k).map(|i| discounts[i] * gains[grades[i] - 1]).sum()
}

fn to_vec(e: &Encoding) -> DVector<f64> {
    DVector::from_iterator(e.dim(), e.bits().iter().map(|&b| b as f64))
}

/// `w.w + C sum max(0, m - w.delta)^2`.
pub fn qp_objective(w: &DVector<f64>, pairs: &[PreferencePair], c: f64) -> f64 {
    let loss: f64 =
        pairs.iter().map(|p| (p.margin - w.dot(&(to_vec(&p.winner) - to_vec(&p.loser)))).max(0.0).powi(2)).sum();
    w.dot(w) + c * loss
}

/// Exact minimum of the fitting program on tiny instances.
///
/// For every choice of penalised pairs and tight monotonicity constraints the
/// equality-constrained quadratic is solved from its KKT system; the optimum is
/// the best feasible candidate under the true objective.
pub fn qp_oracle(pairs: &[PreferencePair], c: f64, block: usize, monotone: bool) -> (f64, DVector<f64>) {
    let n = pairs[0].winner.dim();
    let deltas: Vec<DVector<f64>> = pairs.iter().map(|p| to_vec(&p.winner) - to_vec(&p.loser)).collect();
    let mut constraints: Vec<DVector<f64>> = Vec::new();
    if monotone {
        for b in 0..n / block {
            for l in 0..block - 1 {
                let mut a = DVector::zeros(n);
                a[b * block + l] = 1.0;
                a[b * block + l + 1] = -1.0;
                constraints.push(a);
            }
        }
    }
    assert!(pairs.len() <= 8 && constraints.len() <= 12, "oracle is exponential");

    let mut best: Option<(f64, DVector<f64>)> = None;
    for pair_mask in 0u32..(1 << pairs.len()) {
        for tight_mask in 0u32..(1 << constraints.len()) {
            let active: Vec<usize> = (0..pairs.len()).filter(|i| pair_mask >> i & 1 == 1).collect();
            let tight: Vec<&DVector<f64>> =
                (0..constraints.len()).filter(|i| tight_mask >> i & 1 == 1).map(|i| &constraints[i]).collect();
            let m = tight.len();
            let mut kkt = DMatrix::zeros(n + m, n + m);
            let mut rhs = DVector::zeros(n + m);
            for i in 0..n {
                kkt[(i, i)] = 2.0;
            }
            for &p in &active {
                let d = &deltas[p];
                let outer = d * d.transpose() * (2.0 * c);
                kkt.view_mut((0, 0), (n, n)).add_assign(&outer);
                rhs.rows_mut(0, n).add_assign(&(d * (2.0 * c * pairs[p].margin)));
            }
            for (j, a) in tight.iter().enumerate() {
                for i in 0..n {
                    kkt[(i, n + j)] = a[i];
                    kkt[(n + j, i)] = a[i];
                }
            }
            let Some(sol) = kkt.lu().solve(&rhs) else { continue };
            let w = sol.rows(0, n).into_owned();
            let feasible = constraints.iter().all(|a| a.dot(&w) >= -1e-10);
            if !feasible {
                continue;
            }
            let f = qp_objective(&w, pairs, c);
            if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
                best = Some((f, w));
            }
        }
    }
    best.expect("the zero-penalty, unconstrained candidate is always feasible or some face is")
}

use std::ops::AddAssign;

/// Singular values of a row-major `rows x cols` matrix, via the eigenvalues of `W^T W`.
pub fn singular_values(rows: usize, cols: usize, entries: &[f64]) -> Vec<f64> {
    let w = DMatrix::from_row_slice(rows, cols, entries);
    let gram = w.transpose() * &w;
    let mut ev: Vec<f64> = gram.symmetric_eigen().eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}
