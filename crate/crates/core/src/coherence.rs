//! Coherence of two DCG rankers that share discounts but differ in gains.
//!
//! Two rankers are coherent over a labeled set when no pair of top-K grade
//! sequences drawn from that set is strictly preferred one way by the first
//! ranker and strictly the other way by the second. Pairs on which either ranker
//! ties are not counted as disagreements.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::ranking::{apply_power_transform, dcg, DiscountVector, GainVector, GradeScale, LabeledSet, Ranking};

/// Largest labeled set accepted by the exhaustive checks.
pub const ENUMERATION_LIMIT: usize = 10;

/// Grid spacing used by [`find_counterexample_exponent`].
pub const EXPONENT_STEP: f64 = 0.25;

/// A pair of rankings ordered oppositely by the two rankers.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    /// Strictly preferred by ranker A.
    pub first: Ranking,
    /// Strictly preferred by ranker B.
    pub second: Ranking,
    /// DCG under A of `first` and `second`.
    pub scores_a: (f64, f64),
    /// DCG under B of `first` and `second`.
    pub scores_b: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceVerdict {
    pub coherent: bool,
    pub witness: Option<Witness>,
}

impl CoherenceVerdict {
    fn coherent() -> Self {
        Self { coherent: true, witness: None }
    }
}

/// Every distinct arrangement of `k` grades drawn from `grades`, in lexicographic order.
pub fn distinct_prefixes(grades: &[usize], k: usize) -> Vec<Vec<usize>> {
    let max = grades.iter().copied().max().unwrap_or(0);
    let mut counts = vec![0usize; max + 1];
    for &g in grades {
        counts[g] += 1;
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn recurse(counts: &mut [usize], k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for g in 1..counts.len() {
            if counts[g] > 0 {
                counts[g] -= 1;
                current.push(g);
                recurse(counts, k, current, out);
                current.pop();
                counts[g] += 1;
            }
        }
    }
    recurse(&mut counts, k, &mut current, &mut out);
    out
}

/// Lifts a top-K grade sequence to a full ranking of `set`: each position takes
/// the lowest-indexed unused item with the required grade, and the leftover
/// items follow in index order.
pub fn ranking_for_prefix(set: &LabeledSet, prefix: &[usize]) -> Ranking {
    let mut used = vec![false; set.len()];
    let mut order = Vec::with_capacity(set.len());
    for &grade in prefix {
        let item = (0..set.len()).find(|&i| !used[i] && set.grades()[i] == grade).expect("prefix drawn from the set");
        used[item] = true;
        order.push(item);
    }
    order.extend((0..set.len()).filter(|&i| !used[i]));
    Ranking::new(order).expect("constructed permutation")
}

fn tie_tolerance(scores: &[f64]) -> f64 {
    1e-12 * scores.iter().fold(1.0f64, |m, s| m.max(s.abs()))
}

/// True when some pair is strictly ordered one way by `a` and strictly the other by `b`.
fn has_inversion(a: &[f64], b: &[f64], tol_a: f64, tol_b: f64) -> bool {
    let mut idx: Vec<usize> = (0..a.len()).collect();
    idx.sort_by(|&i, &j| a[i].total_cmp(&a[j]));
    // prefix_max[m] = max b over the first m entries of idx
    let mut prefix_max = Vec::with_capacity(idx.len() + 1);
    prefix_max.push(f64::NEG_INFINITY);
    for &i in &idx {
        let last = *prefix_max.last().unwrap();
        prefix_max.push(last.max(b[i]));
    }
    let mut boundary = 0;
    for &q in &idx {
        while boundary < idx.len() && a[q] - a[idx[boundary]] > tol_a {
            boundary += 1;
        }
        if prefix_max[boundary] - b[q] > tol_b {
            return true;
        }
    }
    false
}

fn validate_pair(set: &LabeledSet, ga: &GainVector, gb: &GainVector, c: &DiscountVector, k: usize) -> Result<()> {
    if set.len() > ENUMERATION_LIMIT {
        return Err(Error::Capacity { size: set.len(), limit: ENUMERATION_LIMIT });
    }
    if !ga.is_compatible() || !gb.is_compatible() {
        return Err(Error::Precondition("both gain vectors must be compatible".into()));
    }
    if ga.levels() != gb.levels() {
        return Err(invalid("gain vectors have different lengths"));
    }
    if set.max_grade() > ga.levels() {
        return Err(invalid("labeled set uses a grade beyond the gain vectors"));
    }
    if k == 0 || k > set.len() || k > c.len() {
        return Err(invalid(format!("cutoff K={k} incompatible with N={} and {} discounts", set.len(), c.len())));
    }
    Ok(())
}

/// Exhaustively compares every pair of distinct top-K grade sequences of `set`.
///
/// When rankers disagree, the reported witness is the first disagreeing pair in
/// lexicographic order of grade sequences, oriented so that `first` is the
/// ranking ranker A prefers.
pub fn check_coherence(
    set: &LabeledSet,
    ga: &GainVector,
    gb: &GainVector,
    c: &DiscountVector,
    k: usize,
) -> Result<CoherenceVerdict> {
    validate_pair(set, ga, gb, c, k)?;
    let prefixes = distinct_prefixes(set.grades(), k);
    let score = |g: &GainVector| -> Result<Vec<f64>> { prefixes.iter().map(|p| dcg(p, g, c, k)).collect() };
    let a = score(ga)?;
    let b = score(gb)?;
    let (tol_a, tol_b) = (tie_tolerance(&a), tie_tolerance(&b));

    if !has_inversion(&a, &b, tol_a, tol_b) {
        return Ok(CoherenceVerdict::coherent());
    }

    for i in 0..prefixes.len() {
        for j in i + 1..prefixes.len() {
            let da = a[i] - a[j];
            let db = b[i] - b[j];
            if da.abs() > tol_a && db.abs() > tol_b && (da > 0.0) != (db > 0.0) {
                let (p, q) = if da > 0.0 { (i, j) } else { (j, i) };
                return Ok(CoherenceVerdict {
                    coherent: false,
                    witness: Some(Witness {
                        first: ranking_for_prefix(set, &prefixes[p]),
                        second: ranking_for_prefix(set, &prefixes[q]),
                        scores_a: (a[p], a[q]),
                        scores_b: (b[p], b[q]),
                    }),
                });
            }
        }
    }
    Ok(CoherenceVerdict::coherent())
}

/// Random two-grade instances; true iff none of them is incoherent.
pub fn verify_binary_coherence(trials: usize, n: usize, k: usize, seed: u64) -> Result<bool> {
    if n > ENUMERATION_LIMIT {
        return Err(Error::Capacity { size: n, limit: ENUMERATION_LIMIT });
    }
    if k == 0 || k > n {
        return Err(invalid(format!("need 1 <= K <= N, got K={k}, N={n}")));
    }
    let scale = GradeScale::new(2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let ga = random_compatible_gains(&mut rng, 2);
        let gb = random_compatible_gains(&mut rng, 2);
        let c = random_discounts(&mut rng, k);
        let grades = (0..n).map(|_| rng.gen_range(1..=2)).collect();
        let set = LabeledSet::new(grades, scale)?;
        if !check_coherence(&set, &ga, &gb, &c, k)?.coherent {
            return Ok(false);
        }
    }
    Ok(true)
}

pub(crate) fn random_compatible_gains<R: Rng>(rng: &mut R, levels: usize) -> GainVector {
    loop {
        let mut g: Vec<f64> = (0..levels).map(|_| rng.gen_range(0.0..10.0)).collect();
        g.sort_by(f64::total_cmp);
        if let Ok(gv) = GainVector::new(g) {
            if gv.is_compatible() {
                return gv;
            }
        }
    }
}

pub(crate) fn random_discounts<R: Rng>(rng: &mut R, positions: usize) -> DiscountVector {
    loop {
        let mut c: Vec<f64> = (0..positions).map(|_| rng.gen_range(0.01..1.0)).collect();
        c.sort_by(|x, y| y.total_cmp(x));
        if let Ok(cv) = DiscountVector::new(c) {
            return cv;
        }
    }
}

/// Smallest exponent on the grid `0.25, 0.5, ..., k_max` for which `g` and `g^k`
/// are incoherent over `set`.
pub fn find_counterexample_exponent(
    set: &LabeledSet,
    g: &GainVector,
    c: &DiscountVector,
    k: usize,
    k_max: f64,
) -> Result<Option<f64>> {
    let steps = (k_max / EXPONENT_STEP + 1e-9).floor().max(0.0) as usize;
    let grid: Vec<f64> = (1..=steps).map(|i| i as f64 * EXPONENT_STEP).collect();
    find_counterexample_exponent_on(set, g, c, k, &grid)
}

/// As [`find_counterexample_exponent`], over an explicit exponent grid.
pub fn find_counterexample_exponent_on(
    set: &LabeledSet,
    g: &GainVector,
    c: &DiscountVector,
    k: usize,
    grid: &[f64],
) -> Result<Option<f64>> {
    for &exponent in grid {
        let transformed = apply_power_transform(g, exponent)?;
        if !check_coherence(set, g, &transformed, c, k)?.coherent {
            return Ok(Some(exponent));
        }
    }
    Ok(None)
}

/// A uniformly shuffled labeled set with grades drawn from `1..=levels`.
pub fn random_labeled_set<R: Rng>(rng: &mut R, n: usize, levels: usize) -> Result<LabeledSet> {
    let mut grades: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=levels)).collect();
    grades.shuffle(rng);
    LabeledSet::new(grades, GradeScale::new(levels)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> (LabeledSet, GainVector, DiscountVector) {
        (
            LabeledSet::new(vec![2, 3, 1], GradeScale::new(3).unwrap()).unwrap(),
            GainVector::new(vec![0.5, 2.0, 3.0]).unwrap(),
            DiscountVector::new(vec![1.5, 0.5]).unwrap(),
        )
    }

    #[test]
    fn reproduces_incoherent_example() {
        let (set, g, c) = example();
        let cubed = apply_power_transform(&g, 3.0).unwrap();
        let verdict = check_coherence(&set, &g, &cubed, &c, 2).unwrap();
        assert!(!verdict.coherent);
        let w = verdict.witness.unwrap();
        assert_eq!(w.first.to_one_based(), vec![1, 3, 2]);
        assert_eq!(w.second.to_one_based(), vec![3, 2, 1]);
        assert!((w.scores_a.0 - 3.25).abs() < 1e-12);
        assert!((w.scores_a.1 - 2.25).abs() < 1e-12);
        assert!((w.scores_b.0 - 12.0625).abs() < 1e-12);
        assert!((w.scores_b.1 - 13.6875).abs() < 1e-12);
    }

    #[test]
    fn identical_and_scaled_rankers_are_coherent() {
        let (set, g, c) = example();
        assert!(check_coherence(&set, &g, &g, &c, 2).unwrap().coherent);
        assert!(check_coherence(&set, &g, &g.scaled(2.0), &c, 2).unwrap().coherent);
    }

    #[test]
    fn verdict_is_symmetric() {
        let (set, g, c) = example();
        let cubed = apply_power_transform(&g, 3.0).unwrap();
        let ab = check_coherence(&set, &g, &cubed, &c, 2).unwrap();
        let ba = check_coherence(&set, &cubed, &g, &c, 2).unwrap();
        assert_eq!(ab.coherent, ba.coherent);
    }

    #[test]
    fn capacity_guard() {
        let set = LabeledSet::new(vec![1; 11], GradeScale::new(2).unwrap()).unwrap();
        let g = GainVector::new(vec![0.0, 1.0]).unwrap();
        let c = DiscountVector::new(vec![1.0]).unwrap();
        assert!(matches!(check_coherence(&set, &g, &g, &c, 1), Err(Error::Capacity { .. })));
        assert!(matches!(verify_binary_coherence(1, 11, 2, 0), Err(Error::Capacity { .. })));
    }

    #[test]
    fn binary_coherence_trials() {
        assert!(verify_binary_coherence(0, 6, 4, 7).unwrap());
        assert!(verify_binary_coherence(100, 6, 4, 7).unwrap());
    }

    #[test]
    fn exponent_search() {
        let (set, g, c) = example();
        let k = find_counterexample_exponent(&set, &g, &c, 2, 5.0).unwrap().unwrap();
        assert!(k <= 3.0, "found {k}");
        assert_eq!(find_counterexample_exponent_on(&set, &g, &c, 2, &[1.0]).unwrap(), None);
    }

    #[test]
    fn exponent_search_binary_grades_finds_nothing() {
        let set = LabeledSet::new(vec![1, 2, 2, 1, 2], GradeScale::new(2).unwrap()).unwrap();
        let g = GainVector::new(vec![0.5, 3.0]).unwrap();
        let c = DiscountVector::logarithmic(4, 2.0).unwrap();
        assert_eq!(find_counterexample_exponent(&set, &g, &c, 4, 8.0).unwrap(), None);
    }

    #[test]
    fn prefixes_are_distinct_and_lexicographic() {
        let p = distinct_prefixes(&[1, 1, 2], 2);
        assert_eq!(p, vec![vec![1, 1], vec![1, 2], vec![2, 1]]);
    }
}
