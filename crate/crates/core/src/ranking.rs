//! DCG under explicit gain and discount vectors.
//!
//! A grade is an integer in `1..=L`; larger grades are better. A gain vector
//! holds one gain per grade, indexed by grade value, so a compatible gain vector
//! is strictly increasing.

use std::ops::Deref;

use crate::error::{invalid, Error, Result};

/// Ordinal label set with `levels` grades.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GradeScale {
    levels: usize,
}

impl GradeScale {
    pub fn new(levels: usize) -> Result<Self> {
        if levels < 2 {
            return Err(invalid(format!("a grade scale needs at least 2 levels, got {levels}")));
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn contains(&self, grade: usize) -> bool {
        (1..=self.levels).contains(&grade)
    }

    /// Maps a label given best-first (`0` is the best label) to a grade value.
    pub fn grade_from_best_first(&self, label_index: usize) -> Option<usize> {
        (label_index < self.levels).then(|| self.levels - label_index)
    }
}

/// Gain per grade value; `gains[0]` belongs to grade 1 (the worst).
#[derive(Debug, Clone, PartialEq)]
pub struct GainVector(Vec<f64>);

impl GainVector {
    pub fn new(gains: Vec<f64>) -> Result<Self> {
        if gains.is_empty() {
            return Err(invalid("gain vector is empty"));
        }
        if gains.iter().any(|g| !g.is_finite()) {
            return Err(invalid("gain vector has a non-finite entry"));
        }
        Ok(Self(gains))
    }

    pub fn levels(&self) -> usize {
        self.0.len()
    }

    /// Gain of a grade value in `1..=levels`.
    pub fn gain(&self, grade: usize) -> Option<f64> {
        grade.checked_sub(1).and_then(|i| self.0.get(i)).copied()
    }

    /// Strictly increasing in grade value. Equal neighbours are not compatible.
    pub fn is_compatible(&self) -> bool {
        self.0.windows(2).all(|w| w[0] < w[1])
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|g| g * factor).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Per-position discount factors, position 1 first; strictly decreasing and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountVector(Vec<f64>);

impl DiscountVector {
    pub fn new(discounts: Vec<f64>) -> Result<Self> {
        if discounts.is_empty() {
            return Err(invalid("discount vector is empty"));
        }
        if discounts.iter().any(|c| !c.is_finite() || *c <= 0.0) {
            return Err(invalid("discount factors must be finite and positive"));
        }
        if discounts.windows(2).any(|w| w[0] <= w[1]) {
            return Err(invalid("discount factors must be strictly decreasing"));
        }
        Ok(Self(discounts))
    }

    /// `c_k = 1 / log_base(k + 1)` for `k = 1..=positions`.
    pub fn logarithmic(positions: usize, base: f64) -> Result<Self> {
        if !(base > 1.0 && base.is_finite()) {
            return Err(invalid(format!("logarithm base must be finite and > 1, got {base}")));
        }
        let ln_base = base.ln();
        Self::new((1..=positions).map(|k| ln_base / ((k + 1) as f64).ln()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|c| c * factor).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Grades of a ranked list, top position first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GradeSequence(Vec<usize>);

impl GradeSequence {
    pub fn new(grades: Vec<usize>) -> Self {
        Self(grades)
    }

    pub fn validate(&self, levels: usize) -> Result<()> {
        match self.0.iter().find(|&&g| g == 0 || g > levels) {
            Some(g) => Err(invalid(format!("grade {g} outside 1..={levels}"))),
            None => Ok(()),
        }
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl Deref for GradeSequence {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for GradeSequence {
    fn from(grades: Vec<usize>) -> Self {
        Self(grades)
    }
}

/// A set of documents, each carrying a grade.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSet {
    grades: Vec<usize>,
}

impl LabeledSet {
    pub fn new(grades: Vec<usize>, scale: GradeScale) -> Result<Self> {
        if grades.is_empty() {
            return Err(invalid("labeled set is empty"));
        }
        GradeSequence::new(grades.clone()).validate(scale.levels())?;
        Ok(Self { grades })
    }

    pub fn len(&self) -> usize {
        self.grades.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grades.is_empty()
    }

    pub fn grades(&self) -> &[usize] {
        &self.grades
    }

    pub fn max_grade(&self) -> usize {
        self.grades.iter().copied().max().unwrap_or(0)
    }
}

/// A permutation of a labeled set: `order[i]` is the (0-based) item at rank `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ranking(Vec<usize>);

impl Ranking {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; order.len()];
        for &item in &order {
            match seen.get_mut(item) {
                Some(s) if !*s => *s = true,
                _ => return Err(invalid(format!("{order:?} is not a permutation of 0..{}", order.len()))),
            }
        }
        Ok(Self(order))
    }

    pub fn order(&self) -> &[usize] {
        &self.0
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    pub fn grades(&self, set: &LabeledSet) -> GradeSequence {
        GradeSequence(self.0.iter().map(|&i| set.grades[i]).collect())
    }
}

fn check_cutoff(k: usize, seq_len: usize, c: &DiscountVector) -> Result<()> {
    if k == 0 {
        return Err(invalid("cutoff K must be at least 1"));
    }
    if k > seq_len || k > c.len() {
        return Err(invalid(format!("cutoff K={k} exceeds sequence length {seq_len} or discount length {}", c.len())));
    }
    Ok(())
}

/// `sum_{i<K} c_i * g(grades_i)`.
pub fn dcg(seq: &[usize], g: &GainVector, c: &DiscountVector, k: usize) -> Result<f64> {
    check_cutoff(k, seq.len(), c)?;
    seq[..k].iter().zip(c.as_slice()).try_fold(0.0, |acc, (&grade, &ci)| {
        let gain = g
            .gain(grade)
            .ok_or_else(|| invalid(format!("grade {grade} has no gain in a {}-level vector", g.levels())))?;
        Ok(acc + ci * gain)
    })
}

/// Sorts items by non-increasing grade. Any such ranking maximises DCG when `g`
/// is compatible; ties keep input order.
pub fn optimal_ranking(set: &LabeledSet, g: &GainVector, c: &DiscountVector, k: usize) -> Result<Ranking> {
    if !g.is_compatible() {
        return Err(Error::Precondition("gain vector is not compatible".into()));
    }
    if set.max_grade() > g.levels() {
        return Err(invalid(format!("set uses grade {} beyond {} gain levels", set.max_grade(), g.levels())));
    }
    check_cutoff(k, set.len(), c)?;
    let mut order: Vec<usize> = (0..set.len()).collect();
    order.sort_by(|&a, &b| set.grades[b].cmp(&set.grades[a]));
    Ok(Ranking(order))
}

/// Maps every gain `t` to `t^k`.
pub fn apply_power_transform(g: &GainVector, k: f64) -> Result<GainVector> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Domain(format!("exponent must be positive and finite, got {k}")));
    }
    if let Some(bad) = g.as_slice().iter().find(|&&t| t <= 0.0) {
        return Err(Error::Domain(format!("power transform needs positive gains, found {bad}")));
    }
    GainVector::new(g.as_slice().iter().map(|t| t.powf(k)).collect())
}
