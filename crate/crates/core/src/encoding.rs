//! One-hot encodings of ranked lists and the linear utility over them.
//!
//! A graded encoding has one block of `L` bits per position; within a block the
//! best grade comes first, so grade `l` sets bit `L - l`. A grade-free encoding
//! has one block of `K` bits per position, and bit `d` marks document `d`.

use crate::error::{invalid, Result};
use crate::ranking::{DiscountVector, GainVector, GradeSequence};

/// A binary vector made of equally sized one-hot blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Encoding {
    bits: Vec<u8>,
    block: usize,
}

impl Encoding {
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn dim(&self) -> usize {
        self.bits.len()
    }

    pub fn block_size(&self) -> usize {
        self.block
    }

    pub fn positions(&self) -> usize {
        self.bits.len() / self.block
    }

    /// Index of the set bit in each block.
    pub fn hot_indices(&self) -> Vec<usize> {
        self.bits.chunks(self.block).map(|b| b.iter().position(|&x| x == 1).expect("one-hot block")).collect()
    }
}

/// Encodes the grades of a top-K list, one `levels`-wide block per position.
pub fn encode(seq: &[usize], levels: usize) -> Result<Encoding> {
    if levels == 0 {
        return Err(invalid("levels must be positive"));
    }
    let mut bits = vec![0u8; seq.len() * levels];
    for (pos, &grade) in seq.iter().enumerate() {
        if grade == 0 || grade > levels {
            return Err(invalid(format!("grade {grade} at position {} outside 1..={levels}", pos + 1)));
        }
        bits[pos * levels + (levels - grade)] = 1;
    }
    Ok(Encoding { bits, block: levels })
}

/// Inverse of [`encode`].
pub fn decode(enc: &Encoding) -> GradeSequence {
    GradeSequence::new(enc.hot_indices().into_iter().map(|i| enc.block - i).collect())
}

/// Encodes a permutation of documents `0..K`; block `k` marks the document at rank `k`.
pub fn encode_grade_free(perm: &[usize]) -> Result<Encoding> {
    let k = perm.len();
    if k == 0 {
        return Err(invalid("empty permutation"));
    }
    let mut seen = vec![false; k];
    let mut bits = vec![0u8; k * k];
    for (pos, &doc) in perm.iter().enumerate() {
        if doc >= k {
            return Err(invalid(format!("document {doc} outside 0..{k}")));
        }
        if std::mem::replace(&mut seen[doc], true) {
            return Err(invalid(format!("document {doc} appears twice")));
        }
        bits[pos * k + doc] = 1;
    }
    Ok(Encoding { bits, block: k })
}

/// Weights of a linear utility over an [`Encoding`], laid out block by block.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityVector {
    weights: Vec<f64>,
    block: usize,
}

impl UtilityVector {
    pub fn new(weights: Vec<f64>, block_size: usize) -> Result<Self> {
        if block_size == 0 || weights.is_empty() || !weights.len().is_multiple_of(block_size) {
            return Err(invalid(format!("{} weights cannot be split into blocks of {block_size}", weights.len())));
        }
        Ok(Self { weights, block: block_size })
    }

    pub fn zeros(positions: usize, block_size: usize) -> Self {
        Self { weights: vec![0.0; positions * block_size], block: block_size }
    }

    /// Position-independent gains: `w[k][i] = c_k * g(grade L - i)`.
    pub fn from_gains_and_discounts(g: &GainVector, c: &DiscountVector) -> Self {
        let levels = g.levels();
        let weights =
            c.as_slice().iter().flat_map(|&ck| (0..levels).map(move |i| ck * g.as_slice()[levels - 1 - i])).collect();
        Self { weights, block: levels }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn block_size(&self) -> usize {
        self.block
    }

    pub fn positions(&self) -> usize {
        self.weights.len() / self.block
    }

    pub fn blocks(&self) -> std::slice::Chunks<'_, f64> {
        self.weights.chunks(self.block)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { weights: self.weights.iter().map(|w| w * factor).collect(), block: self.block }
    }

    pub fn norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// Largest amount by which any block rises from one entry to the next.
    pub fn monotonicity_violation(&self) -> f64 {
        self.blocks().flat_map(|b| b.windows(2).map(|p| p[1] - p[0])).fold(0.0, f64::max)
    }
}

impl std::ops::Add for &UtilityVector {
    type Output = UtilityVector;

    fn add(self, rhs: &UtilityVector) -> UtilityVector {
        assert_eq!(self.weights.len(), rhs.weights.len(), "dimension mismatch");
        UtilityVector {
            weights: self.weights.iter().zip(&rhs.weights).map(|(a, b)| a + b).collect(),
            block: self.block,
        }
    }
}

/// `w . s`.
pub fn utility(w: &UtilityVector, enc: &Encoding) -> Result<f64> {
    if w.dim() != enc.dim() {
        return Err(invalid(format!("utility has {} weights but encoding has {} bits", w.dim(), enc.dim())));
    }
    Ok(w.weights.iter().zip(&enc.bits).filter(|(_, &b)| b == 1).map(|(w, _)| w).sum())
}
