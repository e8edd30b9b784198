//! Analysis and calibration of Discounted Cumulated Gain.
//!
//! Two halves:
//!
//! - [`ranking`] and [`coherence`] compute DCG under explicit gain and discount
//!   vectors and decide whether two compatible gain vectors can order the same
//!   pair of rankings differently.
//! - [`encoding`], [`learner`] and [`decomposition`] treat DCG as a linear
//!   utility over a one-hot encoding of a ranking, fit that utility from
//!   pairwise preferences with a constrained squared-hinge program, and split
//!   the fitted weights back into gain and discount estimates.
//!
//! [`sim`] wires everything into a reproducible simulation harness.
//!
//! Grades are integers `1..=L` with larger meaning better. Inside encodings and
//! utility vectors, each position block lists the best grade first.

pub mod coherence;
pub mod decomposition;
pub mod encoding;
mod error;
pub mod learner;
pub mod ranking;
pub mod sim;

pub use coherence::{check_coherence, find_counterexample_exponent, verify_binary_coherence, CoherenceVerdict};
pub use decomposition::{
    hamming, precision, rank_one_factorize, similarity, t_transform, RankOneFactors, WeightMatrix,
};
pub use encoding::{encode, encode_grade_free, utility, Encoding, UtilityVector};
pub use error::{Error, Result};
pub use learner::{fit, fit_detailed, isotonic_project, label_pair, FitConfig, FitReport, PreferencePair};
pub use ranking::{
    apply_power_transform, dcg, optimal_ranking, DiscountVector, GainVector, GradeScale, GradeSequence, LabeledSet,
    Ranking,
};
