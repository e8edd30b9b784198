//! Experiment configuration and its flat `key = value` text form.
//!
//! ```text
//! # comments start with '#'
//! gain_profile     = linear            # linear (G_l = l) | exponential (G_l = 2^l - 1)
//! positions        = 10
//! levels           = 5
//! log_base         = e                 # e or any number > 1
//! base_list        = 5,5,4,4,3,3,2,2,1,1
//! train_pairs      = 20,40,60          # one or more sweep points
//! test_pairs       = 1000
//! validation_pairs = 200
//! pair_flips       = 0                 # one or more sweep points
//! grade_flips      = 0                 # one or more sweep points
//! pair_mode        = general           # general | optimal_same_list | optimal_different_lists
//! model            = base              # base | hamming_margin | grade_free
//! seeds            = 0..10             # list, or half-open range a..b
//! c_grid           = 0.01,0.1,1,10,100
//! default_c        = 1
//! tolerance        = 1e-10
//! max_iterations   = 50000
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::FitConfig;

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// How the true gain of grade `l` is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainProfile {
    /// `G_l = l`.
    Linear,
    /// `G_l = 2^l - 1`.
    Exponential,
}

impl GainProfile {
    pub fn gain(self, grade: usize) -> f64 {
        match self {
            GainProfile::Linear => grade as f64,
            GainProfile::Exponential => 2f64.powi(grade as i32) - 1.0,
        }
    }
}

impl FromStr for GainProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" | "data1" => Ok(Self::Linear),
            "exponential" | "data2" => Ok(Self::Exponential),
            other => Err(config_err(format!("unknown gain profile '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruthSpec {
    pub profile: GainProfile,
    pub positions: usize,
    pub levels: usize,
    /// Base of the logarithm in `w_kl = G_l / log(k + 1)`.
    pub log_base: f64,
}

impl Default for GroundTruthSpec {
    fn default() -> Self {
        Self { profile: GainProfile::Linear, positions: 10, levels: 5, log_base: std::f64::consts::E }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairMode {
    /// Both sides are random permutations of the base list.
    General,
    /// One side is the optimal ordering of the base list, the other a random permutation of it.
    OptimalSameList,
    /// One side is the optimal ordering of the base list, the other a list with a different grade multiset.
    OptimalDifferentLists,
}

impl PairMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PairMode::General => "general",
            PairMode::OptimalSameList => "optimal_same_list",
            PairMode::OptimalDifferentLists => "optimal_different_lists",
        }
    }
}

impl fmt::Display for PairMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PairMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "general" => Ok(Self::General),
            "optimal_same_list" => Ok(Self::OptimalSameList),
            "optimal_different_lists" => Ok(Self::OptimalDifferentLists),
            other => Err(config_err(format!("unknown pair mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// Unit margins, monotone blocks.
    Base,
    /// Margins equal to the Hamming distance between the two lists.
    HammingMargin,
    /// Document-identity encoding, no monotonicity.
    GradeFree,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Base => "base",
            Model::HammingMargin => "hamming_margin",
            Model::GradeFree => "grade_free",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "base" => Ok(Self::Base),
            "hamming_margin" | "hamming" | "enhanced" => Ok(Self::HammingMargin),
            "grade_free" => Ok(Self::GradeFree),
            other => Err(config_err(format!("unknown model '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub truth: GroundTruthSpec,
    pub base_list: Vec<usize>,
    pub train_pairs: Vec<usize>,
    pub test_pairs: usize,
    pub validation_pairs: usize,
    pub pair_flips: Vec<usize>,
    pub grade_flips: Vec<usize>,
    pub pair_mode: PairMode,
    pub model: Model,
    pub seeds: Vec<u64>,
    pub c_grid: Vec<f64>,
    /// C used when no noise is injected.
    pub default_c: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            truth: GroundTruthSpec::default(),
            base_list: vec![5, 5, 4, 4, 3, 3, 2, 2, 1, 1],
            train_pairs: (1..=10).map(|i| 20 * i).collect(),
            test_pairs: 1000,
            validation_pairs: 200,
            pair_flips: vec![0],
            grade_flips: vec![0],
            pair_mode: PairMode::General,
            model: Model::Base,
            seeds: (0..10).collect(),
            c_grid: vec![0.01, 0.1, 1.0, 10.0, 100.0],
            default_c: 1.0,
            tolerance: 1e-10,
            max_iterations: 50_000,
        }
    }
}

fn parse_scalar<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| config_err(format!("{key}: cannot parse '{}'", value.trim())))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse_scalar(key, s)).collect()
}

fn parse_seeds(value: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = value.split_once("..") {
        let start: u64 = parse_scalar("seeds", a)?;
        let end: u64 = parse_scalar("seeds", b)?;
        return Ok((start..end).collect());
    }
    parse_list("seeds", value)
}

fn parse_log_base(value: &str) -> Result<f64> {
    match value.trim() {
        "e" | "E" => Ok(std::f64::consts::E),
        other => parse_scalar("log_base", other),
    }
}

impl ExperimentConfig {
    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.trim() {
            "gain_profile" | "setting" => self.truth.profile = value.parse()?,
            "positions" => self.truth.positions = parse_scalar(key, value)?,
            "levels" => self.truth.levels = parse_scalar(key, value)?,
            "log_base" => self.truth.log_base = parse_log_base(value)?,
            "base_list" => self.base_list = parse_list(key, value)?,
            "train_pairs" => self.train_pairs = parse_list(key, value)?,
            "test_pairs" => self.test_pairs = parse_scalar(key, value)?,
            "validation_pairs" => self.validation_pairs = parse_scalar(key, value)?,
            "pair_flips" => self.pair_flips = parse_list(key, value)?,
            "grade_flips" => self.grade_flips = parse_list(key, value)?,
            "pair_mode" => self.pair_mode = value.parse()?,
            "model" => self.model = value.parse()?,
            "seeds" => self.seeds = parse_seeds(value)?,
            "c_grid" => self.c_grid = parse_list(key, value)?,
            "default_c" => self.default_c = parse_scalar(key, value)?,
            "tolerance" => self.tolerance = parse_scalar(key, value)?,
            "max_iterations" => self.max_iterations = parse_scalar(key, value)?,
            other => return Err(config_err(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text` on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected 'key = value'", lineno + 1)))?;
            self.set(key, value).map_err(|e| match e {
                Error::Config(msg) => config_err(format!("line {}: {msg}", lineno + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn fit_config(&self, c: f64) -> FitConfig {
        FitConfig {
            c,
            monotone: self.model != Model::GradeFree,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.truth;
        if t.positions == 0 || t.levels == 0 {
            return Err(config_err("positions and levels must be positive"));
        }
        if !(t.log_base > 1.0 && t.log_base.is_finite()) {
            return Err(config_err("log_base must be finite and > 1"));
        }
        if self.base_list.len() < t.positions {
            return Err(config_err(format!(
                "base_list has {} entries but positions = {}",
                self.base_list.len(),
                t.positions
            )));
        }
        if let Some(g) = self.base_list.iter().find(|&&g| g == 0 || g > t.levels) {
            return Err(config_err(format!("base_list grade {g} outside 1..={}", t.levels)));
        }
        if self.train_pairs.is_empty() || self.seeds.is_empty() {
            return Err(config_err("train_pairs and seeds must not be empty"));
        }
        if self.pair_flips.is_empty() || self.grade_flips.is_empty() {
            return Err(config_err("pair_flips and grade_flips must not be empty"));
        }
        if self.test_pairs == 0 {
            return Err(config_err("test_pairs must be positive"));
        }
        let noisy = self.pair_flips.iter().chain(&self.grade_flips).any(|&m| m > 0);
        if noisy && (self.validation_pairs == 0 || self.c_grid.is_empty()) {
            return Err(config_err("noisy runs need validation_pairs > 0 and a non-empty c_grid"));
        }
        if self.c_grid.iter().chain([&self.default_c]).any(|&c| !(c > 0.0 && c.is_finite())) {
            return Err(config_err("every C must be positive and finite"));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 || self.max_iterations == 0 {
            return Err(config_err("tolerance and max_iterations must be positive"));
        }
        let slots_per_pair = 2 * t.positions;
        for &n in &self.train_pairs {
            if let Some(m) = self.pair_flips.iter().find(|&&m| m > n) {
                return Err(config_err(format!("pair_flips {m} exceeds train_pairs {n}")));
            }
            if let Some(m) = self.grade_flips.iter().find(|&&m| m > n * slots_per_pair) {
                return Err(config_err(format!("grade_flips {m} exceeds the {} graded slots", n * slots_per_pair)));
            }
        }
        if self.model == Model::GradeFree {
            if self.base_list.len() != t.positions {
                return Err(config_err("grade_free needs base_list length equal to positions"));
            }
            if self.grade_flips.iter().any(|&m| m > 0) {
                return Err(config_err("grade_free has no grades to corrupt"));
            }
            if self.pair_mode == PairMode::OptimalDifferentLists {
                return Err(config_err("grade_free works on one fixed document set"));
            }
        }
        Ok(())
    }
}
