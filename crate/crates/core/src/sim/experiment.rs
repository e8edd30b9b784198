//! Sweeps over seeds, training-set sizes and noise levels.

use std::io;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::{precision, similarity};
use crate::encoding::UtilityVector;
use crate::error::{Error, Result};
use crate::learner::{fit, PreferencePair};
use crate::sim::config::{ExperimentConfig, Model, PairMode};
use crate::sim::data::{inject_grade_noise, inject_pair_noise, sample_pairs, Oracle};

/// One CSV line of experiment output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub seed: u64,
    pub n_train_pairs: usize,
    pub noise_pairs: usize,
    pub noise_grades: usize,
    pub model: Model,
    pub pair_mode: PairMode,
    pub chosen_c: f64,
    pub precision: f64,
    /// `NaN` when the fitted vector has no order information.
    pub similarity: f64,
}

/// Column order of the CSV output.
pub const CSV_HEADER: [&str; 9] = [
    "seed",
    "n_train_pairs",
    "noise_pairs",
    "noise_grades",
    "model",
    "pair_mode",
    "chosen_c",
    "precision",
    "similarity",
];

/// One cell of the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Task {
    pub seed: u64,
    pub n_train: usize,
    pub pair_flips: usize,
    pub grade_flips: usize,
}

#[derive(Debug, Clone)]
pub struct TaskOutcome {
    pub row: ResultRow,
    pub weights: UtilityVector,
    pub truth: UtilityVector,
}

/// SplitMix64 finaliser, used to derive independent stream seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A generator that depends only on `seed` and `parts`.
pub fn stream_rng(seed: u64, parts: &[u64]) -> ChaCha8Rng {
    let state = parts.iter().fold(mix(seed), |acc, &p| mix(acc ^ mix(p)));
    ChaCha8Rng::seed_from_u64(state)
}

const STREAM_DATA: u64 = 0;
const STREAM_PAIR_NOISE: u64 = 1;
const STREAM_GRADE_NOISE: u64 = 2;

pub fn tasks(cfg: &ExperimentConfig) -> Vec<Task> {
    let mut out = Vec::new();
    for &seed in &cfg.seeds {
        for &n_train in &cfg.train_pairs {
            for &pair_flips in &cfg.pair_flips {
                for &grade_flips in &cfg.grade_flips {
                    out.push(Task { seed, n_train, pair_flips, grade_flips });
                }
            }
        }
    }
    out
}

fn fit_or_zero(
    pairs: &[PreferencePair],
    cfg: &ExperimentConfig,
    c: f64,
    like: &UtilityVector,
) -> Result<UtilityVector> {
    if pairs.is_empty() {
        return Ok(UtilityVector::zeros(like.positions(), like.block_size()));
    }
    fit(pairs, &cfg.fit_config(c))
}

/// Runs one sweep cell. Clean data depends on `(seed, n_train)` only, so noise
/// levels of the same cell share their training, validation and test sets.
pub fn run_task(cfg: &ExperimentConfig, task: Task) -> Result<TaskOutcome> {
    let oracle = Oracle::new(cfg);
    let mut data_rng = stream_rng(task.seed, &[STREAM_DATA, task.n_train as u64]);
    let mut sampled = sample_pairs(cfg, task.n_train, &mut data_rng)?;

    if task.grade_flips > 0 {
        let mut rng = stream_rng(task.seed, &[STREAM_GRADE_NOISE, task.n_train as u64, task.grade_flips as u64]);
        inject_grade_noise(&mut sampled.train, task.grade_flips, cfg.truth.levels, &mut rng)?;
    }
    let mut train = oracle.to_preference_pairs(&sampled.train)?;
    if task.pair_flips > 0 {
        let mut rng = stream_rng(task.seed, &[STREAM_PAIR_NOISE, task.n_train as u64, task.pair_flips as u64]);
        inject_pair_noise(&mut train, task.pair_flips, &mut rng)?;
    }
    let test = oracle.to_preference_pairs(&sampled.test)?;

    let noisy = task.pair_flips > 0 || task.grade_flips > 0;
    let (chosen_c, weights) = if noisy && !train.is_empty() {
        let validation = oracle.to_preference_pairs(&sampled.validation)?;
        let mut best: Option<(f64, f64, UtilityVector)> = None;
        for &c in &cfg.c_grid {
            let w = fit_or_zero(&train, cfg, c, &oracle.truth)?;
            let p = precision(&w, &validation)?;
            if best.as_ref().is_none_or(|(bp, _, _)| p > *bp) {
                best = Some((p, c, w));
            }
        }
        let (_, c, w) = best.expect("non-empty C grid");
        (c, w)
    } else {
        (cfg.default_c, fit_or_zero(&train, cfg, cfg.default_c, &oracle.truth)?)
    };

    let row = ResultRow {
        seed: task.seed,
        n_train_pairs: task.n_train,
        noise_pairs: task.pair_flips,
        noise_grades: task.grade_flips,
        model: cfg.model,
        pair_mode: cfg.pair_mode,
        chosen_c,
        precision: precision(&weights, &test)?,
        similarity: similarity(&oracle.truth, &weights).unwrap_or(f64::NAN),
    };
    Ok(TaskOutcome { row, weights, truth: oracle.truth })
}

/// Runs every sweep cell in parallel; rows come back in sweep order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    run_experiment_detailed(cfg).map(|v| v.into_iter().map(|o| o.row).collect())
}

pub fn run_experiment_detailed(cfg: &ExperimentConfig) -> Result<Vec<TaskOutcome>> {
    cfg.validate()?;
    tasks(cfg)
        .into_par_iter()
        .map(|task| {
            run_task(cfg, task).map_err(|source| Error::Task {
                row: format!(
                    "seed={} n_train_pairs={} noise_pairs={} noise_grades={}",
                    task.seed, task.n_train, task.pair_flips, task.grade_flips
                ),
                source: Box::new(source),
            })
        })
        .collect()
}

pub fn write_csv<W: io::Write>(rows: &[ResultRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: io::Read>(input: R) -> csv::Result<Vec<ResultRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// Median of the finite values; `NaN` if there are none.
pub fn median(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Median precision and similarity over seeds for one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub model: Model,
    pub pair_mode: PairMode,
    pub n_train_pairs: usize,
    pub noise_pairs: usize,
    pub noise_grades: usize,
    pub seeds: usize,
    pub median_precision: f64,
    pub median_similarity: f64,
}

pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(Model, PairMode, usize, usize, usize)> = Vec::new();
    for r in rows {
        let key = (r.model, r.pair_mode, r.n_train_pairs, r.noise_pairs, r.noise_grades);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|key| {
            let group: Vec<&ResultRow> = rows
                .iter()
                .filter(|r| (r.model, r.pair_mode, r.n_train_pairs, r.noise_pairs, r.noise_grades) == key)
                .collect();
            SummaryRow {
                model: key.0,
                pair_mode: key.1,
                n_train_pairs: key.2,
                noise_pairs: key.3,
                noise_grades: key.4,
                seeds: group.len(),
                median_precision: median(group.iter().map(|r| r.precision)),
                median_similarity: median(group.iter().map(|r| r.similarity)),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig { train_pairs: vec![0, 30], seeds: vec![1, 2], test_pairs: 200, ..ExperimentConfig::default() }
    }

    #[test]
    fn rows_are_deterministic_and_ordered() {
        let cfg = small();
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.len(), 4);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.precision.to_bits(), y.precision.to_bits());
            assert_eq!(x.similarity.to_bits(), y.similarity.to_bits());
        }
        assert_eq!((a[0].seed, a[0].n_train_pairs), (1, 0));
        assert_eq!((a[3].seed, a[3].n_train_pairs), (2, 30));
    }

    #[test]
    fn empty_training_set_gives_zero_vector() {
        let out = run_task(&small(), Task { seed: 1, n_train: 0, pair_flips: 0, grade_flips: 0 }).unwrap();
        assert_eq!(out.row.precision, 0.0);
        assert!(out.row.similarity.is_nan());
    }

    #[test]
    fn noisy_runs_pick_c_from_grid() {
        let cfg = ExperimentConfig { pair_flips: vec![5], ..small() };
        let out = run_task(&cfg, Task { seed: 1, n_train: 30, pair_flips: 5, grade_flips: 0 }).unwrap();
        assert!(cfg.c_grid.contains(&out.row.chosen_c));
    }

    #[test]
    fn csv_round_trip_keeps_header_order() {
        let rows = run_experiment(&small()).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
        let back = read_csv(&buf[..]).unwrap();
        assert_eq!(back.len(), rows.len());
        assert_eq!(back[3].precision, rows[3].precision);
        assert!(back[0].similarity.is_nan());
    }

    #[test]
    fn median_cases() {
        assert_eq!(median([3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median([4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median([f64::NAN]).is_nan());
    }

    #[test]
    fn stream_rng_is_keyed() {
        use rand::Rng;
        let a: u64 = stream_rng(1, &[0, 20]).gen();
        let b: u64 = stream_rng(1, &[0, 20]).gen();
        let c: u64 = stream_rng(1, &[0, 40]).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
