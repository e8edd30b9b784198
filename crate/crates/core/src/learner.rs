//! Fitting a utility vector from preference pairs.
//!
//! The program is
//!
//! ```text
//! minimise   w.w + C * sum_ij max(0, m_ij - w.(s_i - s_j))^2
//! subject to w[k][l] >= w[k][l+1]   (optional, per position block)
//! ```
//!
//! which is the slack formulation with the optimal slack substituted in. The
//! objective is convex and smooth, so it is solved by accelerated projected
//! gradient: a fixed step from a Lipschitz bound, momentum with restart whenever
//! the objective would rise, and an exact per-block isotonic projection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::encoding::{utility, Encoding, UtilityVector};
use crate::error::{invalid, Error, Result};

/// `winner` is preferred to `loser`; `margin` is the required utility gap.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferencePair {
    pub winner: Encoding,
    pub loser: Encoding,
    pub margin: f64,
}

impl PreferencePair {
    pub fn new(winner: Encoding, loser: Encoding, margin: f64) -> Result<Self> {
        if winner.dim() != loser.dim() || winner.block_size() != loser.block_size() {
            return Err(invalid("winner and loser encodings differ in shape"));
        }
        if !(margin >= 0.0 && margin.is_finite()) {
            return Err(invalid(format!("margin must be finite and non-negative, got {margin}")));
        }
        Ok(Self { winner, loser, margin })
    }

    pub fn swapped(&self) -> Self {
        Self { winner: self.loser.clone(), loser: self.winner.clone(), margin: self.margin }
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    /// Sparse `s_winner - s_loser`.
    fn delta(&self) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for (i, (&a, &b)) in self.winner.bits().iter().zip(self.loser.bits()).enumerate() {
            if a != b {
                out.push((i, a as f64 - b as f64));
            }
        }
        out
    }
}

/// Labels a pair of encoded rankings with a reference utility. The first
/// ranking wins only when its utility is strictly higher.
pub fn label_pair(w_true: &UtilityVector, s1: &Encoding, s2: &Encoding) -> Result<PreferencePair> {
    let u1 = utility(w_true, s1)?;
    let u2 = utility(w_true, s2)?;
    if u1 > u2 {
        PreferencePair::new(s1.clone(), s2.clone(), 1.0)
    } else {
        PreferencePair::new(s2.clone(), s1.clone(), 1.0)
    }
}

/// Euclidean projection onto non-increasing sequences (pool adjacent violators).
pub fn isotonic_project(block: &[f64]) -> Vec<f64> {
    // (sum, count) per pooled run
    let mut runs: Vec<(f64, usize)> = Vec::with_capacity(block.len());
    for &x in block {
        runs.push((x, 1));
        while runs.len() >= 2 {
            let (s1, n1) = runs[runs.len() - 1];
            let (s0, n0) = runs[runs.len() - 2];
            if s0 / n0 as f64 >= s1 / n1 as f64 {
                break;
            }
            runs.pop();
            *runs.last_mut().unwrap() = (s0 + s1, n0 + n1);
        }
    }
    runs.into_iter().flat_map(|(s, n)| std::iter::repeat_n(s / n as f64, n)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Weight of the squared slack penalty.
    pub c: f64,
    /// Impose `w[k][l] >= w[k][l+1]` inside every block.
    pub monotone: bool,
    /// Relative objective change that counts as converged.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Seeds the start vector of the Lipschitz power iteration.
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { c: 1.0, monotone: true, tolerance: 1e-10, max_iterations: 50_000, seed: 0 }
    }
}

impl FitConfig {
    fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(invalid(format!("C must be positive, got {}", self.c)));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(invalid(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(invalid("max_iterations must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FitReport {
    pub weights: UtilityVector,
    pub objective: f64,
    pub iterations: usize,
    /// Objective at the start point followed by the objective after every iteration.
    pub objective_trace: Vec<f64>,
    pub lipschitz: f64,
}

struct Problem {
    deltas: Vec<Vec<(usize, f64)>>,
    margins: Vec<f64>,
    c: f64,
    dim: usize,
    block: usize,
    monotone: bool,
}

impl Problem {
    fn new(pairs: &[PreferencePair], cfg: &FitConfig) -> Result<Self> {
        let first = pairs.first().ok_or_else(|| invalid("no preference pairs"))?;
        let (dim, block) = (first.winner.dim(), first.winner.block_size());
        if pairs.iter().any(|p| p.winner.dim() != dim || p.winner.block_size() != block) {
            return Err(invalid("preference pairs have inconsistent dimensions"));
        }
        Ok(Self {
            deltas: pairs.iter().map(PreferencePair::delta).collect(),
            margins: pairs.iter().map(|p| p.margin).collect(),
            c: cfg.c,
            dim,
            block,
            monotone: cfg.monotone,
        })
    }

    fn residual(&self, pair: usize, w: &[f64]) -> f64 {
        let dot: f64 = self.deltas[pair].iter().map(|&(i, v)| w[i] * v).sum();
        self.margins[pair] - dot
    }

    fn objective(&self, w: &[f64]) -> f64 {
        let reg: f64 = w.iter().map(|x| x * x).sum();
        let loss: f64 = (0..self.deltas.len()).map(|p| self.residual(p, w).max(0.0).powi(2)).sum();
        reg + self.c * loss
    }

    fn gradient(&self, w: &[f64], out: &mut [f64]) {
        for (o, x) in out.iter_mut().zip(w) {
            *o = 2.0 * x;
        }
        for (p, d) in self.deltas.iter().enumerate() {
            let r = self.residual(p, w);
            if r > 0.0 {
                for &(i, v) in d {
                    out[i] -= 2.0 * self.c * r * v;
                }
            }
        }
    }

    fn project(&self, w: &mut [f64]) {
        if self.monotone {
            for block in w.chunks_mut(self.block) {
                let p = isotonic_project(block);
                block.copy_from_slice(&p);
            }
        }
    }

    /// Power iteration estimate of the top eigenvalue of `sum delta delta^T`.
    fn gram_top_eigenvalue(&self, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<f64> = (0..self.dim).map(|_| rng.gen_range(0.5..1.5)).collect();
        let mut lambda = 0.0;
        for _ in 0..500 {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            v.iter_mut().for_each(|x| *x /= norm);
            let mut mv = vec![0.0; self.dim];
            for d in &self.deltas {
                let dot: f64 = d.iter().map(|&(i, x)| v[i] * x).sum();
                for &(i, x) in d {
                    mv[i] += dot * x;
                }
            }
            let next = mv.iter().map(|x| x * x).sum::<f64>().sqrt();
            let converged = (next - lambda).abs() <= 1e-9 * next;
            lambda = next;
            v = mv;
            if converged {
                break;
            }
        }
        lambda
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn dot_diff(g: &[f64], a: &[f64], b: &[f64]) -> f64 {
    g.iter().zip(a.iter().zip(b)).map(|(gi, (ai, bi))| gi * (ai - bi)).sum()
}

/// Fits `w` and returns it.
pub fn fit(pairs: &[PreferencePair], cfg: &FitConfig) -> Result<UtilityVector> {
    fit_detailed(pairs, cfg).map(|r| r.weights)
}

/// Fits `w` and returns it together with the solver trace.
pub fn fit_detailed(pairs: &[PreferencePair], cfg: &FitConfig) -> Result<FitReport> {
    cfg.validate()?;
    let problem = Problem::new(pairs, cfg)?;
    let n = problem.dim;
    let mut lipschitz = 2.0 + 2.0 * cfg.c * problem.gram_top_eigenvalue(cfg.seed);

    // Projected gradient step from `from`, doubling the Lipschitz estimate until
    // the quadratic upper bound holds. Returns the new point and its objective.
    let step = |from: &[f64], f_from: f64, lipschitz: &mut f64, grad: &mut Vec<f64>| -> (Vec<f64>, f64) {
        problem.gradient(from, grad);
        loop {
            let mut z: Vec<f64> = from.iter().zip(grad.iter()).map(|(x, g)| x - g / *lipschitz).collect();
            problem.project(&mut z);
            let fz = problem.objective(&z);
            let bound = f_from + dot_diff(grad, &z, from) + 0.5 * *lipschitz * sq_dist(&z, from);
            if fz <= bound + 1e-12 * bound.abs().max(1.0) {
                return (z, fz);
            }
            *lipschitz *= 2.0;
        }
    };

    let mut x = vec![0.0; n];
    problem.project(&mut x);
    let mut fx = problem.objective(&x);
    let mut trace = vec![fx];
    let mut y = x.clone();
    let mut fy = fx;
    let mut t = 1.0f64;
    let mut force_plain = false;
    let mut grad = vec![0.0; n];

    for iteration in 1..=cfg.max_iterations {
        let mut plain = force_plain || t == 1.0;
        let (mut z, mut fz) =
            if plain { step(&x, fx, &mut lipschitz, &mut grad) } else { step(&y, fy, &mut lipschitz, &mut grad) };
        if fz > fx {
            // momentum overshot: restart from the current iterate
            plain = true;
            t = 1.0;
            (z, fz) = step(&x, fx, &mut lipschitz, &mut grad);
        }
        if fz > fx {
            // only reachable through rounding at the optimum
            fz = fx;
            z.clone_from(&x);
        }

        let relative = (fx - fz) / fx.abs().max(f64::MIN_POSITIVE);
        let t_next = if plain && force_plain { 1.0 } else { 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt()) };
        let beta = if t_next == 1.0 { 0.0 } else { (t - 1.0) / t_next };
        y = z.iter().zip(&x).map(|(zi, xi)| zi + beta * (zi - xi)).collect();
        fy = problem.objective(&y);
        x = z;
        fx = fz;
        t = t_next;
        trace.push(fx);

        if relative < cfg.tolerance {
            if plain {
                return Ok(FitReport {
                    weights: UtilityVector::new(x, problem.block)?,
                    objective: fx,
                    iterations: iteration,
                    objective_trace: trace,
                    lipschitz,
                });
            }
            force_plain = true;
        } else {
            force_plain = false;
        }
    }
    Err(Error::Convergence { iterations: cfg.max_iterations, objective: fx })
}

/// The fitting objective evaluated at `w`.
pub fn objective(w: &UtilityVector, pairs: &[PreferencePair], c: f64) -> Result<f64> {
    let cfg = FitConfig { c, ..FitConfig::default() };
    let problem = Problem::new(pairs, &cfg)?;
    if w.dim() != problem.dim {
        return Err(invalid("weight dimension does not match the pairs"));
    }
    Ok(problem.objective(w.as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::encode;
    use proptest::prelude::*;

    fn unit_pair() -> PreferencePair {
        // delta = e1 - e2 over a single two-level block
        PreferencePair::new(encode(&[2], 2).unwrap(), encode(&[1], 2).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn isotonic_examples() {
        assert_eq!(isotonic_project(&[3.0, 2.0, 1.0]), vec![3.0, 2.0, 1.0]);
        assert_eq!(isotonic_project(&[1.0, 3.0]), vec![2.0, 2.0]);
        assert_eq!(isotonic_project(&[]), Vec::<f64>::new());
        assert_eq!(isotonic_project(&[1.0, 2.0, 3.0]), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn single_pair_closed_form() {
        let cfg = FitConfig { monotone: false, ..FitConfig::default() };
        let report = fit_detailed(&[unit_pair()], &cfg).unwrap();
        let w = report.weights.as_slice();
        let a = 2.0 / 6.0;
        assert!((w[0] - a).abs() < 1e-6 && (w[1] + a).abs() < 1e-6, "{w:?}");
        let closed = 2.0 * a * a + (1.0 - 2.0 * a).powi(2);
        assert!((report.objective - closed).abs() < 1e-9);
        assert!(report.objective < 1.0);
    }

    #[test]
    fn label_pair_tie_goes_to_second() {
        let w = UtilityVector::new(vec![1.0, 1.0], 2).unwrap();
        let s1 = encode(&[2], 2).unwrap();
        let s2 = encode(&[1], 2).unwrap();
        let p = label_pair(&w, &s1, &s2).unwrap();
        assert_eq!(p.winner, s2);
        let w = UtilityVector::new(vec![3.0, 2.0], 2).unwrap();
        let p = label_pair(&w, &s1, &s2).unwrap();
        assert_eq!((p.winner, p.margin), (s1, 1.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(fit(&[], &FitConfig::default()), Err(Error::InvalidArgument(_))));
        let other = PreferencePair::new(encode(&[2, 1], 2).unwrap(), encode(&[1, 2], 2).unwrap(), 1.0).unwrap();
        assert!(fit(&[unit_pair(), other], &FitConfig::default()).is_err());
        let bad_c = FitConfig { c: 0.0, ..FitConfig::default() };
        assert!(fit(&[unit_pair()], &bad_c).is_err());
        assert!(PreferencePair::new(encode(&[2], 2).unwrap(), encode(&[1], 2).unwrap(), -1.0).is_err());
    }

    #[test]
    fn reports_non_convergence() {
        let cfg = FitConfig { max_iterations: 1, tolerance: 1e-300, ..FitConfig::default() };
        let pairs: Vec<_> = (0..5)
            .map(|i| {
                PreferencePair::new(encode(&[3, 1 + i % 3], 3).unwrap(), encode(&[1, 3 - i % 3], 3).unwrap(), 1.0)
                    .unwrap()
            })
            .collect();
        match fit(&pairs, &cfg) {
            Err(Error::Convergence { iterations: 1, objective }) => assert!(objective.is_finite()),
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn zero_vector_never_returned_with_informative_pair() {
        let w = fit(&[unit_pair()], &FitConfig::default()).unwrap();
        assert!(w.norm() > 0.0);
    }

    proptest! {
        #[test]
        fn isotonic_is_idempotent_and_monotone(x in prop::collection::vec(-10.0f64..10.0, 0..20)) {
            let p = isotonic_project(&x);
            prop_assert!(p.windows(2).all(|w| w[0] >= w[1]));
            prop_assert_eq!(isotonic_project(&p), p.clone());
            // projection preserves the sum
            prop_assert!((p.iter().sum::<f64>() - x.iter().sum::<f64>()).abs() < 1e-9);
        }

        #[test]
        fn label_pair_antisymmetric(w in prop::collection::vec(-5.0f64..5.0, 6), a in prop::collection::vec(1usize..=3, 2), b in prop::collection::vec(1usize..=3, 2)) {
            let w = UtilityVector::new(w, 3).unwrap();
            let s1 = encode(&a, 3).unwrap();
            let s2 = encode(&b, 3).unwrap();
            let u1 = utility(&w, &s1).unwrap();
            let u2 = utility(&w, &s2).unwrap();
            prop_assume!(u1 != u2);
            let p = label_pair(&w, &s1, &s2).unwrap();
            let q = label_pair(&w, &s2, &s1).unwrap();
            prop_assert_eq!(p.winner, q.winner);
        }
    }
}
