//! Ground truth, preference-pair sampling and noise injection.

use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::decomposition::hamming;
use crate::encoding::{encode, encode_grade_free, utility, Encoding, UtilityVector};
use crate::error::{invalid, Result};
use crate::learner::PreferencePair;
use crate::sim::config::{ExperimentConfig, GroundTruthSpec, Model, PairMode};

/// `w[k][i] = G(L - i) / log(k + 1)`, best grade first in each block.
pub fn make_ground_truth(spec: &GroundTruthSpec) -> UtilityVector {
    let levels = spec.levels;
    let weights = (1..=spec.positions)
        .flat_map(|k| {
            let discount = true_discount(spec, k);
            (0..levels).map(move |i| spec.profile.gain(levels - i) * discount)
        })
        .collect();
    UtilityVector::new(weights, levels).expect("positive dimensions")
}

/// `1 / log(k + 1)` for 1-based position `k`.
pub fn true_discount(spec: &GroundTruthSpec, k: usize) -> f64 {
    spec.log_base.ln() / ((k + 1) as f64).ln()
}

/// Ground truth over the document-identity encoding of a fixed document set:
/// `w[k][d] = G(grade of d) / log(k + 1)`.
pub fn make_grade_free_truth(spec: &GroundTruthSpec, doc_grades: &[usize]) -> UtilityVector {
    let weights = (1..=doc_grades.len())
        .flat_map(|k| {
            let discount = true_discount(spec, k);
            doc_grades.iter().map(move |&g| spec.profile.gain(g) * discount)
        })
        .collect();
    UtilityVector::new(weights, doc_grades.len()).expect("non-empty document set")
}

/// Two ranked lists, the preferred one first. Entries are grades for graded
/// models and document indices for the grade-free model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListPair {
    pub winner: Vec<usize>,
    pub loser: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SampledPairs {
    pub train: Vec<ListPair>,
    pub validation: Vec<ListPair>,
    pub test: Vec<ListPair>,
}

/// Encodes lists and evaluates the ground truth for one experiment.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub truth: UtilityVector,
    model: Model,
    levels: usize,
    positions: usize,
    base_list: Vec<usize>,
}

impl Oracle {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        let truth = match cfg.model {
            Model::GradeFree => make_grade_free_truth(&cfg.truth, &cfg.base_list),
            _ => make_ground_truth(&cfg.truth),
        };
        Self {
            truth,
            model: cfg.model,
            levels: cfg.truth.levels,
            positions: cfg.truth.positions,
            base_list: cfg.base_list.clone(),
        }
    }

    pub fn encode(&self, list: &[usize]) -> Result<Encoding> {
        match self.model {
            Model::GradeFree => encode_grade_free(list),
            _ => encode(list, self.levels),
        }
    }

    /// Orders `(a, b)` by the ground truth; `a` wins only on a strictly higher utility.
    pub fn label(&self, a: Vec<usize>, b: Vec<usize>) -> Result<ListPair> {
        let ua = utility(&self.truth, &self.encode(&a)?)?;
        let ub = utility(&self.truth, &self.encode(&b)?)?;
        Ok(if ua > ub { ListPair { winner: a, loser: b } } else { ListPair { winner: b, loser: a } })
    }

    /// A uniformly random list in the model's representation.
    pub fn random_list<R: Rng>(&self, rng: &mut R) -> Vec<usize> {
        match self.model {
            Model::GradeFree => {
                let mut docs: Vec<usize> = (0..self.positions).collect();
                docs.shuffle(rng);
                docs
            }
            _ => {
                let mut grades = self.base_list.clone();
                grades.shuffle(rng);
                grades.truncate(self.positions);
                grades
            }
        }
    }

    /// The list sorted by non-increasing grade.
    pub fn optimal_list(&self) -> Vec<usize> {
        match self.model {
            Model::GradeFree => {
                let mut docs: Vec<usize> = (0..self.positions).collect();
                docs.sort_by(|&a, &b| self.base_list[b].cmp(&self.base_list[a]));
                docs
            }
            _ => {
                let mut grades = self.base_list.clone();
                grades.sort_by(|a, b| b.cmp(a));
                grades.truncate(self.positions);
                grades
            }
        }
    }

    /// Uniform grades whose multiset differs from the base list.
    pub fn different_list<R: Rng>(&self, rng: &mut R) -> Vec<usize> {
        let mut base_sorted = self.base_list.clone();
        base_sorted.sort_unstable();
        loop {
            let grades: Vec<usize> = (0..self.base_list.len()).map(|_| rng.gen_range(1..=self.levels)).collect();
            let mut sorted = grades.clone();
            sorted.sort_unstable();
            if sorted != base_sorted {
                return grades[..self.positions].to_vec();
            }
        }
    }

    fn draw<R: Rng>(&self, mode: PairMode, n: usize, rng: &mut R) -> Result<Vec<ListPair>> {
        (0..n)
            .map(|_| {
                let (a, b) = match mode {
                    PairMode::General => (self.random_list(rng), self.random_list(rng)),
                    PairMode::OptimalSameList => (self.optimal_list(), self.random_list(rng)),
                    PairMode::OptimalDifferentLists => (self.optimal_list(), self.different_list(rng)),
                };
                self.label(a, b)
            })
            .collect()
    }

    /// Converts labeled lists into preference pairs for `model`.
    pub fn to_preference_pairs(&self, lists: &[ListPair]) -> Result<Vec<PreferencePair>> {
        lists
            .iter()
            .map(|p| {
                let margin = match self.model {
                    Model::HammingMargin => hamming(&p.winner, &p.loser)? as f64,
                    _ => 1.0,
                };
                PreferencePair::new(self.encode(&p.winner)?, self.encode(&p.loser)?, margin)
            })
            .collect()
    }
}

/// Draws `n_train` training pairs in the configured pair mode. Validation and
/// test pairs are always general pairs. Draws are independent, so the same
/// ranking may appear in several sets.
pub fn sample_pairs<R: Rng>(cfg: &ExperimentConfig, n_train: usize, rng: &mut R) -> Result<SampledPairs> {
    let oracle = Oracle::new(cfg);
    Ok(SampledPairs {
        train: oracle.draw(cfg.pair_mode, n_train, rng)?,
        validation: oracle.draw(PairMode::General, cfg.validation_pairs, rng)?,
        test: oracle.draw(PairMode::General, cfg.test_pairs, rng)?,
    })
}

/// Swaps winner and loser of the pairs at `indices`.
pub fn flip_pairs(pairs: &mut [PreferencePair], indices: &[usize]) {
    for &i in indices {
        let p = &mut pairs[i];
        std::mem::swap(&mut p.winner, &mut p.loser);
    }
}

/// Reverses `m` distinct, uniformly chosen pairs. Returns the flipped indices.
pub fn inject_pair_noise<R: Rng>(pairs: &mut [PreferencePair], m: usize, rng: &mut R) -> Result<Vec<usize>> {
    if m > pairs.len() {
        return Err(invalid(format!("cannot flip {m} of {} pairs", pairs.len())));
    }
    let mut chosen = index::sample(rng, pairs.len(), m).into_vec();
    chosen.sort_unstable();
    flip_pairs(pairs, &chosen);
    Ok(chosen)
}

/// Gives `m` distinct, uniformly chosen list slots a different uniform grade.
/// Pair labels are left as they were.
pub fn inject_grade_noise<R: Rng>(lists: &mut [ListPair], m: usize, levels: usize, rng: &mut R) -> Result<()> {
    if levels < 2 {
        return Err(invalid("grade noise needs at least two levels"));
    }
    let mut slots: Vec<&mut usize> =
        lists.iter_mut().flat_map(|p| p.winner.iter_mut().chain(p.loser.iter_mut())).collect();
    if m > slots.len() {
        return Err(invalid(format!("cannot corrupt {m} of {} grades", slots.len())));
    }
    for i in index::sample(rng, slots.len(), m) {
        let old = *slots[i];
        // uniform over the other levels
        let pick = rng.gen_range(1..levels);
        *slots[i] = if pick >= old { pick + 1 } else { pick };
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::config::GainProfile;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ground_truth_values() {
        let spec = GroundTruthSpec::default();
        let w = make_ground_truth(&spec);
        // position 1, grade 3 sits at index L - 3 = 2 of the first block
        assert!((w.as_slice()[2] - 3.0 / 2f64.ln()).abs() < 1e-12);
        assert!((w.as_slice()[2] - 4.328085122666891).abs() < 1e-12);

        let spec2 = GroundTruthSpec { profile: GainProfile::Exponential, ..spec };
        let w2 = make_ground_truth(&spec2);
        for (k, block) in w2.blocks().enumerate() {
            assert!((block[4] - 1.0 / ((k + 2) as f64).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn ground_truth_is_strictly_monotone() {
        for profile in [GainProfile::Linear, GainProfile::Exponential] {
            let w = make_ground_truth(&GroundTruthSpec { profile, ..GroundTruthSpec::default() });
            for block in w.blocks() {
                assert!(block.windows(2).all(|p| p[0] > p[1]));
                assert_eq!(crate::learner::isotonic_project(block), block.to_vec());
            }
        }
    }

    #[test]
    fn optimal_same_list_always_wins() {
        let cfg = ExperimentConfig { pair_mode: PairMode::OptimalSameList, ..ExperimentConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sampled = sample_pairs(&cfg, 300, &mut rng).unwrap();
        let optimal = Oracle::new(&cfg).optimal_list();
        assert!(sampled.train.iter().all(|p| p.winner == optimal));
    }

    #[test]
    fn empty_training_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sampled = sample_pairs(&ExperimentConfig::default(), 0, &mut rng).unwrap();
        assert!(sampled.train.is_empty());
        assert_eq!(sampled.test.len(), 1000);
    }

    #[test]
    fn general_pairs_respect_labeling_rule() {
        let cfg = ExperimentConfig::default();
        let oracle = Oracle::new(&cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sampled = sample_pairs(&cfg, 1000, &mut rng).unwrap();
        for p in &sampled.train {
            let uw = utility(&oracle.truth, &oracle.encode(&p.winner).unwrap()).unwrap();
            let ul = utility(&oracle.truth, &oracle.encode(&p.loser).unwrap()).unwrap();
            assert!(uw >= ul);
        }
    }

    #[test]
    fn different_lists_change_the_multiset() {
        let cfg = ExperimentConfig { pair_mode: PairMode::OptimalDifferentLists, ..ExperimentConfig::default() };
        let oracle = Oracle::new(&cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let mut l = oracle.different_list(&mut rng);
            l.sort_unstable();
            assert_ne!(l, vec![1, 1, 2, 2, 3, 3, 4, 4, 5, 5]);
        }
    }

    fn pairs(n: usize) -> Vec<PreferencePair> {
        let cfg = ExperimentConfig::default();
        let oracle = Oracle::new(&cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = sample_pairs(&cfg, n, &mut rng).unwrap();
        oracle.to_preference_pairs(&s.train).unwrap()
    }

    #[test]
    fn pair_noise_edge_cases() {
        let original = pairs(50);
        let mut rng = ChaCha8Rng::seed_from_u64(3);

        let mut unchanged = original.clone();
        assert!(inject_pair_noise(&mut unchanged, 0, &mut rng).unwrap().is_empty());
        assert_eq!(unchanged, original);

        let mut all = original.clone();
        inject_pair_noise(&mut all, 50, &mut rng).unwrap();
        assert!(all.iter().zip(&original).all(|(a, b)| a.winner == b.loser && a.loser == b.winner));

        let mut twice = original.clone();
        let idx = inject_pair_noise(&mut twice, 17, &mut rng).unwrap();
        assert_eq!(idx.len(), 17);
        flip_pairs(&mut twice, &idx);
        assert_eq!(twice, original);

        assert!(inject_pair_noise(&mut twice, 51, &mut rng).is_err());
    }

    #[test]
    fn grade_noise_changes_exactly_m_slots() {
        let cfg = ExperimentConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let original = sample_pairs(&cfg, 30, &mut rng).unwrap().train;

        let mut same = original.clone();
        inject_grade_noise(&mut same, 0, 5, &mut rng).unwrap();
        assert_eq!(same, original);

        for m in [1, 40, 600] {
            let mut noisy = original.clone();
            inject_grade_noise(&mut noisy, m, 5, &mut rng).unwrap();
            let changed: usize = noisy
                .iter()
                .zip(&original)
                .map(|(a, b)| hamming(&a.winner, &b.winner).unwrap() + hamming(&a.loser, &b.loser).unwrap())
                .sum();
            assert_eq!(changed, m);
            assert!(noisy.iter().flat_map(|p| p.winner.iter().chain(&p.loser)).all(|&g| (1..=5).contains(&g)));
        }
        assert!(inject_grade_noise(&mut same, 601, 5, &mut rng).is_err());
    }
}
