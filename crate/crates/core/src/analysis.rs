//! How close a learned chain model is to the ideal EBOM model.
//!
//! The ideal model pairs every block `(2j-1, 2j)` adjacently in the chain,
//! gives the first position of each pair the entries `(1/2, 1/2)` and the
//! second `(1/n, 1 − 1/n)`. It samples each of the `2^{n/2}` optima with the
//! same probability, and some optimum with probability `((1 − 1/n)^n)^{1/2}`.

use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::fitness::{Ebom, FitnessFunction as _};
use crate::model::{random_source, ChainModel};

/// Monte Carlo sample count for [`optimum_probability`] on unpaired chains.
pub const MONTE_CARLO_SAMPLES: usize = 100_000;
const MONTE_CARLO_SEED: u64 = 0x005e_ed0f_0be5;

/// True iff consecutive chain pairs are exactly the EBOM blocks (in either
/// order). Takes a 0-based permutation.
pub fn is_correct_permutation(perm: &[usize]) -> bool {
    perm.len().is_multiple_of(2) && perm.chunks_exact(2).all(|pair| pair[0] / 2 == pair[1] / 2)
}

/// The reference model: identity ordering, `(1/2, 1/2)` on odd positions and
/// `(1/n, 1 − 1/n)` on even positions (1-based).
pub fn ideal_model(n: usize) -> Result<ChainModel> {
    Ebom::new(n)?;
    let lo = 1.0 / n as f64;
    let probs = (0..n)
        .map(|i| {
            if i % 2 == 0 {
                [0.5, 0.5]
            } else {
                [lo, 1.0 - lo]
            }
        })
        .collect();
    ChainModel::new((0..n).collect(), probs)
}

pub fn ideal_optimum_probability(n: usize) -> f64 {
    let n_f = n as f64;
    (n_f * (-1.0 / n_f).ln_1p()).exp().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockClass {
    pub central: usize,
    pub border: usize,
}

/// Splits the pair starting at 0-based chain rank `pair_rank` into its central
/// and border position. The border position owns the entry farthest from 1/2;
/// ties among entries are broken uniformly at random.
pub fn classify_block<R: Rng + ?Sized>(
    model: &ChainModel,
    pair_rank: usize,
    rng: &mut R,
) -> Result<BlockClass> {
    if !is_correct_permutation(model.perm()) {
        return Err(Error::IncorrectPermutation);
    }
    if !pair_rank.is_multiple_of(2) || pair_rank + 1 >= model.n() {
        return Err(Error::NotPairStart(pair_rank + 1));
    }
    let pair = [model.perm()[pair_rank], model.perm()[pair_rank + 1]];
    let mut best = f64::NEG_INFINITY;
    let mut owners: Vec<usize> = Vec::with_capacity(4);
    for (k, &pos) in pair.iter().enumerate() {
        for e in model.probs()[pos] {
            let d = (e - 0.5).abs();
            if d > best {
                best = d;
                owners.clear();
                owners.push(k);
            } else if d == best {
                owners.push(k);
            }
        }
    }
    let owner = if owners.iter().all(|&k| k == owners[0]) {
        owners[0]
    } else {
        owners[rng.random_range(0..owners.len())]
    };
    Ok(BlockClass {
        border: pair[owner],
        central: pair[1 - owner],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationSummary {
    pub max: f64,
    pub mean: f64,
    pub min: f64,
}

impl DeviationSummary {
    fn from_values(values: &[f64]) -> Self {
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        // Rounding can push the mean a hair outside [min, max].
        DeviationSummary {
            max,
            mean: mean.clamp(min, max),
            min,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "method")]
pub enum OptimumProbability {
    Exact {
        value: f64,
    },
    MonteCarlo {
        value: f64,
        std_error: f64,
        samples: usize,
    },
}

impl OptimumProbability {
    pub fn value(&self) -> f64 {
        match *self {
            OptimumProbability::Exact { value } => value,
            OptimumProbability::MonteCarlo { value, .. } => value,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, OptimumProbability::Exact { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelQualityReport {
    pub permutation_correct: bool,
    pub blocks: Vec<BlockClass>,
    pub central: Option<DeviationSummary>,
    pub border: Option<DeviationSummary>,
    pub optimum_probability: OptimumProbability,
}

/// Per-pair classification plus central and border deviation aggregates.
///
/// Central entries are measured against 1/2. Border entries conditional on a
/// 0 are measured against `1/n`, those conditional on a 1 against `1 − 1/n`.
pub fn deviation_stats<R: Rng + ?Sized>(
    model: &ChainModel,
    rng: &mut R,
) -> Result<ModelQualityReport> {
    if !is_correct_permutation(model.perm()) {
        return Err(Error::IncorrectPermutation);
    }
    let n = model.n();
    let lo = 1.0 / n as f64;
    let hi = 1.0 - lo;
    let mut blocks = Vec::with_capacity(n / 2);
    let mut central = Vec::with_capacity(n);
    let mut border = Vec::with_capacity(n);
    for rank in (0..n).step_by(2) {
        let class = classify_block(model, rank, rng)?;
        let [c0, c1] = model.probs()[class.central];
        central.push((c0 - 0.5).abs());
        central.push((c1 - 0.5).abs());
        let [b0, b1] = model.probs()[class.border];
        border.push((b0 - lo).abs());
        border.push((b1 - hi).abs());
        blocks.push(class);
    }
    Ok(ModelQualityReport {
        permutation_correct: true,
        blocks,
        central: Some(DeviationSummary::from_values(&central)),
        border: Some(DeviationSummary::from_values(&border)),
        optimum_probability: optimum_probability(model),
    })
}

/// Like [`deviation_stats`], but for any ordering: the deviation fields are
/// `None` when the permutation is not correct.
pub fn assess_model<R: Rng + ?Sized>(model: &ChainModel, rng: &mut R) -> ModelQualityReport {
    match deviation_stats(model, rng) {
        Ok(report) => report,
        Err(_) => ModelQualityReport {
            permutation_correct: false,
            blocks: Vec::new(),
            central: None,
            border: None,
            optimum_probability: optimum_probability(model),
        },
    }
}

/// Probability that one sample of `model` is an EBOM optimum.
///
/// For correctly paired chains every block closes within adjacent ranks, so
/// a forward pass over a two-state distribution (the last sampled bit,
/// restricted to prefixes with all blocks correct) is exact. Other chains
/// fall back to a fixed-seed Monte Carlo estimate.
pub fn optimum_probability(model: &ChainModel) -> OptimumProbability {
    optimum_probability_with(model, &mut random_source(MONTE_CARLO_SEED))
}

pub fn optimum_probability_with<R: Rng + ?Sized>(
    model: &ChainModel,
    rng: &mut R,
) -> OptimumProbability {
    if let Some(value) = exact_optimum_probability(model) {
        return OptimumProbability::Exact { value };
    }
    let samples = MONTE_CARLO_SAMPLES;
    let Ok(f) = Ebom::new(model.n()) else {
        return OptimumProbability::Exact { value: 0.0 };
    };
    let hits = (0..samples)
        .filter(|_| f.is_optimal(&model.sample(rng)))
        .count();
    let value = hits as f64 / samples as f64;
    OptimumProbability::MonteCarlo {
        value,
        std_error: (value * (1.0 - value) / samples as f64).sqrt(),
        samples,
    }
}

fn exact_optimum_probability(model: &ChainModel) -> Option<f64> {
    if !is_correct_permutation(model.perm()) {
        return None;
    }
    let p_bit = |pos: usize, bit: bool, given: bool| {
        let p1 = model.prob(pos, given);
        if bit {
            p1
        } else {
            1.0 - p1
        }
    };
    // mass[b]: probability that all pairs so far are correct and the last bit is b.
    let mut mass = [1.0, 0.0];
    for pair in model.perm().chunks_exact(2) {
        let (lead, follow) = (pair[0], pair[1]);
        let mut next = [0.0; 2];
        for (c, slot) in next.iter_mut().enumerate() {
            let c = c == 1;
            let lead_c: f64 = (0..2)
                .map(|prev| mass[prev] * p_bit(lead, c, prev == 1))
                .sum();
            *slot = lead_c * p_bit(follow, c, c);
        }
        mass = next;
    }
    Some(mass[0] + mass[1])
}

/// Birthday-paradox quantities for `m` uniform draws from `2^{n/2}` optima.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BirthdayBounds {
    /// `ln Pr[all m draws distinct]`, `-inf` when `m > 2^{n/2}`.
    pub log_all_distinct: f64,
    pub all_distinct: f64,
    /// Bernoulli lower bound `1 − m²/2^{n/2}`, floored at 0.
    pub lower_bound: f64,
    /// Estimate `1 − exp(−m²/2^{n/2+1})` of seeing at least one duplicate.
    pub duplicate_estimate: f64,
}

pub fn birthday_bounds(m: u64, n: usize) -> BirthdayBounds {
    let half = (n / 2) as i32;
    let space = 2f64.powi(half);
    let exceeds = if half < 64 { m > 1u64 << half } else { false };
    let log_all_distinct = if exceeds {
        f64::NEG_INFINITY
    } else {
        (0..m).map(|i| (-(i as f64) / space).ln_1p()).sum()
    };
    let m_f = m as f64;
    BirthdayBounds {
        log_all_distinct,
        all_distinct: log_all_distinct.exp(),
        lower_bound: (1.0 - m_f * m_f / space).max(0.0),
        duplicate_estimate: -(-(m_f * m_f) / (2.0 * space)).exp_m1(),
    }
}

/// Optima sampled during one run.
#[derive(Debug, Clone)]
pub struct DistinctOptimaLedger {
    f: Ebom,
    counts: HashMap<BitString, u32>,
    total: u64,
}

impl DistinctOptimaLedger {
    pub fn new(n: usize) -> Result<Self> {
        Ok(DistinctOptimaLedger {
            f: Ebom::new(n)?,
            counts: HashMap::new(),
            total: 0,
        })
    }

    /// Records `optima`; a non-optimal entry rejects the whole batch.
    pub fn update<'a, I>(&mut self, optima: I) -> Result<()>
    where
        I: IntoIterator<Item = &'a BitString>,
        I::IntoIter: Clone,
    {
        let iter = optima.into_iter();
        if iter
            .clone()
            .any(|x| x.len() != self.f.dimension() || !self.f.is_optimal(x))
        {
            return Err(Error::NotOptimum);
        }
        for x in iter {
            *self.counts.entry(x.clone()).or_default() += 1;
            self.total += 1;
        }
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn distinct(&self) -> u64 {
        self.counts.len() as u64
    }

    pub fn duplicates(&self) -> u64 {
        self.total - self.distinct()
    }

    /// Optima sampled exactly once.
    pub fn singletons(&self) -> u64 {
        self.counts.values().filter(|&&c| c == 1).count() as u64
    }

    pub fn summary(&self) -> LedgerSummary {
        LedgerSummary {
            total: self.total(),
            distinct: self.distinct(),
            duplicates: self.duplicates(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct LedgerSummary {
    pub total: u64,
    pub distinct: u64,
    pub duplicates: u64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::random_source;

    fn from_one_based(perm: &[usize]) -> Vec<usize> {
        perm.iter().map(|p| p - 1).collect()
    }

    #[test]
    fn correct_permutations() {
        assert!(is_correct_permutation(&from_one_based(&[1, 2, 3, 4])));
        assert!(is_correct_permutation(&from_one_based(&[2, 1, 4, 3])));
        assert!(!is_correct_permutation(&from_one_based(&[2, 3, 4, 1])));
        assert!(is_correct_permutation(&from_one_based(&[3, 4, 2, 1])));
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for k in 0..=p.len() {
                let mut q = p.clone();
                q.insert(k, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn correct_permutation_count() {
        for (n, expected) in [(2, 2), (4, 8), (6, 48)] {
            let count = permutations(n)
                .iter()
                .filter(|p| is_correct_permutation(p))
                .count();
            assert_eq!(count, expected, "n = {n}");
        }
    }

    fn table_pair(n: usize, central: [f64; 2], border: [f64; 2]) -> ChainModel {
        let mut probs = vec![[0.5, 0.5]; n];
        probs[16] = central;
        probs[17] = border;
        let lo = 1.0 / n as f64;
        for (i, p) in probs.iter_mut().enumerate() {
            if i % 2 == 1 && i != 17 {
                *p = [lo, 1.0 - lo];
            }
        }
        let mut perm: Vec<usize> = (0..n).collect();
        perm.swap(0, 16);
        perm.swap(1, 17);
        ChainModel::new(perm, probs).unwrap()
    }

    #[test]
    fn classify_reported_pair() {
        let m = table_pair(200, [0.662052, 0.662052], [0.005, 0.995]);
        let class = classify_block(&m, 0, &mut random_source(0)).unwrap();
        assert_eq!(class.central + 1, 17);
        assert_eq!(class.border + 1, 18);

        let report = deviation_stats(&m, &mut random_source(0)).unwrap();
        let central = report.central.unwrap();
        assert!((central.max - 0.162052).abs() < 1e-12);
        assert_eq!(report.border.unwrap().max, 0.0);
        assert!(classify_block(&m, 1, &mut random_source(0)).is_err());
    }

    #[test]
    fn four_way_tie_is_fair() {
        let m = ChainModel::new(vec![0, 1], vec![[0.5, 0.5]; 2]).unwrap();
        let mut rng = random_source(1);
        let trials = 100_000;
        let border_first = (0..trials)
            .filter(|_| classify_block(&m, 0, &mut rng).unwrap().border == 0)
            .count();
        let sigma = (trials as f64 * 0.25).sqrt();
        assert!((border_first as f64 - trials as f64 / 2.0).abs() <= 3.0 * sigma);
    }

    #[test]
    fn incorrect_permutation_is_rejected() {
        let m = ChainModel::new(vec![1, 2, 3, 0], vec![[0.5, 0.5]; 4]).unwrap();
        assert!(matches!(
            deviation_stats(&m, &mut random_source(0)),
            Err(Error::IncorrectPermutation)
        ));
        let report = assess_model(&m, &mut random_source(0));
        assert!(!report.permutation_correct);
        assert!(report.central.is_none());
        match report.optimum_probability {
            OptimumProbability::MonteCarlo {
                value,
                std_error,
                samples,
            } => {
                assert_eq!(samples, MONTE_CARLO_SAMPLES);
                assert!((value - 0.25).abs() < 5.0 * std_error);
            }
            other => panic!("expected a Monte Carlo estimate, got {other:?}"),
        }
    }

    #[test]
    fn ideal_model_quantities() {
        let m = ideal_model(4).unwrap();
        assert_eq!(
            optimum_probability(&m),
            OptimumProbability::Exact { value: 0.5625 }
        );
        assert_eq!(ideal_optimum_probability(4), 0.5625);
        let report = deviation_stats(&ideal_model(50).unwrap(), &mut random_source(3)).unwrap();
        assert_eq!(
            report.central.unwrap(),
            DeviationSummary {
                max: 0.0,
                mean: 0.0,
                min: 0.0
            }
        );
        assert_eq!(
            report.border.unwrap(),
            DeviationSummary {
                max: 0.0,
                mean: 0.0,
                min: 0.0
            }
        );

        assert!((ideal_optimum_probability(200) - 0.6057704365).abs() < 1e-9);
        let limit = (-0.5f64).exp();
        let mut last = 0.0;
        for n in [10, 100, 1000] {
            let v = ideal_optimum_probability(n);
            assert!(v < limit && v > last);
            last = v;
        }
        assert!((ideal_optimum_probability(1_000_000) - limit).abs() < 1e-6);
    }

    #[test]
    fn degenerate_all_ones_model() {
        let m = ChainModel::new((0..6).collect(), vec![[1.0, 1.0]; 6]).unwrap();
        assert_eq!(optimum_probability(&m).value(), 1.0);
    }

    #[test]
    fn exact_pass_matches_enumeration() {
        use rand::seq::SliceRandom;
        let mut rng = random_source(21);
        for n in [2usize, 4, 6, 8, 10] {
            let f = Ebom::new(n).unwrap();
            for _ in 0..20 {
                let mut blocks: Vec<usize> = (0..n / 2).collect();
                blocks.shuffle(&mut rng);
                let perm: Vec<usize> = blocks
                    .iter()
                    .flat_map(|&j| {
                        if rng.random::<bool>() {
                            [2 * j, 2 * j + 1]
                        } else {
                            [2 * j + 1, 2 * j]
                        }
                    })
                    .collect();
                let mut probs: Vec<[f64; 2]> =
                    (0..n).map(|_| [rng.random(), rng.random()]).collect();
                probs[perm[0]][1] = probs[perm[0]][0];
                let m = ChainModel::new(perm, probs).unwrap();
                let brute: f64 = (0..1u64 << n)
                    .map(|i| BitString::from_index(i, n))
                    .filter(|y| f.is_optimal(y))
                    .map(|y| m.exact_probability(&y).unwrap())
                    .sum();
                let exact = optimum_probability(&m);
                assert!(exact.is_exact());
                assert!((exact.value() - brute).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn birthday_small_cases() {
        for m in [0, 1] {
            assert_eq!(birthday_bounds(m, 20).all_distinct, 1.0);
        }
        assert_eq!(birthday_bounds(0, 20).duplicate_estimate, 0.0);
        // Two draws from 4 optima: distinct with probability 3/4.
        let b = birthday_bounds(2, 4);
        assert!((b.all_distinct - 0.75).abs() < 1e-15);
        assert_eq!(birthday_bounds(5, 4).all_distinct, 0.0);
        assert!((birthday_bounds(4, 4).all_distinct - 4.0 * 3.0 * 2.0 / 256.0).abs() < 1e-15);
    }

    #[test]
    fn birthday_orderings() {
        for n in (10..=200).step_by(10) {
            for m in [2u64, 10, 100, 1_000, 20_000] {
                let b = birthday_bounds(m, n);
                assert!(b.all_distinct >= b.lower_bound - 1e-12, "m={m} n={n}");
                assert!(b.all_distinct <= 1.0);
                let space = 2f64.powi(n as i32 / 2);
                let dup = -b.log_all_distinct.exp_m1();
                // The estimate uses m² where the exact count has m(m−1)/2
                // pairs, so it only tracks the exact value once m is large.
                if m >= 100 && (m as f64).powi(2) <= space && dup > 0.0 {
                    assert!(
                        (b.duplicate_estimate - dup).abs() <= 0.1 * dup,
                        "m={m} n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn birthday_reported_duplicate_rate() {
        let m = (4.0 / 6.0 * 1.7e4) as u64;
        let b = birthday_bounds(m, 60);
        assert!(
            (b.duplicate_estimate - 0.06).abs() < 0.02,
            "{}",
            b.duplicate_estimate
        );
        let b70 = birthday_bounds(m, 70);
        assert!(b70.duplicate_estimate < 0.01);
    }

    #[test]
    fn ledger_counts() {
        let mut ledger = DistinctOptimaLedger::new(4).unwrap();
        let x: BitString = "0011".parse().unwrap();
        ledger.update([&x, &x]).unwrap();
        assert_eq!(
            ledger.summary(),
            LedgerSummary {
                total: 2,
                distinct: 1,
                duplicates: 1
            }
        );
        assert_eq!(ledger.singletons(), 0);

        let mut ledger = DistinctOptimaLedger::new(4).unwrap();
        let a: BitString = "0000".parse().unwrap();
        let b: BitString = "1100".parse().unwrap();
        ledger.update([&a]).unwrap();
        ledger.update([&b]).unwrap();
        assert_eq!(ledger.duplicates(), 0);
        assert_eq!(ledger.singletons(), 2);

        let bad: BitString = "0100".parse().unwrap();
        assert!(matches!(ledger.update([&bad]), Err(Error::NotOptimum)));
        assert_eq!(ledger.total(), 2);
    }
}
