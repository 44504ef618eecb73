//! One MIMIC iteration: sample, truncate, rebuild the chain, clamp.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::fitness::FitnessFunction;
use crate::model::ChainModel;
use crate::statistics::{ColumnCounts, Population};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MimicParams {
    pub n: usize,
    pub lambda: usize,
    pub mu: usize,
}

impl MimicParams {
    pub fn new(n: usize, lambda: usize, mu: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        if mu == 0 || lambda == 0 {
            return Err(Error::InvalidParams(
                "lambda and mu must be positive".into(),
            ));
        }
        if mu > lambda {
            return Err(Error::InvalidParams(format!(
                "mu = {mu} exceeds lambda = {lambda}"
            )));
        }
        Ok(MimicParams { n, lambda, mu })
    }

    /// `λ = ⌊factor·n·ln n⌋`, `μ = ⌊λ/divisor⌋`.
    pub fn scaled(n: usize, lambda_factor: f64, mu_divisor: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        let lambda = (lambda_factor * n as f64 * (n as f64).ln()).floor() as usize;
        let mu = (lambda as f64 / mu_divisor).floor() as usize;
        Self::new(n, lambda, mu)
    }

    /// The tuned setting `λ = ⌊12 n ln n⌋`, `μ = ⌊λ/8⌋`.
    pub fn tuned(n: usize) -> Result<Self> {
        Self::scaled(n, 12.0, 8.0)
    }

    pub fn clamp_lo(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn clamp_hi(&self) -> f64 {
        1.0 - 1.0 / self.n as f64
    }
}

/// Keeps the `mu` fittest members; members tied at the cutoff are chosen
/// uniformly at random. Uses cached fitness when the population has it.
pub fn truncation_select<F, R>(
    offspring: &Population,
    f: &F,
    mu: usize,
    rng: &mut R,
) -> Result<Population>
where
    F: FitnessFunction + ?Sized,
    R: Rng + ?Sized,
{
    if mu > offspring.len() {
        return Err(Error::SelectionTooLarge {
            mu,
            size: offspring.len(),
        });
    }
    let fitness: Vec<f64> = match offspring.fitness() {
        Some(cached) => cached.to_vec(),
        None => offspring.members().iter().map(|x| f.evaluate(x)).collect(),
    };
    let mut order: Vec<usize> = (0..offspring.len()).collect();
    order.shuffle(rng);
    // Stable sort keeps the shuffled order within equal-fitness groups.
    order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]));
    order.truncate(mu);

    let members = order
        .iter()
        .map(|&i| offspring.members()[i].clone())
        .collect();
    let fit = order.iter().map(|&i| fitness[i]).collect();
    Population::with_fitness(members, fit)
}

/// Positions in `candidates` attaining the minimum of `score`, compared with
/// exact equality.
fn argmin_ties(candidates: &[usize], mut score: impl FnMut(usize) -> f64) -> Vec<usize> {
    let mut best = f64::INFINITY;
    let mut ties = Vec::new();
    for &i in candidates {
        let h = score(i);
        if h < best {
            best = h;
            ties.clear();
            ties.push(i);
        } else if h == best {
            ties.push(i);
        }
    }
    ties
}

fn pick<R: Rng + ?Sized>(ties: &[usize], rng: &mut R) -> usize {
    if ties.len() == 1 {
        ties[0]
    } else {
        ties[rng.random_range(0..ties.len())]
    }
}

/// Builds the unclamped chain greedily from the selected population.
pub fn build_chain<R: Rng + ?Sized>(selected: &Population, rng: &mut R) -> Result<ChainModel> {
    if selected.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let n = selected.n();
    let cols = ColumnCounts::new(selected);
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut perm = Vec::with_capacity(n);
    let mut probs = vec![[0.0; 2]; n];

    let head = pick(&argmin_ties(&remaining, |i| cols.entropy(i)), rng);
    remaining.retain(|&i| i != head);
    let f1 = cols.freq_one(head);
    probs[head] = [f1, f1];
    perm.push(head);

    let mut prev = head;
    while !remaining.is_empty() {
        let next = pick(
            &argmin_ties(&remaining, |i| cols.cond_entropy(i, prev)),
            rng,
        );
        remaining.retain(|&i| i != next);
        probs[next] = [
            cols.cond_freq_one(next, prev, false),
            cols.cond_freq_one(next, prev, true),
        ];
        perm.push(next);
        prev = next;
    }
    ChainModel::new(perm, probs)
}

/// Greedy entropy chain followed by the `[1/n, 1 − 1/n]` restriction.
pub fn build_model<R: Rng + ?Sized>(
    selected: &Population,
    params: &MimicParams,
    rng: &mut R,
) -> Result<ChainModel> {
    if !selected.is_empty() && selected.n() != params.n {
        return Err(Error::LengthMismatch {
            expected: params.n,
            actual: selected.n(),
        });
    }
    Ok(clamp(&build_chain(selected, rng)?, params.n))
}

pub fn clamp(model: &ChainModel, n: usize) -> ChainModel {
    let lo = 1.0 / n as f64;
    model.clamped(lo, 1.0 - lo)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationStats {
    /// Offspring that are optima, with multiplicity, in sampling order.
    pub optima: Vec<BitString>,
    pub best_fitness: f64,
}

impl IterationStats {
    pub fn optimum_count(&self) -> usize {
        self.optima.len()
    }
}

#[derive(Debug, Clone)]
pub struct Iteration {
    pub model: ChainModel,
    pub selected: Population,
    pub stats: IterationStats,
}

/// Samples `λ` offspring from `model`, keeps the best `μ` and rebuilds the
/// model from them.
pub fn mimic_iteration<F, R>(
    model: &ChainModel,
    f: &F,
    params: &MimicParams,
    rng: &mut R,
) -> Result<Iteration>
where
    F: FitnessFunction + ?Sized,
    R: Rng + ?Sized,
{
    if model.n() != params.n || f.dimension() != params.n {
        return Err(Error::LengthMismatch {
            expected: params.n,
            actual: if model.n() != params.n {
                model.n()
            } else {
                f.dimension()
            },
        });
    }
    let mut members = Vec::with_capacity(params.lambda);
    let mut fitness = Vec::with_capacity(params.lambda);
    let mut optima = Vec::new();
    let mut best_fitness = f64::NEG_INFINITY;
    for _ in 0..params.lambda {
        let x = model.sample(rng);
        let v = f.evaluate(&x);
        if f.is_optimum(&x) {
            optima.push(x.clone());
        }
        best_fitness = best_fitness.max(v);
        members.push(x);
        fitness.push(v);
    }
    let offspring = Population::with_fitness(members, fitness)?;
    let selected = truncation_select(&offspring, f, params.mu, rng)?;
    let model = build_model(&selected, params, rng)?;
    Ok(Iteration {
        model,
        selected,
        stats: IterationStats {
            optima,
            best_fitness,
        },
    })
}
