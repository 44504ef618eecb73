//! Concentration of univariate models on EBOM.
//!
//! If a frequency vector `p` samples an optimum with probability at least
//! `n^{-k}`, its samples stay within Hamming distance `γ ln n` of the rounded
//! vector `z` except with probability at most `n^{-γ/6}`, for every `γ ≥ 4k`.
//! This module computes the quantities involved and checks the bound by
//! Monte Carlo, with an exact Poisson-binomial tail as a cross-check.

use num_bigint::BigUint;
use num_traits::{FromPrimitive, One};
use rand::Rng;
use serde::Serialize;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::model::UnivariateModel;

/// `z_i = ⌊1/2 + p_i⌋`, i.e. 1 iff `p_i ≥ 1/2`.
pub fn round_center(p: &UnivariateModel) -> BitString {
    let bits: Vec<bool> = p
        .freqs()
        .iter()
        .map(|&f| (0.5 + f).floor() >= 1.0)
        .collect();
    BitString::from_bools(&bits)
}

/// Probability that a sample of `p` is an EBOM optimum: the product over
/// blocks of `p_a p_b + (1 − p_a)(1 − p_b)`.
pub fn univariate_optimum_probability(p: &UnivariateModel) -> Result<f64> {
    Ok(log_univariate_optimum_probability(p)?.exp())
}

/// Natural log of [`univariate_optimum_probability`], usable when the
/// probability underflows.
pub fn log_univariate_optimum_probability(p: &UnivariateModel) -> Result<f64> {
    if !p.n().is_multiple_of(2) {
        return Err(Error::OddDimension(p.n()));
    }
    Ok(p.freqs()
        .chunks_exact(2)
        .map(|b| (b[0] * b[1] + (1.0 - b[0]) * (1.0 - b[1])).ln())
        .sum())
}

/// Per-position probability that a sample disagrees with `z`.
fn mismatch_probabilities(p: &UnivariateModel) -> Vec<f64> {
    let z = round_center(p);
    p.freqs()
        .iter()
        .enumerate()
        .map(|(i, &f)| if z.get(i) { 1.0 - f } else { f })
        .collect()
}

/// `‖p − z‖₁`, the expected Hamming distance of a sample to `z`.
pub fn expected_hamming_to_center(p: &UnivariateModel) -> f64 {
    mismatch_probabilities(p).iter().sum()
}

/// Probability mass function of a sum of independent Bernoulli variables.
pub fn poisson_binomial_pmf(success: &[f64]) -> Vec<f64> {
    let mut pmf = vec![0.0; success.len() + 1];
    pmf[0] = 1.0;
    for (t, &s) in success.iter().enumerate() {
        for k in (1..=t + 1).rev() {
            pmf[k] = pmf[k] * (1.0 - s) + pmf[k - 1] * s;
        }
        pmf[0] *= 1.0 - s;
    }
    pmf
}

/// Exact `Pr[d_H(x, z) ≥ threshold]` for `x ~ p`.
pub fn hamming_tail_exact(p: &UnivariateModel, threshold: f64) -> f64 {
    let pmf = poisson_binomial_pmf(&mismatch_probabilities(p));
    let start = threshold.max(0.0).ceil() as usize;
    pmf.iter().skip(start).sum::<f64>().min(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnivariateTheoremReport {
    pub n: usize,
    pub optimum_probability: f64,
    pub log_optimum_probability: f64,
    /// `k` with `Pr[E] = n^{-k}`; infinite when `Pr[E] = 0`.
    pub k_implied: f64,
    pub l1_distance: f64,
    pub expected_hamming: f64,
    pub gamma: f64,
    /// `γ ln n`.
    pub radius: f64,
    pub trials: u64,
    pub tail_empirical: f64,
    pub tail_std_error: f64,
    pub tail_exact: f64,
    /// `n^{-γ/6}`.
    pub tail_bound: f64,
    pub holds: bool,
    /// `γ < 4k`: the bound is not claimed for this γ.
    pub precondition_violated: bool,
    /// `4k ln n ≥ n`: the smallest admissible ball already covers the whole
    /// cube, so the optimum probability is too small for the bound to say
    /// anything.
    pub negligible_optimum: bool,
}

impl UnivariateTheoremReport {
    pub const CSV_HEADER: &'static str = "n,optimum_probability,log_optimum_probability,k_implied,l1_distance,expected_hamming,gamma,radius,trials,tail_empirical,tail_std_error,tail_exact,tail_bound,holds,precondition_violated,negligible_optimum";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.optimum_probability,
            self.log_optimum_probability,
            self.k_implied,
            self.l1_distance,
            self.expected_hamming,
            self.gamma,
            self.radius,
            self.trials,
            self.tail_empirical,
            self.tail_std_error,
            self.tail_exact,
            self.tail_bound,
            self.holds,
            self.precondition_violated,
            self.negligible_optimum
        )
    }
}

/// Estimates `Pr[d_H(x, z) ≥ γ ln n]` over `trials` samples and compares it
/// against `n^{-γ/6}`, allowing three Monte Carlo standard errors of slack.
pub fn verify_tail_bound<R: Rng + ?Sized>(
    p: &UnivariateModel,
    gamma: f64,
    trials: u64,
    rng: &mut R,
) -> Result<UnivariateTheoremReport> {
    Ok(verify_tail_bounds(p, &[gamma], trials, rng)?.remove(0))
}

/// [`verify_tail_bound`] for several `γ` at once, all judged on the same
/// samples.
pub fn verify_tail_bounds<R: Rng + ?Sized>(
    p: &UnivariateModel,
    gammas: &[f64],
    trials: u64,
    rng: &mut R,
) -> Result<Vec<UnivariateTheoremReport>> {
    let n = p.n();
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be positive".into()));
    }
    if gammas.is_empty() || gammas.iter().any(|g| !g.is_finite()) {
        return Err(Error::InvalidParams("gamma must be finite".into()));
    }
    let log_pe = log_univariate_optimum_probability(p)?;
    let ln_n = (n as f64).ln();
    let k_implied = if log_pe == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        (-log_pe / ln_n).max(0.0)
    };

    // The distance to z counts positions where the sample disagrees with z,
    // independently with the mismatch probabilities.
    let mismatch = mismatch_probabilities(p);
    let mut distances = vec![0u64; n + 1];
    for _ in 0..trials {
        let d = mismatch
            .iter()
            .filter(|&&s| rng.random::<f64>() < s)
            .count();
        distances[d] += 1;
    }
    let pmf = poisson_binomial_pmf(&mismatch);
    let l1: f64 = mismatch.iter().sum();

    Ok(gammas
        .iter()
        .map(|&gamma| {
            let radius = gamma * ln_n;
            let start = radius.max(0.0).ceil() as usize;
            let hits: u64 = distances.iter().skip(start).sum();
            let tail_empirical = hits as f64 / trials as f64;
            let tail_std_error = (tail_empirical * (1.0 - tail_empirical) / trials as f64).sqrt();
            let tail_bound = (-(gamma / 6.0) * ln_n).exp().min(1.0);
            UnivariateTheoremReport {
                n,
                optimum_probability: log_pe.exp(),
                log_optimum_probability: log_pe,
                k_implied,
                l1_distance: l1,
                expected_hamming: l1,
                gamma,
                radius,
                trials,
                tail_empirical,
                tail_std_error,
                tail_exact: pmf.iter().skip(start).sum::<f64>().min(1.0),
                tail_bound,
                holds: tail_empirical <= tail_bound + 3.0 * tail_std_error,
                precondition_violated: gamma < 4.0 * k_implied,
                negligible_optimum: 4.0 * k_implied * ln_n >= n as f64,
            }
        })
        .collect())
}

/// A frequency vector that agrees within each block: every block picks a
/// bit value and both of its entries sit within `spread / n` of it. The
/// optimum probability is then at least `(1 − spread/n)^n ≈ e^{-spread}`.
pub fn blockwise_profile<R: Rng + ?Sized>(
    n: usize,
    spread: f64,
    rng: &mut R,
) -> Result<UnivariateModel> {
    if !n.is_multiple_of(2) {
        return Err(Error::OddDimension(n));
    }
    if !(0.0..=n as f64 / 2.0).contains(&spread) {
        return Err(Error::InvalidParams(format!(
            "spread must lie in [0, n/2], got {spread}"
        )));
    }
    let width = spread / n as f64;
    let mut freqs = Vec::with_capacity(n);
    for _ in 0..n / 2 {
        let one = rng.random::<bool>();
        for _ in 0..2 {
            let off = rng.random::<f64>() * width;
            freqs.push(if one { 1.0 - off } else { off });
        }
    }
    UnivariateModel::new(freqs)
}

/// `⌈n^{k ln 4}⌉`: how many optima fit in the Hamming ball of radius
/// `4k ln n`, independent of how many samples are drawn.
pub fn distinct_optima_ceiling(k: f64, n: usize) -> Result<BigUint> {
    if !k.is_finite() || k < 0.0 {
        return Err(Error::InvalidParams(format!(
            "k must be a finite non-negative number, got {k}"
        )));
    }
    if n == 0 {
        return Err(Error::DimensionTooSmall(0));
    }
    let value = (k * 4f64.ln() * (n as f64).ln()).exp();
    if !value.is_finite() {
        return Err(Error::InvalidParams(format!(
            "n^(k ln 4) overflows for k = {k}, n = {n}"
        )));
    }
    Ok(BigUint::from_f64(value.ceil()).unwrap_or_else(BigUint::one))
}
