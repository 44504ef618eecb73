//! Probabilistic models: MIMIC's chain model and the univariate frequency vector.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitString;
use crate::error::{Error, Result};

/// Seedable, portable random stream used everywhere randomness is needed.
pub type RandomSource = ChaCha8Rng;

pub fn random_source(seed: u64) -> RandomSource {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!(
            "probability {p} outside [0, 1]"
        )))
    }
}

pub(crate) fn validate_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::InvalidPermutation(n));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidPermutation(n));
        }
        seen[p] = true;
    }
    Ok(())
}

/// A chain-shaped Bayesian network over the positions.
///
/// `perm[r]` is the position sampled at rank `r` (0-based internally).
/// `probs[i][b]` is the probability of sampling a 1 at position `i` given
/// that the bit at its predecessor in `perm` is `b`. For the first position
/// of the chain both entries coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainModel {
    perm: Vec<usize>,
    probs: Vec<[f64; 2]>,
}

impl ChainModel {
    pub fn new(perm: Vec<usize>, probs: Vec<[f64; 2]>) -> Result<Self> {
        let n = probs.len();
        if n == 0 {
            return Err(Error::DimensionTooSmall(0));
        }
        validate_permutation(&perm, n)?;
        for pair in &probs {
            check_probability(pair[0])?;
            check_probability(pair[1])?;
        }
        let head = probs[perm[0]];
        if head[0] != head[1] {
            return Err(Error::InvalidParams(format!(
                "first chain position {} has unequal entries {:?}",
                perm[0] + 1,
                head
            )));
        }
        Ok(ChainModel { perm, probs })
    }

    /// Like [`ChainModel::new`] with a 1-based permutation.
    pub fn from_one_based(perm: &[usize], probs: Vec<[f64; 2]>) -> Result<Self> {
        let n = probs.len();
        let perm = perm
            .iter()
            .map(|&p| p.checked_sub(1).ok_or(Error::InvalidPermutation(n)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(perm, probs)
    }

    /// Identity ordering with every entry 1/2, i.e. the uniform distribution.
    pub fn initial(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        Ok(ChainModel {
            perm: (0..n).collect(),
            probs: vec![[0.5, 0.5]; n],
        })
    }

    pub fn n(&self) -> usize {
        self.probs.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn perm_one_based(&self) -> Vec<usize> {
        self.perm.iter().map(|p| p + 1).collect()
    }

    pub fn probs(&self) -> &[[f64; 2]] {
        &self.probs
    }

    #[inline]
    pub fn prob(&self, position: usize, given: bool) -> f64 {
        self.probs[position][given as usize]
    }

    /// Draws one bit string, bit by bit in chain order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BitString {
        let mut x = BitString::zeros(self.n());
        // The head has equal entries, so conditioning it on 0 is harmless.
        let mut prev = false;
        for &pos in &self.perm {
            let bit = rng.random::<f64>() < self.probs[pos][prev as usize];
            if bit {
                x.set(pos, true);
            }
            prev = bit;
        }
        x
    }

    /// Probability that [`ChainModel::sample`] returns exactly `y`.
    pub fn exact_probability(&self, y: &BitString) -> Result<f64> {
        if y.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                actual: y.len(),
            });
        }
        let mut prob = 1.0;
        let mut prev = false;
        for &pos in &self.perm {
            let p1 = self.probs[pos][prev as usize];
            let bit = y.get(pos);
            prob *= if bit { p1 } else { 1.0 - p1 };
            prev = bit;
        }
        Ok(prob)
    }

    /// Restricts every entry to `[lo, hi]`; the ordering is unchanged.
    pub fn clamped(&self, lo: f64, hi: f64) -> ChainModel {
        ChainModel {
            perm: self.perm.clone(),
            probs: self
                .probs
                .iter()
                .map(|&[a, b]| [a.max(lo).min(hi), b.max(lo).min(hi)])
                .collect(),
        }
    }

    /// Writes `pi_rank,position,P_given_0,P_given_1` rows in chain order,
    /// with 1-based ranks and positions.
    pub fn write_snapshot<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "pi_rank,position,P_given_0,P_given_1")?;
        for (rank, &pos) in self.perm.iter().enumerate() {
            let [p0, p1] = self.probs[pos];
            writeln!(out, "{},{},{},{}", rank + 1, pos + 1, p0, p1)?;
        }
        Ok(())
    }

    pub fn to_snapshot_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_snapshot(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("snapshot is ASCII")
    }

    pub fn read_snapshot<R: BufRead>(input: R) -> Result<ChainModel> {
        let mut rows = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            let line = line.trim();
            if lineno == 0 || line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::Parse(format!(
                    "snapshot line {}: expected 4 fields",
                    lineno + 1
                )));
            }
            let parse_err =
                |what: &str| Error::Parse(format!("snapshot line {}: bad {what}", lineno + 1));
            let rank: usize = fields[0].parse().map_err(|_| parse_err("pi_rank"))?;
            let pos: usize = fields[1].parse().map_err(|_| parse_err("position"))?;
            let p0: f64 = fields[2].parse().map_err(|_| parse_err("P_given_0"))?;
            let p1: f64 = fields[3].parse().map_err(|_| parse_err("P_given_1"))?;
            rows.push((rank, pos, p0, p1));
        }
        let n = rows.len();
        rows.sort_by_key(|r| r.0);
        if rows.iter().enumerate().any(|(i, r)| r.0 != i + 1) {
            return Err(Error::Parse("snapshot ranks are not 1..=n".into()));
        }
        let mut probs = vec![[0.0; 2]; n];
        let mut perm = Vec::with_capacity(n);
        for (_, pos, p0, p1) in rows {
            if pos == 0 || pos > n {
                return Err(Error::InvalidPermutation(n));
            }
            probs[pos - 1] = [p0, p1];
            perm.push(pos - 1);
        }
        ChainModel::new(perm, probs)
    }
}

/// Frequency vector of a univariate EDA: bit `i` is 1 with probability `p_i`,
/// independently of all other bits.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateModel {
    freqs: Vec<f64>,
}

impl UnivariateModel {
    pub fn new(freqs: Vec<f64>) -> Result<Self> {
        for &p in &freqs {
            check_probability(p)?;
        }
        Ok(UnivariateModel { freqs })
    }

    pub fn uniform(n: usize) -> Self {
        UnivariateModel {
            freqs: vec![0.5; n],
        }
    }

    pub fn n(&self) -> usize {
        self.freqs.len()
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BitString {
        let mut x = BitString::zeros(self.n());
        for (i, &p) in self.freqs.iter().enumerate() {
            if rng.random::<f64>() < p {
                x.set(i, true);
            }
        }
        x
    }

    pub fn exact_probability(&self, y: &BitString) -> Result<f64> {
        if y.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                actual: y.len(),
            });
        }
        Ok(self
            .freqs
            .iter()
            .zip(y.iter())
            .map(|(&p, b)| if b { p } else { 1.0 - p })
            .product())
    }
}
