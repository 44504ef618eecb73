//! Empirical frequencies and entropies over populations of bit strings.
//!
//! All statistics are computed from integer counts that are divided once.
//! The row-wise functions on [`Population`] and the column-wise
//! [`ColumnCounts`] used by the model builder share the same count-level
//! formulas, so both produce bit-identical floating-point values.

use crate::bits::BitString;
use crate::error::{Error, Result};

/// An ordered multiset of equal-length bit strings, optionally with cached
/// fitness values.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    members: Vec<BitString>,
    fitness: Option<Vec<f64>>,
    n: usize,
}

impl Population {
    pub fn new(members: Vec<BitString>) -> Result<Self> {
        let n = members
            .first()
            .map(BitString::len)
            .ok_or(Error::EmptyPopulation)?;
        if let Some(bad) = members.iter().find(|m| m.len() != n) {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: bad.len(),
            });
        }
        Ok(Population {
            members,
            fitness: None,
            n,
        })
    }

    pub fn with_fitness(members: Vec<BitString>, fitness: Vec<f64>) -> Result<Self> {
        if fitness.len() != members.len() {
            return Err(Error::LengthMismatch {
                expected: members.len(),
                actual: fitness.len(),
            });
        }
        let mut pop = Population::new(members)?;
        pop.fitness = Some(fitness);
        Ok(pop)
    }

    /// Parses members from `0`/`1` strings, mostly for tests and examples.
    pub fn parse(members: &[&str]) -> Result<Self> {
        Population::new(
            members
                .iter()
                .map(|s| s.parse())
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[BitString] {
        &self.members
    }

    pub fn fitness(&self) -> Option<&[f64]> {
        self.fitness.as_deref()
    }

    pub fn into_members(self) -> Vec<BitString> {
        self.members
    }

    fn check_position(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::PositionOutOfRange(i, self.n))
        }
    }

    fn count_bit(&self, i: usize, b: bool) -> usize {
        self.members.iter().filter(|x| x.get(i) == b).count()
    }

    fn count_pair(&self, i: usize, b1: bool, j: usize, b2: bool) -> usize {
        self.members
            .iter()
            .filter(|x| x.get(i) == b1 && x.get(j) == b2)
            .count()
    }

    fn pair_table(&self, i: usize, j: usize) -> [[usize; 2]; 2] {
        let mut table = [[0usize; 2]; 2];
        for x in &self.members {
            table[x.get(i) as usize][x.get(j) as usize] += 1;
        }
        table
    }
}

/// `−p·log2(p)` with the convention `0·log2(0) = 0`.
#[inline]
fn plogp(p: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Entropy of a position with `ones` ones among `total` members.
#[inline]
pub fn entropy_from_counts(ones: usize, total: usize) -> f64 {
    let f1 = ones as f64 / total as f64;
    let f0 = (total - ones) as f64 / total as f64;
    plogp(f0) + plogp(f1)
}

/// Conditional frequency from a joint count and the count of the condition;
/// an impossible condition yields 1/2.
#[inline]
pub fn cond_freq_from_counts(joint: usize, condition: usize) -> f64 {
    if condition == 0 {
        0.5
    } else {
        joint as f64 / condition as f64
    }
}

/// Conditional entropy from the contingency table `table[b1][b2]`, where `b1`
/// is the target bit and `b2` the conditioning bit.
#[inline]
pub fn cond_entropy_from_counts(table: [[usize; 2]; 2], total: usize) -> f64 {
    let mut h = 0.0;
    for b2 in 0..2 {
        let cond = table[0][b2] + table[1][b2];
        let weight = cond as f64 / total as f64;
        for row in &table {
            let cf = cond_freq_from_counts(row[b2], cond);
            if cf != 0.0 {
                h -= cf * weight * cf.log2();
            }
        }
    }
    h
}

/// Frequency of bit `b` at position `i`.
pub fn freq(s: &Population, i: usize, b: bool) -> Result<f64> {
    s.check_position(i)?;
    Ok(s.count_bit(i, b) as f64 / s.len() as f64)
}

/// Frequency of `b1` at position `i` among members with `b2` at position `j`.
pub fn cond_freq(s: &Population, i: usize, j: usize, b1: bool, b2: bool) -> Result<f64> {
    s.check_position(i)?;
    s.check_position(j)?;
    if i == j {
        return Err(Error::SamePosition(i));
    }
    Ok(cond_freq_from_counts(
        s.count_pair(i, b1, j, b2),
        s.count_bit(j, b2),
    ))
}

pub fn entropy(s: &Population, i: usize) -> Result<f64> {
    s.check_position(i)?;
    Ok(entropy_from_counts(s.count_bit(i, true), s.len()))
}

/// Entropy at position `i` conditional on position `j`.
pub fn cond_entropy(s: &Population, i: usize, j: usize) -> Result<f64> {
    s.check_position(i)?;
    s.check_position(j)?;
    if i == j {
        return Err(Error::SamePosition(i));
    }
    Ok(cond_entropy_from_counts(s.pair_table(i, j), s.len()))
}

/// Transposed view of a population: one bitset over members per position.
/// Joint counts become word-wise AND plus popcount.
#[derive(Debug, Clone)]
pub struct ColumnCounts {
    columns: Vec<Vec<u64>>,
    ones: Vec<usize>,
    total: usize,
}

impl ColumnCounts {
    pub fn new(s: &Population) -> Self {
        let total = s.len();
        let words = total.div_ceil(64);
        let mut columns = vec![vec![0u64; words]; s.n()];
        for (m, x) in s.members().iter().enumerate() {
            let (w, bit) = (m / 64, 1u64 << (m % 64));
            for (wi, &word) in x.words().iter().enumerate() {
                let mut word = word;
                while word != 0 {
                    let t = word.trailing_zeros() as usize;
                    columns[wi * 64 + t][w] |= bit;
                    word &= word - 1;
                }
            }
        }
        let ones = columns
            .iter()
            .map(|c| c.iter().map(|w| w.count_ones() as usize).sum())
            .collect();
        ColumnCounts {
            columns,
            ones,
            total,
        }
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn ones(&self, i: usize) -> usize {
        self.ones[i]
    }

    pub fn joint_ones(&self, i: usize, j: usize) -> usize {
        self.columns[i]
            .iter()
            .zip(&self.columns[j])
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Contingency table `[b_i][b_j]`.
    pub fn pair_table(&self, i: usize, j: usize) -> [[usize; 2]; 2] {
        let n11 = self.joint_ones(i, j);
        let n10 = self.ones[i] - n11;
        let n01 = self.ones[j] - n11;
        let n00 = self.total - n11 - n10 - n01;
        [[n00, n01], [n10, n11]]
    }

    pub fn entropy(&self, i: usize) -> f64 {
        entropy_from_counts(self.ones[i], self.total)
    }

    pub fn cond_entropy(&self, i: usize, j: usize) -> f64 {
        cond_entropy_from_counts(self.pair_table(i, j), self.total)
    }

    pub fn freq_one(&self, i: usize) -> f64 {
        self.ones[i] as f64 / self.total as f64
    }

    /// Probability of a 1 at `i` given bit `b` at `j`.
    pub fn cond_freq_one(&self, i: usize, j: usize, b: bool) -> f64 {
        let table = self.pair_table(i, j);
        let b = b as usize;
        cond_freq_from_counts(table[1][b], table[0][b] + table[1][b])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::random_source;
    use proptest::prelude::*;
    use rand::Rng;

    fn pop(members: &[&str]) -> Population {
        Population::parse(members).unwrap()
    }

    #[test]
    fn frequencies() {
        assert_eq!(freq(&pop(&["11", "11", "11"]), 0, true).unwrap(), 1.0);
        assert_eq!(freq(&pop(&["10", "01"]), 0, true).unwrap(), 0.5);
        assert_eq!(
            freq(&pop(&["110", "100", "000", "010"]), 1, true).unwrap(),
            0.5
        );
        assert!(matches!(
            Population::new(vec![]),
            Err(Error::EmptyPopulation)
        ));
        assert!(Population::parse(&["10", "101"]).is_err());
        assert!(freq(&pop(&["10"]), 2, true).is_err());
    }

    #[test]
    fn conditional_frequencies() {
        assert_eq!(
            cond_freq(&pop(&["11", "11"]), 0, 1, true, false).unwrap(),
            0.5
        );
        assert_eq!(
            cond_freq(&pop(&["11", "10", "01", "00"]), 0, 1, true, true).unwrap(),
            0.5
        );
        let v = cond_freq(&pop(&["11", "11", "01", "00"]), 0, 1, true, true).unwrap();
        assert_eq!(v, 2.0 / 3.0);
        assert!(matches!(
            cond_freq(&pop(&["11"]), 1, 1, true, true),
            Err(Error::SamePosition(1))
        ));
    }

    #[test]
    fn entropies() {
        assert_eq!(entropy(&pop(&["10", "11", "10"]), 0).unwrap(), 0.0);
        assert_eq!(entropy(&pop(&["10", "01"]), 0).unwrap(), 1.0);
        let h = entropy(&pop(&["1", "0", "0", "0"]), 0).unwrap();
        let expected = -0.25 * 0.25f64.log2() - 0.75 * 0.75f64.log2();
        assert!((h - expected).abs() < 1e-15);
        assert!((h - 0.811278).abs() < 1e-6);
    }

    #[test]
    fn conditional_entropies() {
        assert_eq!(cond_entropy(&pop(&["11", "00", "11"]), 0, 1).unwrap(), 0.0);
        let s = pop(&["11", "10", "01", "00"]);
        assert_eq!(cond_entropy(&s, 0, 1).unwrap(), 1.0);
        assert_eq!(cond_entropy(&s, 1, 0).unwrap(), 1.0);
        assert!(cond_entropy(&s, 0, 0).is_err());
    }

    fn random_population(rng: &mut impl Rng, n: usize, size: usize) -> Population {
        let members = (0..size)
            .map(|_| {
                let bits: Vec<bool> = (0..n).map(|_| rng.random()).collect();
                BitString::from_bools(&bits)
            })
            .collect();
        Population::new(members).unwrap()
    }

    #[test]
    fn conditioning_never_increases_entropy() {
        let mut rng = random_source(7);
        for _ in 0..1000 {
            let n = rng.random_range(2..=6);
            let size = rng.random_range(1..=8);
            let s = random_population(&mut rng, n, size);
            for i in 0..n {
                let h = entropy(&s, i).unwrap();
                assert!((0.0..=1.0).contains(&h));
                for j in (0..n).filter(|&j| j != i) {
                    let hc = cond_entropy(&s, i, j).unwrap();
                    assert!(hc <= h + 1e-12, "{hc} > {h}");
                    assert!((0.0..=1.0 + 1e-12).contains(&hc));
                }
            }
        }
    }

    #[test]
    fn column_view_is_bit_identical() {
        let mut rng = random_source(8);
        for _ in 0..50 {
            let n = rng.random_range(2..=70);
            let size = rng.random_range(1..=150);
            let s = random_population(&mut rng, n, size);
            let cols = ColumnCounts::new(&s);
            for i in 0..n {
                assert_eq!(cols.entropy(i).to_bits(), entropy(&s, i).unwrap().to_bits());
                assert_eq!(cols.freq_one(i), freq(&s, i, true).unwrap());
                let j = (i + 1 + rng.random_range(0..n - 1)) % n;
                assert_eq!(
                    cols.cond_entropy(i, j).to_bits(),
                    cond_entropy(&s, i, j).unwrap().to_bits()
                );
                for b in [false, true] {
                    assert_eq!(
                        cols.cond_freq_one(i, j, b),
                        cond_freq(&s, i, j, true, b).unwrap()
                    );
                }
            }
        }
    }

    proptest! {
        #[test]
        fn complementary_frequencies_and_order_invariance(
            rows in prop::collection::vec(prop::collection::vec(any::<bool>(), 4), 1..12),
            seed in any::<u64>(),
        ) {
            let members: Vec<BitString> = rows.iter().map(|r| BitString::from_bools(r)).collect();
            let s = Population::new(members.clone()).unwrap();
            let mut shuffled = members;
            use rand::seq::SliceRandom;
            shuffled.shuffle(&mut random_source(seed));
            let t = Population::new(shuffled).unwrap();
            for i in 0..4 {
                prop_assert_eq!(freq(&s, i, false).unwrap() + freq(&s, i, true).unwrap(), 1.0);
                prop_assert_eq!(entropy(&s, i).unwrap().to_bits(), entropy(&t, i).unwrap().to_bits());
                for j in (0..4).filter(|&j| j != i) {
                    prop_assert_eq!(
                        cond_entropy(&s, i, j).unwrap().to_bits(),
                        cond_entropy(&t, i, j).unwrap().to_bits()
                    );
                    for b2 in [false, true] {
                        if freq(&s, j, b2).unwrap() > 0.0 {
                            let sum = cond_freq(&s, i, j, false, b2).unwrap()
                                + cond_freq(&s, i, j, true, b2).unwrap();
                            prop_assert!((sum - 1.0).abs() < 1e-15);
                        }
                    }
                }
            }
        }
    }
}
