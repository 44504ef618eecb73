//! Pseudo-Boolean objectives and the EqualBlocksOneMax benchmark.

use num_bigint::BigUint;

use crate::bits::BitString;
use crate::error::{Error, Result};

/// A pure objective `f: {0,1}^n → ℝ` to be maximized.
pub trait FitnessFunction: Send + Sync {
    fn dimension(&self) -> usize;

    fn evaluate(&self, x: &BitString) -> f64;

    /// Global maximum, when known. The runner uses it to recognize optima.
    fn max_value(&self) -> Option<f64> {
        None
    }

    fn is_optimum(&self, x: &BitString) -> bool {
        self.max_value().is_some_and(|m| self.evaluate(x) == m)
    }
}

/// EqualBlocksOneMax: the number of blocks `(2j-1, 2j)` whose two bits agree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ebom {
    n: usize,
}

const EVEN_BITS: u64 = 0x5555_5555_5555_5555;

impl Ebom {
    pub fn new(n: usize) -> Result<Self> {
        if !n.is_multiple_of(2) {
            return Err(Error::OddDimension(n));
        }
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        Ok(Ebom { n })
    }

    pub fn blocks(&self) -> usize {
        self.n / 2
    }

    /// Number of correct blocks, in `0..=n/2`.
    pub fn value(&self, x: &BitString) -> usize {
        debug_assert_eq!(x.len(), self.n);
        // Blocks never straddle a word boundary since 64 is even; unused tail
        // bits are zero and therefore count as agreeing pairs, hence the
        // subtraction from n/2 instead of counting matches.
        let mismatched: usize = x
            .words()
            .iter()
            .map(|&w| ((w ^ (w >> 1)) & EVEN_BITS).count_ones() as usize)
            .sum();
        self.blocks() - mismatched
    }

    pub fn is_optimal(&self, x: &BitString) -> bool {
        self.value(x) == self.blocks()
    }
}

impl FitnessFunction for Ebom {
    fn dimension(&self) -> usize {
        self.n
    }

    fn evaluate(&self, x: &BitString) -> f64 {
        self.value(x) as f64
    }

    fn max_value(&self) -> Option<f64> {
        Some(self.blocks() as f64)
    }

    fn is_optimum(&self, x: &BitString) -> bool {
        self.is_optimal(x)
    }
}

/// `2^{n/2}`, the number of EBOM optima.
pub fn count_optima(n: usize) -> Result<BigUint> {
    Ebom::new(n)?;
    Ok(BigUint::from(1u8) << (n / 2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn block_counts() {
        let f = Ebom::new(4).unwrap();
        assert_eq!(f.value(&bs("0000")), 2);
        assert_eq!(f.value(&bs("0110")), 0);
        assert_eq!(f.value(&bs("0011")), 2);
        assert_eq!(f.value(&bs("0100")), 1);
    }

    #[test]
    fn optimum_checks() {
        let f = Ebom::new(4).unwrap();
        assert!(f.is_optimal(&bs("1111")));
        assert!(f.is_optimal(&bs("0011")));
        assert!(!f.is_optimal(&bs("0111")));
        assert!(f.is_optimum(&bs("1100")));
    }

    #[test]
    fn odd_dimension_rejected() {
        assert!(matches!(Ebom::new(5), Err(Error::OddDimension(5))));
        assert!(Ebom::new(0).is_err());
        assert!(count_optima(7).is_err());
    }

    #[test]
    fn optimum_count_formula() {
        assert_eq!(count_optima(2).unwrap(), BigUint::from(2u8));
        assert_eq!(count_optima(4).unwrap(), BigUint::from(4u8));
        assert_eq!(count_optima(200).unwrap(), BigUint::from(2u8).pow(100));
    }

    #[test]
    fn enumeration_matches_optimum_count() {
        for n in (2..=16).step_by(2) {
            let f = Ebom::new(n).unwrap();
            let found = (0..1u64 << n)
                .filter(|&i| f.is_optimal(&BitString::from_index(i, n)))
                .count() as u64;
            assert_eq!(found, 1 << (n / 2), "n = {n}");
        }
        let f = Ebom::new(4).unwrap();
        let optima: Vec<String> = (0..16)
            .map(|i| BitString::from_index(i, 4))
            .filter(|x| f.is_optimal(x))
            .map(|x| x.to_string())
            .collect();
        let mut optima = optima;
        optima.sort();
        assert_eq!(optima, ["0000", "0011", "1100", "1111"]);
    }

    #[test]
    fn wide_strings_cross_word_boundary() {
        let f = Ebom::new(130).unwrap();
        let mut x = BitString::zeros(130);
        assert_eq!(f.value(&x), 65);
        x.set(129, true);
        assert_eq!(f.value(&x), 64);
        x.set(128, true);
        assert_eq!(f.value(&x), 65);
    }

    proptest! {
        #[test]
        fn block_flip_properties(bits in prop::collection::vec(any::<bool>(), 1..60usize), j in 0usize..30) {
            let mut bits = bits;
            if bits.len() % 2 == 1 { bits.pop(); }
            prop_assume!(!bits.is_empty());
            let n = bits.len();
            let f = Ebom::new(n).unwrap();
            let x = BitString::from_bools(&bits);
            let v = f.value(&x);
            prop_assert!(v <= n / 2);

            let j = j % (n / 2);
            let mut both = x.clone();
            both.flip(2 * j);
            both.flip(2 * j + 1);
            prop_assert_eq!(f.value(&both), v);

            let mut one = x.clone();
            one.flip(2 * j);
            if x.get(2 * j) == x.get(2 * j + 1) {
                prop_assert_eq!(f.value(&one), v - 1);
            } else {
                prop_assert_eq!(f.value(&one), v + 1);
            }
        }
    }
}
