//! Ordered semirings usable for MAP inference.
//!
//! Only semirings whose "addition" selects a best element and whose
//! "multiplication" is strictly monotone under that order are supported:
//! `a < b ∧ c < d ⇒ a·c < b·d`. That excludes sum-product.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Semiring {
    /// `(max, ×)` over non-negative reals.
    MaxProduct,
    /// `(max, +)`, i.e. max-product in the log domain.
    #[default]
    MaxSum,
    /// `(min, +)`, for costs.
    MinSum,
}

impl Semiring {
    #[inline]
    pub fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            Semiring::MaxProduct => a * b,
            Semiring::MaxSum | Semiring::MinSum => a + b,
        }
    }

    /// Strictly better under the semiring order.
    #[inline]
    pub fn is_better(self, a: f64, b: f64) -> bool {
        match self {
            Semiring::MinSum => a < b,
            _ => a > b,
        }
    }

    /// Multiplicative identity.
    pub fn one(self) -> f64 {
        match self {
            Semiring::MaxProduct => 1.0,
            _ => 0.0,
        }
    }

    /// The worst possible value (additive identity).
    pub fn zero(self) -> f64 {
        match self {
            Semiring::MaxProduct => 0.0,
            Semiring::MaxSum => f64::NEG_INFINITY,
            Semiring::MinSum => f64::INFINITY,
        }
    }

    /// Total order placing better values first; NaN-free inputs assumed.
    #[inline]
    pub fn cmp_best_first(self, a: f64, b: f64) -> Ordering {
        match self {
            Semiring::MinSum => a.total_cmp(&b),
            _ => b.total_cmp(&a),
        }
    }

    /// Index of the best value, smallest index on ties. `None` for empty input.
    pub fn argbest(self, values: &[f64]) -> Option<usize> {
        let mut it = values.iter().enumerate();
        let (mut best, mut val) = it.next().map(|(i, v)| (i, *v))?;
        for (i, &v) in it {
            if self.is_better(v, val) {
                best = i;
                val = v;
            }
        }
        Some(best)
    }

    /// Checks that every value is admissible: no NaN, and non-negative for max-product.
    pub fn validate(self, values: &[f64]) -> Result<()> {
        for (i, &v) in values.iter().enumerate() {
            if v.is_nan() {
                return domain(format!("value {i} is NaN"));
            }
            if self == Semiring::MaxProduct && v < 0.0 {
                return domain(format!("max-product requires non-negative values, got {v} at {i}"));
            }
            if self == Semiring::MaxProduct && v.is_infinite() {
                return domain(format!("max-product requires finite values, got {v} at {i}"));
            }
        }
        Ok(())
    }

    /// Rescales `values` in place so the best entry becomes [`Semiring::one`].
    ///
    /// Leaves the table untouched when the best entry is the semiring zero
    /// (nothing feasible) so no NaN is produced.
    pub fn normalize(self, values: &mut [f64]) {
        let Some(b) = self.argbest(values) else { return };
        let best = values[b];
        if best == self.zero() || !best.is_finite() {
            return;
        }
        match self {
            Semiring::MaxProduct => values.iter_mut().for_each(|v| *v /= best),
            _ => values.iter_mut().for_each(|v| *v -= best),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Semiring::MaxProduct => "max-product",
            Semiring::MaxSum => "max-sum",
            Semiring::MinSum => "min-sum",
        }
    }
}

impl fmt::Display for Semiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Semiring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max-product" => Ok(Semiring::MaxProduct),
            "max-sum" => Ok(Semiring::MaxSum),
            "min-sum" => Ok(Semiring::MinSum),
            other => domain(format!("unknown semiring '{other}'")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const ALL: [Semiring; 3] = [Semiring::MaxProduct, Semiring::MaxSum, Semiring::MinSum];

    #[test]
    fn identities() {
        for s in ALL {
            assert_eq!(s.combine(s.one(), 3.5), 3.5);
            assert!(s.is_better(3.5, s.zero()) || s == Semiring::MaxProduct);
        }
        assert!(Semiring::MinSum.is_better(1.0, 2.0));
        assert!(Semiring::MaxSum.is_better(2.0, 1.0));
    }

    #[test]
    fn validation() {
        assert!(Semiring::MaxProduct.validate(&[0.0, 1.0]).is_ok());
        assert!(Semiring::MaxProduct.validate(&[-0.5]).is_err());
        assert!(Semiring::MaxSum.validate(&[-0.5, f64::NEG_INFINITY]).is_ok());
        assert!(Semiring::MaxSum.validate(&[f64::NAN]).is_err());
    }

    #[test]
    fn argbest_ties_low() {
        assert_eq!(Semiring::MaxSum.argbest(&[1.0, 3.0, 3.0]), Some(1));
        assert_eq!(Semiring::MinSum.argbest(&[2.0, 1.0, 1.0]), Some(1));
        assert_eq!(Semiring::MaxSum.argbest(&[]), None);
    }

    #[test]
    fn normalize_puts_one_at_best() {
        let mut v = vec![2.0, 8.0, 4.0];
        Semiring::MaxProduct.normalize(&mut v);
        assert_eq!(v, vec![0.25, 1.0, 0.5]);
        let mut v = vec![3.0, 1.0];
        Semiring::MinSum.normalize(&mut v);
        assert_eq!(v, vec![2.0, 0.0]);
        let mut v = vec![f64::NEG_INFINITY; 2];
        Semiring::MaxSum.normalize(&mut v);
        assert!(v.iter().all(|x| *x == f64::NEG_INFINITY));
    }

    proptest! {
        // a < b and c < d implies a·c < b·d under each order (integer-valued so exact).
        #[test]
        fn strict_monotonicity(a in 0u32..1000, db in 1u32..1000, c in 0u32..1000, dd in 1u32..1000) {
            let (a, b, c, d) = (a as f64, (a + db) as f64, c as f64, (c + dd) as f64);
            prop_assert!(Semiring::MaxSum.is_better(Semiring::MaxSum.combine(b, d), Semiring::MaxSum.combine(a, c)));
            prop_assert!(Semiring::MinSum.is_better(Semiring::MinSum.combine(a, c), Semiring::MinSum.combine(b, d)));
            prop_assert!(Semiring::MaxProduct.is_better(Semiring::MaxProduct.combine(b, d), Semiring::MaxProduct.combine(a, c)));
        }
    }
}
