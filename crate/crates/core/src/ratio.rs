//! Exact non-negative fractions (minor densities, quality floors).

use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use num_rational::Ratio;

/// Exact fraction `p / q`, kept in lowest terms.
///
/// A zero denominator yields `0/1`, the density of the empty graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fraction(Ratio<u64>);

impl Fraction {
    pub fn new(numer: u64, denom: u64) -> Self {
        if denom == 0 {
            Fraction(Ratio::new_raw(0, 1))
        } else {
            Fraction(Ratio::new(numer, denom))
        }
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    /// `true` iff the value is strictly larger than the integer `bound`.
    pub fn exceeds(&self, bound: u64) -> bool {
        (self.numer() as u128) > (bound as u128) * (self.denom() as u128)
    }

    /// `true` iff the value is strictly below the integer `bound`.
    pub fn below(&self, bound: u64) -> bool {
        (self.numer() as u128) < (bound as u128) * (self.denom() as u128)
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("malformed fraction {0:?}, expected \"p/q\" with q > 0")]
pub struct ParseFractionError(pub alloc::string::String);

impl FromStr for Fraction {
    type Err = ParseFractionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseFractionError(s.into());
        let (p, q) = s.split_once('/').ok_or_else(err)?;
        let p: u64 = p.trim().parse().map_err(|_| err())?;
        let q: u64 = q.trim().parse().map_err(|_| err())?;
        if q == 0 {
            return Err(err());
        }
        Ok(Fraction::new(p, q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn reduces_and_formats() {
        assert_eq!(Fraction::new(6, 4).to_string(), "3/2");
        assert_eq!(Fraction::new(0, 0).to_string(), "0/1");
        assert_eq!("6/4".parse::<Fraction>().unwrap(), Fraction::new(3, 2));
        assert!("1/0".parse::<Fraction>().is_err());
    }

    #[test]
    fn strict_comparisons() {
        let d = Fraction::new(4, 2);
        assert!(!d.exceeds(2));
        assert!(d.exceeds(1));
        assert!(!d.below(2));
        assert!(d.below(3));
    }
}
