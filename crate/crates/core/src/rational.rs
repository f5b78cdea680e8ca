//! Exact rationals for interval endpoints and prime-counting arguments.
//!
//! Nothing here ever goes through floating point: `p/m` and `m*p` are
//! compared by cross multiplication in `u128`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A non-negative rational `num/den` with `den >= 1`. Not reduced.
#[derive(Debug, Clone, Copy)]
pub struct Rational {
    num: u64,
    den: u64,
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Input("rational with zero denominator".into()));
        }
        Ok(Self { num, den })
    }

    pub const fn integer(n: u64) -> Self {
        Self { num: n, den: 1 }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    /// `self <= n`, exactly.
    pub fn le_int(&self, n: u64) -> bool {
        self.num as u128 <= n as u128 * self.den as u128
    }

    /// `n <= self`, exactly.
    pub fn ge_int(&self, n: u64) -> bool {
        n as u128 * self.den as u128 <= self.num as u128
    }

    /// `n < self`, exactly.
    pub fn gt_int(&self, n: u64) -> bool {
        (n as u128 * self.den as u128) < self.num as u128
    }

    /// Largest integer not exceeding the value.
    pub fn floor(&self) -> u64 {
        self.num / self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Rational {}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// The scale factor `m = num/den` of the intervals `(m*p_n, m*p_{n+1})`.
///
/// Admissible range is `1 < m <= 2`; `m = 2` is the doubled-interval case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Multiplier {
    num: u64,
    den: u64,
}

impl Multiplier {
    pub const TWO: Multiplier = Multiplier { num: 2, den: 1 };

    /// Largest numerator/denominator accepted. Keeps `num * p` within `u128`
    /// comfortably for every 64-bit prime.
    pub const MAX_TERM: u64 = 1 << 32;

    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num == 0 {
            return Err(Error::Input(format!(
                "multiplier {num}/{den}: terms must be positive"
            )));
        }
        if num > Self::MAX_TERM || den > Self::MAX_TERM {
            return Err(Error::Input(format!(
                "multiplier {num}/{den}: terms above {}",
                Self::MAX_TERM
            )));
        }
        // 1 < num/den <= 2
        if num <= den || num > 2 * den {
            return Err(Error::Input(format!(
                "multiplier {num}/{den} outside (1, 2]"
            )));
        }
        Ok(Self { num, den })
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    /// `m * p` as an exact rational.
    pub fn scale(&self, p: u64) -> Rational {
        let num = p
            .checked_mul(self.num)
            .expect("m*p overflows u64; bound checks should have rejected this");
        Rational { num, den: self.den }
    }

    /// `p / m` as an exact rational.
    pub fn divide(&self, p: u64) -> Rational {
        let num = p
            .checked_mul(self.den)
            .expect("p*den overflows u64; bound checks should have rejected this");
        Rational { num, den: self.num }
    }

    /// `m*a < b`
    pub fn scaled_lt(&self, a: u64, b: u64) -> bool {
        (self.num as u128 * a as u128) < self.den as u128 * b as u128
    }

    /// `m*a <= b`
    pub fn scaled_le(&self, a: u64, b: u64) -> bool {
        self.num as u128 * a as u128 <= self.den as u128 * b as u128
    }

    /// `m*a == b`
    pub fn scaled_eq(&self, a: u64, b: u64) -> bool {
        self.num as u128 * a as u128 == self.den as u128 * b as u128
    }

    /// Smallest integer `>= m*p`.
    pub fn scale_ceil(&self, p: u64) -> u128 {
        (self.num as u128 * p as u128).div_ceil(self.den as u128)
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Default for Multiplier {
    fn default() -> Self {
        Self::TWO
    }
}

impl fmt::Display for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Multiplier {
    type Err = Error;

    /// Parses `"num/den"` or a bare integer.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Input(format!("cannot parse multiplier {s:?}; expected num/den"));
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let num = num.parse::<u64>().map_err(|_| bad())?;
        let den = den.parse::<u64>().map_err(|_| bad())?;
        Multiplier::new(num, den)
    }
}

impl Serialize for Multiplier {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
