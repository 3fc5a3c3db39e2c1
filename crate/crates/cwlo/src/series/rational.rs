//! Exact rational exponents for the expansion ladders.

use crate::{Error, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// An exact power of n, kept reduced with positive denominator. Integer
/// powers render as "-1"; fractional ones as "num/den" ("-3/4"). The critical
/// ladders step in quarters, so exponents must stay exact rationals rather
/// than floats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Power {
    num: i64,
    den: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Power {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidParams("power denominator is zero".into()));
        }
        if num == 0 {
            return Ok(Self { num: 0, den: 1 });
        }
        let sign = if den < 0 { -1 } else { 1 };
        let g = gcd(num, den);
        Ok(Self {
            num: sign * num / g,
            den: sign * den / g,
        })
    }

    pub fn int(k: i64) -> Self {
        Self { num: k, den: 1 }
    }

    /// -k/2 — the step unit of the noncritical ladders is n^{-1}, of the
    /// critical ones n^{-1/2}.
    pub fn neg_half(k: i64) -> Self {
        Self::new(-k, 2).expect("den 2")
    }

    /// k/4 — critical ladders carry quarter-power prefactors.
    pub fn quarter(k: i64) -> Self {
        Self::new(k, 4).expect("den 4")
    }

    pub fn numerator(&self) -> i64 {
        self.num
    }

    pub fn denominator(&self) -> i64 {
        self.den
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialOrd for Power {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Power {
    fn cmp(&self, other: &Self) -> Ordering {
        // denominators are positive and small; i64 * i64 stays in i128
        (self.num as i128 * other.den as i128).cmp(&(other.num as i128 * self.den as i128))
    }
}

impl fmt::Display for Power {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Power {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |t: &str| {
            t.trim()
                .parse::<i64>()
                .map_err(|e| Error::InvalidParams(format!("bad power {s:?}: {e}")))
        };
        match s.split_once('/') {
            Some((a, b)) => Self::new(parse(a)?, parse(b)?),
            None => Ok(Self::int(parse(s)?)),
        }
    }
}

impl Serialize for Power {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Power {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
