use std::fmt;
use std::ops::{Div, Mul};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::scalar::C64;

/// A root of unity `exp(2πi·p/q)`, stored as the reduced fraction `p/q`
/// with `0 <= p/q < 1`. Multiplication adds fractions modulo one.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Phase(Ratio<i64>);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PhaseError {
    #[error("phase denominator must be nonzero")]
    ZeroDenominator,
    #[error("cannot parse phase {0:?}; expected \"p/q\" or an integer")]
    Parse(String),
}

impl Phase {
    pub const ONE: Phase = Phase(Ratio::new_raw(0, 1));
    /// `-1 = exp(πi)`.
    pub const MINUS_ONE: Phase = Phase(Ratio::new_raw(1, 2));

    pub fn new(p: i64, q: i64) -> Result<Self, PhaseError> {
        if q == 0 {
            return Err(PhaseError::ZeroDenominator);
        }
        Ok(Self::reduce(Ratio::new(p, q)))
    }

    fn reduce(r: Ratio<i64>) -> Self {
        let q = *r.denom();
        let p = r.numer().mod_floor(&q);
        Phase(Ratio::new(p, q))
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_one(&self) -> bool {
        self.numer() == 0
    }

    pub fn inv(self) -> Self {
        Self::reduce(-self.0)
    }

    pub fn pow(self, k: i64) -> Self {
        Self::reduce(self.0 * k)
    }

    pub fn to_c64(&self) -> C64 {
        let angle = 2.0 * std::f64::consts::PI * (self.numer() as f64) / (self.denom() as f64);
        C64::from_polar(1.0, angle)
    }
}

impl Default for Phase {
    fn default() -> Self {
        Phase::ONE
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Self::reduce(self.0 + rhs.0)
    }
}

impl Div for Phase {
    type Output = Phase;
    fn div(self, rhs: Phase) -> Phase {
        Self::reduce(self.0 - rhs.0)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Phase({self})")
    }
}

impl FromStr for Phase {
    type Err = PhaseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let parse = |x: &str| x.trim().parse::<i64>().map_err(|_| PhaseError::Parse(s.to_string()));
        match s.split_once('/') {
            Some((p, q)) => Phase::new(parse(p)?, parse(q)?),
            None => Phase::new(parse(s)?, 1),
        }
    }
}

impl Serialize for Phase {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Phase {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
