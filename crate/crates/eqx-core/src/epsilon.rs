//! Exact rational approximation parameter.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Value;

/// The approximation parameter ε = num/den with 0 ≤ num < den.
///
/// All comparisons that involve ε are carried out by integer
/// cross-multiplication in 128-bit arithmetic; no floating point is ever
/// used, so results are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Epsilon {
    num: u64,
    den: u64,
}

/// Denominators are capped so that every cross-multiplication fits i128
/// with room to spare.
pub const MAX_EPSILON_DENOMINATOR: u64 = 1_000_000_000;

impl Epsilon {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidInput("epsilon denominator must be positive".into()));
        }
        if den > MAX_EPSILON_DENOMINATOR {
            return Err(Error::InvalidInput(format!(
                "epsilon denominator {den} exceeds the cap of {MAX_EPSILON_DENOMINATOR}"
            )));
        }
        if num >= den {
            return Err(Error::InvalidInput(format!(
                "epsilon {num}/{den} must lie in [0, 1)"
            )));
        }
        Ok(Self { num, den })
    }

    /// ε = 0, the exact case.
    pub fn zero() -> Self {
        Self { num: 0, den: 1 }
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    /// Whether (1 − ε)·lhs ≤ rhs, i.e. the goods-side condition holds.
    ///
    /// Evaluated as (den − num)·lhs ≤ den·rhs.
    pub fn goods_ok(&self, lhs: Value, rhs: Value) -> bool {
        let shrink = (self.den - self.num) as i128;
        let full = self.den as i128;
        shrink * lhs as i128 <= full * rhs as i128
    }

    /// Whether lhs ≥ (1 + ε)·rhs, the chores-side condition (values are
    /// nonpositive there, so the right side moves away from zero).
    ///
    /// Evaluated as den·lhs ≥ (den + num)·rhs.
    pub fn chores_ok(&self, lhs: Value, rhs: Value) -> bool {
        let full = self.den as i128;
        let grow = self.den as i128 + self.num as i128;
        full * lhs as i128 >= grow * rhs as i128
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Epsilon {
    type Err = Error;

    /// Parses "a/b"; a bare "0" is accepted as 0/1.
    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "0" {
            return Ok(Self::zero());
        }
        let (a, b) = s
            .split_once('/')
            .ok_or_else(|| Error::InvalidInput(format!("epsilon `{s}` is not of the form a/b")))?;
        let num = a
            .trim()
            .parse::<u64>()
            .map_err(|e| Error::InvalidInput(format!("epsilon numerator `{a}`: {e}")))?;
        let den = b
            .trim()
            .parse::<u64>()
            .map_err(|e| Error::InvalidInput(format!("epsilon denominator `{b}`: {e}")))?;
        Self::new(num, den)
    }
}
