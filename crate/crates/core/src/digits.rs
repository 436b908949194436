//! Digit alphabets Σ_k^d.
//!
//! A letter is a d-tuple of base-k digits. Internally letters are packed into a
//! [`Symbol`] with the first coordinate most significant, so numeric order on
//! symbols is lexicographic order on tuples.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported base.
pub const MAX_BASE: u32 = 36;
/// Largest supported ambient dimension.
pub const MAX_DIM: u32 = 4;

/// Packed digit tuple.
pub type Symbol = u32;

/// One letter of Σ_k^d.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DigitTuple(pub Vec<u32>);

impl DigitTuple {
    pub fn digits(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for DigitTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{b}")?;
        }
        f.write_str(")")
    }
}

/// The alphabet Σ_k^d for a base `k` and dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    k: u32,
    d: u32,
}

impl Alphabet {
    pub fn new(k: u32, d: u32) -> Result<Self> {
        if !(2..=MAX_BASE).contains(&k) || !(1..=MAX_DIM).contains(&d) {
            return Err(Error::UnsupportedAlphabet {
                k: k as u64,
                d: d as u64,
            });
        }
        Ok(Alphabet { k, d })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// Number of letters, k^d.
    pub fn size(&self) -> u32 {
        self.k.pow(self.d)
    }

    pub fn contains(&self, s: Symbol) -> bool {
        s < self.size()
    }

    pub fn encode(&self, digits: &[u32]) -> Result<Symbol> {
        if digits.len() != self.d as usize {
            return Err(Error::InvalidAutomaton(format!(
                "digit tuple of length {} in dimension {}",
                digits.len(),
                self.d
            )));
        }
        let mut s = 0;
        for &b in digits {
            if b >= self.k {
                return Err(Error::InvalidAutomaton(format!(
                    "digit {b} out of range for base {}",
                    self.k
                )));
            }
            s = s * self.k + b;
        }
        Ok(s)
    }

    /// Writes the digits of `s` into `out` (length d).
    pub fn decode_into(&self, mut s: Symbol, out: &mut [u32]) {
        debug_assert_eq!(out.len(), self.d as usize);
        for slot in out.iter_mut().rev() {
            *slot = s % self.k;
            s /= self.k;
        }
    }

    pub fn decode(&self, s: Symbol) -> DigitTuple {
        let mut out = vec![0; self.d as usize];
        self.decode_into(s, &mut out);
        DigitTuple(out)
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> {
        0..self.size()
    }
}
