//! Prime fields F_p (p odd) and exact sums in Z[zeta_p].

mod cyclo;
mod vectors;

pub use cyclo::CyclotomicInt;
pub use vectors::{odometer, Budget, Vectors, DEFAULT_BUDGET};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("characteristic 2 is not supported")]
    EvenCharacteristic,
    #[error("{0} is too large for residue arithmetic")]
    TooLarge(u64),
    #[error("enumeration of {requested} items exceeds the budget of {budget}")]
    BudgetExceeded { requested: u128, budget: u64 },
    #[error("moduli differ: {0} vs {1}")]
    ModulusMismatch(u32, u32),
}

/// An odd prime field. Residues are `u32` in `0..p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Field {
    p: u32,
}

impl TryFrom<u64> for Field {
    type Error = FieldError;
    fn try_from(p: u64) -> Result<Self, FieldError> {
        Field::new(p)
    }
}

impl From<Field> for u64 {
    fn from(f: Field) -> u64 {
        f.p as u64
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

impl Field {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if p == 2 {
            return Err(FieldError::EvenCharacteristic);
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        // products of two residues must fit in u64 comfortably
        if p > (1 << 31) {
            return Err(FieldError::TooLarge(p));
        }
        Ok(Field { p: p as u32 })
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn reduce(&self, x: i64) -> u32 {
        x.rem_euclid(self.p as i64) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        (s % self.p as u64) as u32
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        let p = self.p as u64;
        ((a as u64 + p - b as u64) % p) as u32
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn pow(&self, mut a: u32, mut e: u64) -> u32 {
        let mut r = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r % self.p
    }

    /// Inverse by Fermat; `None` at 0.
    pub fn inv(&self, a: u32) -> Option<u32> {
        let a = a % self.p;
        if a == 0 {
            None
        } else {
            Some(self.pow(a, self.p as u64 - 2))
        }
    }

    /// Nonzero square test (Euler's criterion). 0 is not counted as a square.
    pub fn is_square(&self, a: u32) -> bool {
        let a = a % self.p;
        a != 0 && self.pow(a, (self.p as u64 - 1) / 2) == 1
    }

    /// Legendre symbol as -1, 0, 1.
    pub fn legendre(&self, a: u32) -> i32 {
        let a = a % self.p;
        if a == 0 {
            0
        } else if self.is_square(a) {
            1
        } else {
            -1
        }
    }

    pub fn vectors(&self, dim: usize, budget: Budget) -> Result<Vectors, FieldError> {
        Vectors::new(*self, dim, budget)
    }
}
