use std::fmt;

use serde::{Deserialize, Serialize};

use super::FieldError;

/// Element of Z[zeta_p] stored as coefficients of zeta^0..zeta^{p-1}.
///
/// The representation is not unique because 1 + zeta + ... + zeta^{p-1} = 0;
/// `normalize` picks the representative with coefficient 0 at index 0, and
/// equality compares normalized forms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CyclotomicInt {
    p: u32,
    coeffs: Vec<i64>,
}

impl CyclotomicInt {
    pub fn zero(p: u32) -> Self {
        CyclotomicInt { p, coeffs: vec![0; p as usize] }
    }

    pub fn from_coeffs(p: u32, coeffs: Vec<i64>) -> Self {
        assert_eq!(coeffs.len(), p as usize, "need exactly p coefficients");
        CyclotomicInt { p, coeffs }
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// Adds zeta^exponent.
    pub fn accumulate(&mut self, exponent: u32) {
        self.coeffs[(exponent % self.p) as usize] += 1;
    }

    pub fn accumulate_n(&mut self, exponent: u32, times: i64) {
        self.coeffs[(exponent % self.p) as usize] += times;
    }

    pub fn normalize(&self) -> CyclotomicInt {
        let c0 = self.coeffs[0];
        CyclotomicInt { p: self.p, coeffs: self.coeffs.iter().map(|c| c - c0).collect() }
    }

    pub fn is_zero(&self) -> bool {
        let c0 = self.coeffs[0];
        self.coeffs.iter().all(|&c| c == c0)
    }

    pub fn try_add(&self, other: &CyclotomicInt) -> Result<CyclotomicInt, FieldError> {
        if self.p != other.p {
            return Err(FieldError::ModulusMismatch(self.p, other.p));
        }
        Ok(CyclotomicInt {
            p: self.p,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn try_sub(&self, other: &CyclotomicInt) -> Result<CyclotomicInt, FieldError> {
        self.try_add(&other.scale(-1))
    }

    pub fn scale(&self, k: i64) -> CyclotomicInt {
        CyclotomicInt { p: self.p, coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    /// Galois conjugate sigma_a: zeta -> zeta^a.
    pub fn conjugate(&self, a: u32) -> CyclotomicInt {
        let mut out = CyclotomicInt::zero(self.p);
        for (i, &c) in self.coeffs.iter().enumerate() {
            let j = (i as u64 * a as u64 % self.p as u64) as usize;
            out.coeffs[j] += c;
        }
        out
    }

    /// The integer k with self = k in Z[zeta], if the element is rational.
    /// A rational k has canonical form (0, -k, ..., -k).
    pub fn as_integer(&self) -> Option<i64> {
        let n = self.normalize();
        let v = n.coeffs[1];
        if n.coeffs[1..].iter().all(|&c| c == v) {
            Some(-v)
        } else {
            None
        }
    }

    /// Complex absolute value under zeta -> exp(2 pi i / p). Informational only.
    pub fn abs(&self) -> f64 {
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for (k, &c) in self.coeffs.iter().enumerate() {
            let th = 2.0 * std::f64::consts::PI * k as f64 / self.p as f64;
            re += c as f64 * th.cos();
            im += c as f64 * th.sin();
        }
        re.hypot(im)
    }

    /// Nonzero entries of the canonical form as (exponent, coefficient).
    pub fn sparse(&self) -> Vec<(u32, i64)> {
        self.normalize()
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| (i as u32, c))
            .collect()
    }
}

impl PartialEq for CyclotomicInt {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.normalize().coeffs == other.normalize().coeffs
    }
}

impl Eq for CyclotomicInt {}

impl fmt::Display for CyclotomicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.sparse();
        if terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = terms.iter().map(|(e, c)| format!("{c}*z^{e}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}
