use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, ToPrimitive, Zero};

/// Dense polynomial, coefficients from degree 0 up.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

pub type RationalPolynomial = Polynomial<BigRational>;
pub type FloatPolynomial = Polynomial<f64>;

impl<T: Num + Clone + FromPrimitive> Polynomial<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: &T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    /// Unique polynomial of degree < points.len() through the points
    /// (Newton divided differences). The x's must be distinct.
    pub fn interpolate(points: &[(T, T)]) -> Self {
        let n = points.len();
        let xs: Vec<T> = points.iter().map(|p| p.0.clone()).collect();
        let mut dd: Vec<T> = points.iter().map(|p| p.1.clone()).collect();
        for level in 1..n {
            for i in (level..n).rev() {
                dd[i] = (dd[i].clone() - dd[i - 1].clone()) / (xs[i].clone() - xs[i - level].clone());
            }
        }
        // expand sum dd[k] * prod_{j<k} (x - x_j)
        let mut coeffs = vec![T::zero(); n];
        let mut basis = vec![T::one()];
        for k in 0..n {
            for (c, b) in coeffs.iter_mut().zip(&basis) {
                *c = c.clone() + dd[k].clone() * b.clone();
            }
            let mut next = vec![T::zero(); basis.len() + 1];
            for (j, b) in basis.iter().enumerate() {
                next[j + 1] = next[j + 1].clone() + b.clone();
                next[j] = next[j].clone() - xs[k].clone() * b.clone();
            }
            basis = next;
        }
        Polynomial::new(coeffs)
    }
}

impl RationalPolynomial {
    pub fn from_samples(samples: &[(u32, u64)]) -> Self {
        let pts: Vec<(BigRational, BigRational)> = samples
            .iter()
            .map(|&(p, c)| (BigRational::from_integer(BigInt::from(p)), BigRational::from_integer(BigInt::from(c))))
            .collect();
        Polynomial::interpolate(&pts)
    }

    pub fn eval_int(&self, x: i64) -> BigRational {
        self.eval(&BigRational::from_integer(BigInt::from(x)))
    }

    pub fn to_float(&self) -> FloatPolynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect())
    }
}

impl<T: fmt::Display + Zero> fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("({c})q"),
                _ => format!("({c})q^{k}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}
