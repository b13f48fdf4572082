//! The counting oracle: point counts at several primes, an exact
//! interpolating polynomial validated on held-out primes, and chi_c = P(1).

mod poly;

pub use poly::{FloatPolynomial, Polynomial, RationalPolynomial};

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ffield::{is_prime, Budget};
use crate::spaces::{build_stable_functional, GradedSpace, SpaceError, StableFunctional};
use crate::varieties::{count_points, VarietyError, VarietySpec};

/// The fixed candidate list, then further primes for configurations that
/// need more admissible samples.
pub const BASE_PRIMES: [u32; 8] = [3, 5, 7, 11, 13, 17, 19, 23];
pub const EXTENDED_LIMIT: u32 = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CountError {
    #[error("need {needed} samples, got {got}")]
    NotEnoughSamples { needed: usize, got: usize },
    #[error("counts are not polynomial: {0}")]
    NonPolynomialCount(Box<CountPolynomial>),
    #[error("only {found} admissible primes among the candidates, need {needed}")]
    NoAdmissiblePrimes { needed: usize, found: usize },
    #[error(transparent)]
    Variety(#[from] VarietyError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "MATCH")]
    Match,
    #[serde(rename = "MISMATCH")]
    Mismatch,
    #[serde(rename = "NON_POLYNOMIAL")]
    NonPolynomial,
    #[serde(rename = "SKIPPED")]
    Skipped,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Match => "MATCH",
            Status::Mismatch => "MISMATCH",
            Status::NonPolynomial => "NON_POLYNOMIAL",
            Status::Skipped => "SKIPPED",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitStatus {
    #[serde(rename = "VALID")]
    Valid,
    #[serde(rename = "NON_POLYNOMIAL")]
    NonPolynomial,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Holdout {
    pub p: u32,
    pub predicted: String,
    pub observed: u64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountPolynomial {
    pub samples: Vec<(u32, u64)>,
    pub degree_bound: usize,
    /// Exact rational coefficients, degree 0 first.
    pub coeffs: Vec<String>,
    pub holdouts: Vec<Holdout>,
    pub status: FitStatus,
    /// P(1), present when the fit is valid and P(1) is an integer.
    pub chi: Option<i64>,
    #[serde(skip)]
    pub poly: Option<RationalPolynomial>,
}

impl fmt::Display for CountPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.poly {
            Some(p) => write!(f, "P(q) = {p}")?,
            None => write!(f, "P(q) = ?")?,
        }
        for h in &self.holdouts {
            write!(f, "; P({}) = {} vs {}", h.p, h.predicted, h.observed)?;
        }
        Ok(())
    }
}

/// The value as an i64 when it is an integer.
pub fn integer_value(r: &BigRational) -> Option<i64> {
    if r.denom().is_one() {
        r.numer().to_i64()
    } else {
        None
    }
}

/// Fits the first degree_bound+1 samples, checks the rest, and never fails
/// on a mismatch: the outcome is in `status`.
pub fn fit_samples(samples: &[(u32, u64)], degree_bound: usize) -> Result<CountPolynomial, CountError> {
    let needed = degree_bound + 2;
    if samples.len() < needed {
        return Err(CountError::NotEnoughSamples { needed, got: samples.len() });
    }
    let (fit, rest) = samples.split_at(degree_bound + 1);
    let poly = RationalPolynomial::from_samples(fit);
    let holdouts: Vec<Holdout> = rest
        .iter()
        .map(|&(p, observed)| {
            let pred = poly.eval_int(p as i64);
            let ok = pred == BigRational::from_integer(BigInt::from(observed));
            Holdout { p, predicted: pred.to_string(), observed, ok }
        })
        .collect();
    let valid = holdouts.iter().all(|h| h.ok);
    let chi = if valid { integer_value(&poly.eval_int(1)) } else { None };
    let status = if valid && chi.is_some() { FitStatus::Valid } else { FitStatus::NonPolynomial };
    Ok(CountPolynomial {
        samples: samples.to_vec(),
        degree_bound,
        coeffs: poly.coeffs().iter().map(|c| c.to_string()).collect(),
        holdouts,
        status,
        chi,
        poly: Some(poly),
    })
}

/// As `fit_samples`, but a failed holdout is an error.
pub fn fit_count_polynomial(samples: &[(u32, u64)], degree_bound: usize) -> Result<CountPolynomial, CountError> {
    let fit = fit_samples(samples, degree_bound)?;
    match fit.status {
        FitStatus::Valid => Ok(fit),
        FitStatus::NonPolynomial => Err(CountError::NonPolynomialCount(Box::new(fit))),
    }
}

/// Primes used for one configuration, with the functional found at each.
#[derive(Debug, Clone)]
pub struct PrimePlan {
    pub seed: u64,
    pub models: Vec<StableFunctional>,
}

impl PrimePlan {
    pub fn candidates() -> Vec<u32> {
        let mut out = BASE_PRIMES.to_vec();
        out.extend((BASE_PRIMES[7] + 1..EXTENDED_LIMIT).filter(|&n| is_prime(n as u64)).map(|n| n as u32));
        out
    }

    /// The first `needed` admissible primes among `candidates`: a stable
    /// functional passing the split certificate must exist at each.
    pub fn admissible(
        space: &GradedSpace,
        seed: u64,
        needed: usize,
        candidates: &[u32],
    ) -> Result<PrimePlan, CountError> {
        let mut models = Vec::new();
        for &p in candidates {
            if models.len() == needed {
                break;
            }
            if p == 2 || !is_prime(p as u64) {
                continue;
            }
            if let Ok(phi) = build_stable_functional(space, seed, p, true) {
                models.push(phi);
            }
        }
        if models.len() < needed {
            return Err(CountError::NoAdmissiblePrimes { needed, found: models.len() });
        }
        Ok(PrimePlan { seed, models })
    }

    pub fn primes(&self) -> Vec<u32> {
        self.models.iter().map(|m| m.p).collect()
    }
}

/// Counts at every prime of the plan (first degree_bound+1 fit, the rest
/// validate) and returns the fit; `status` says whether chi is trustworthy.
pub fn euler_characteristic(
    spec: &VarietySpec,
    space: &GradedSpace,
    plan: &PrimePlan,
    budget: Budget,
) -> Result<CountPolynomial, CountError> {
    let degree = spec.fit_degree(space);
    let needed = degree + 2;
    if plan.models.len() < needed {
        return Err(CountError::NotEnoughSamples { needed, got: plan.models.len() });
    }
    let samples = plan
        .models
        .iter()
        .map(|phi| Ok((phi.p, count_points(spec, space, phi, budget)?)))
        .collect::<Result<Vec<_>, CountError>>()?;
    fit_samples(&samples, degree)
}

/// Builds the plan the spec needs (plus `extra_holdouts`) and runs the oracle.
pub fn chi_of(
    spec: &VarietySpec,
    space: &GradedSpace,
    seed: u64,
    candidates: &[u32],
    extra_holdouts: usize,
    budget: Budget,
) -> Result<CountPolynomial, CountError> {
    let needed = spec.fit_degree(space) + 2 + extra_holdouts;
    let plan = PrimePlan::admissible(space, seed, needed, candidates)?;
    euler_characteristic(spec, space, &plan, budget)
}

/// Point-count polynomials of the top-piece loci under PARALLEL, derived
/// from the (t, [v]) parametrization and the isotropic count of a split form
/// in d variables: q^{d-1} + q^{d/2} - q^{d/2-1} (d even) or q^{d-1} (d odd).
pub fn closed_form(name: &str, d: usize) -> Option<RationalPolynomial> {
    let mono = |k: usize, c: i64| {
        let mut v = vec![0i64; k + 1];
        v[k] = c;
        v
    };
    let add = |a: Vec<i64>, b: Vec<i64>| {
        let n = a.len().max(b.len());
        (0..n).map(|i| a.get(i).unwrap_or(&0) + b.get(i).unwrap_or(&0)).collect::<Vec<_>>()
    };
    let mul = |a: &[i64], b: &[i64]| {
        let mut out = vec![0i64; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    };
    let isotropic = if d % 2 == 0 {
        add(add(mono(d - 1, 1), mono(d / 2, 1)), mono(d / 2 - 1, -1))
    } else {
        mono(d - 1, 1)
    };
    let coeffs = match name {
        "Sym2" => mono(2 * d, 1),
        "Gamma1" => add(mono(2 * d - 1, 1), mono(d - 1, -1)),
        "Gamma1Prime" => mul(&mono(d, 1), &isotropic),
        "Gamma1Cap" => mul(&add(isotropic, mono(0, -1)), &mono(d - 1, 1)),
        _ => return None,
    };
    Some(Polynomial::new(coeffs.into_iter().map(|c| BigRational::from_integer(BigInt::from(c))).collect()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcordanceRow {
    pub spec: String,
    pub interpretation: String,
    pub computed: Option<i64>,
    pub target: i64,
    pub status: Status,
    pub fit: Option<CountPolynomial>,
}

pub fn compare(fit: &CountPolynomial, target: i64) -> Status {
    match (fit.status, fit.chi) {
        (FitStatus::Valid, Some(c)) if c == target => Status::Match,
        (FitStatus::Valid, Some(_)) => Status::Mismatch,
        _ => Status::NonPolynomial,
    }
}

/// One row per (spec, target); never fails on a mismatch, only records it.
pub fn concordance(
    items: &[(VarietySpec, i64)],
    space: &GradedSpace,
    seed: u64,
    candidates: &[u32],
    budget: Budget,
) -> Vec<ConcordanceRow> {
    items
        .iter()
        .map(|(spec, target)| {
            let fit = chi_of(spec, space, seed, candidates, 0, budget);
            let (computed, status, fit) = match fit {
                Ok(f) => (f.chi, compare(&f, *target), Some(f)),
                Err(_) => (None, Status::Skipped, None),
            };
            ConcordanceRow {
                spec: spec.name.clone(),
                interpretation: spec.interpretation.to_string(),
                computed,
                target: *target,
                status,
                fit,
            }
        })
        .collect()
}
