//! Graded symplectic and quadratic spaces, stable functionals, and the
//! reference Swan conductor #Phi/m.

mod functional;

pub use functional::{
    build_stable_functional, build_trace_functional, check_stability, split_certificate, Certificate, RankCheck, SplitCheck,
    StableFunctional, MAX_ATTEMPTS,
};

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ffield::FieldError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("{d} does not divide {n}")]
    NotADivisor { n: usize, d: usize },
    #[error("d={d} is not an admissible divisor for {family} with n={n}")]
    InvalidDivisor { family: Family, n: usize, d: usize },
    #[error("profile {profile:?} violates the dimension parity rules for {family} with d={d}")]
    ParityViolation { family: Family, d: usize, profile: Profile },
    #[error("m={m} is not a regular elliptic number for {family} with n={n}")]
    InvalidEllipticNumber { family: Family, n: usize, m: usize },
    #[error("no stable functional found at p={p} after {attempts} attempts ({reason})")]
    NoStableFound { p: u32, attempts: usize, reason: String },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    C,
    B,
    D,
    #[serde(rename = "2D")]
    D2,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::C => "C",
            Family::B => "B",
            Family::D => "D",
            Family::D2 => "2D",
        };
        f.write_str(s)
    }
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "C" | "SP" => Ok(Family::C),
            "B" => Ok(Family::B),
            "D" => Ok(Family::D),
            "2D" | "D2" | "²D" => Ok(Family::D2),
            other => Err(format!("unknown family {other:?} (expected C, B, D or 2D)")),
        }
    }
}

/// Dimension profile of M_0, M_l: all d, or both d+1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Profile {
    #[serde(rename = "non-degenerate")]
    NonDegenerate,
    #[serde(rename = "degenerate")]
    Degenerate,
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::NonDegenerate => "non-degenerate",
            Profile::Degenerate => "degenerate",
        })
    }
}

impl FromStr for Profile {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "non-degenerate" | "nondegenerate" | "default" | "nd" => Ok(Profile::NonDegenerate),
            "degenerate" | "deg" => Ok(Profile::Degenerate),
            other => Err(format!("unknown profile {other:?}")),
        }
    }
}

/// The parameters a space is built from; enough to rebuild it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpaceParams {
    pub family: Family,
    pub n: usize,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Profile>,
}

impl SpaceParams {
    pub fn symplectic(n: usize, d: usize) -> Self {
        SpaceParams { family: Family::C, n, d, profile: None }
    }

    pub fn orthogonal(family: Family, n: usize, d: usize, profile: Option<Profile>) -> Self {
        SpaceParams { family, n, d, profile }
    }

    pub fn build(&self) -> Result<GradedSpace, SpaceError> {
        match self.family {
            Family::C => build_symplectic_space(self.n, self.d),
            f => build_orthogonal_space(f, self.n, self.d, self.profile),
        }
    }
}

impl fmt::Display for SpaceParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} n={} d={}", self.family, self.n, self.d)?;
        if let Some(pr) = self.profile {
            write!(f, " {pr}")?;
        }
        Ok(())
    }
}

/// M = sum of pieces M_i with the standard basis on each piece.
///
/// Symplectic pieces are indexed 1..=m, orthogonal ones 0..m.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedSpace {
    pub family: Family,
    pub n: usize,
    pub d: usize,
    pub m: usize,
    pub profile: Profile,
    pub piece_dims: Vec<usize>,
}

pub fn build_symplectic_space(n: usize, d: usize) -> Result<GradedSpace, SpaceError> {
    if d == 0 || n == 0 || n % d != 0 {
        return Err(SpaceError::NotADivisor { n, d });
    }
    let m = 2 * n / d;
    Ok(GradedSpace { family: Family::C, n, d, m, profile: Profile::NonDegenerate, piece_dims: vec![d; m] })
}

pub fn build_orthogonal_space(
    family: Family,
    n: usize,
    d: usize,
    profile: Option<Profile>,
) -> Result<GradedSpace, SpaceError> {
    if d == 0 || n == 0 {
        return Err(SpaceError::InvalidDivisor { family, n, d });
    }
    // (m, dim M_0, dim M_l, profile) from the divisor rules and the parity table
    let (m, a0, al, natural) = match family {
        Family::C => return build_symplectic_space(n, d),
        Family::B => {
            if n % d != 0 {
                return Err(SpaceError::InvalidDivisor { family, n, d });
            }
            let (a0, al) = if d % 2 == 0 { (d, d + 1) } else { (d + 1, d) };
            (2 * n / d, a0, al, Profile::NonDegenerate)
        }
        Family::D | Family::D2 => {
            // D: even d | n or odd d | n-1; 2D: odd d | n or even d | n-1
            let wants_even_for_n = family == Family::D;
            if (d % 2 == 0) == wants_even_for_n {
                if n % d != 0 {
                    return Err(SpaceError::InvalidDivisor { family, n, d });
                }
                (2 * n / d, d, d, Profile::NonDegenerate)
            } else {
                if n < 2 || (n - 1) % d != 0 {
                    return Err(SpaceError::InvalidDivisor { family, n, d });
                }
                (2 * (n - 1) / d, d + 1, d + 1, Profile::Degenerate)
            }
        }
    };
    if let Some(req) = profile {
        if req != natural || (family == Family::B && req == Profile::Degenerate) {
            return Err(SpaceError::ParityViolation { family, d, profile: req });
        }
    }
    if m < 2 || m % 2 != 0 {
        return Err(SpaceError::InvalidDivisor { family, n, d });
    }
    let l = m / 2;
    let mut dims = vec![d; m];
    dims[0] = a0;
    dims[l] = al;
    Ok(GradedSpace { family, n, d, m, profile: natural, piece_dims: dims })
}

impl GradedSpace {
    pub fn params(&self) -> SpaceParams {
        SpaceParams {
            family: self.family,
            n: self.n,
            d: self.d,
            profile: if self.is_symplectic() { None } else { Some(self.profile) },
        }
    }

    pub fn is_symplectic(&self) -> bool {
        self.family == Family::C
    }

    pub fn l(&self) -> usize {
        self.m / 2
    }

    /// Smallest piece index: 1 for symplectic, 0 for orthogonal.
    pub fn first_index(&self) -> usize {
        if self.is_symplectic() {
            1
        } else {
            0
        }
    }

    pub fn indices(&self) -> Range<usize> {
        self.first_index()..self.first_index() + self.m
    }

    pub fn has_piece(&self, i: usize) -> bool {
        self.indices().contains(&i)
    }

    pub fn dim(&self) -> usize {
        self.piece_dims.iter().sum()
    }

    pub fn piece_dim(&self, i: usize) -> usize {
        self.piece_dims[i - self.first_index()]
    }

    /// Global coordinate range of piece i.
    pub fn range(&self, i: usize) -> Range<usize> {
        let k = i - self.first_index();
        let start: usize = self.piece_dims[..k].iter().sum();
        start..start + self.piece_dims[k]
    }

    /// Partner piece under the pairing: m+1-i (symplectic) or -i mod m.
    pub fn partner(&self, i: usize) -> usize {
        if self.is_symplectic() {
            self.m + 1 - i
        } else {
            (self.m - i) % self.m
        }
    }

    /// Diagonal coefficients of q_0 or q_l (orthogonal only): alternating
    /// signs, so each consecutive pair is a hyperbolic plane x^2 - y^2. For 2D
    /// the signs on M_l start with -1 to keep q_0 + q_l split.
    pub fn diag_signs(&self, i: usize) -> Vec<i64> {
        assert!(!self.is_symplectic() && (i == 0 || i == self.l()));
        let start = if i == self.l() && self.family == Family::D2 { -1 } else { 1 };
        (0..self.piece_dim(i)).map(|k| if k % 2 == 0 { start } else { -start }).collect()
    }

    /// Value of the basic pairing on basis vectors e^{(i)}_a, e^{(j)}_b:
    /// omega for symplectic spaces, (x,y) = q(x+y)-q(x)-q(y) otherwise.
    pub fn pairing(&self, i: usize, a: usize, j: usize, b: usize) -> i64 {
        if self.is_symplectic() {
            if i + j != self.m + 1 || a != b {
                return 0;
            }
            if i <= self.l() {
                1
            } else {
                -1
            }
        } else {
            if (i + j) % self.m != 0 || a != b {
                return 0;
            }
            if i == 0 || i == self.l() {
                debug_assert_eq!(i, j);
                2 * self.diag_signs(i)[a]
            } else {
                1
            }
        }
    }

    /// Integer Gram matrix of the pairing on global coordinates.
    pub fn gram(&self) -> Vec<Vec<i64>> {
        let n = self.dim();
        let mut g = vec![vec![0i64; n]; n];
        for i in self.indices() {
            for j in self.indices() {
                let (ri, rj) = (self.range(i), self.range(j));
                for a in 0..ri.len() {
                    for b in 0..rj.len() {
                        g[ri.start + a][rj.start + b] = self.pairing(i, a, j, b);
                    }
                }
            }
        }
        g
    }

    pub fn describe(&self) -> String {
        format!("{} n={} d={} m={} dims={:?}", self.family, self.n, self.d, self.m, self.piece_dims)
    }
}

/// Reeder-Yu prediction #Phi/m for the Swan conductor.
pub fn swan_prediction(family: Family, n: usize, m: usize) -> Result<Ratio<i64>, SpaceError> {
    let admissible = (1..=n).any(|d| {
        let params = match family {
            Family::C => build_symplectic_space(n, d).ok(),
            f => build_orthogonal_space(f, n, d, None).ok(),
        };
        params.map_or(false, |s| s.m == m)
    });
    if !admissible {
        return Err(SpaceError::InvalidEllipticNumber { family, n, m });
    }
    let n = n as i64;
    let roots = match family {
        Family::B | Family::C => 2 * n * n,
        Family::D | Family::D2 => 2 * n * (n - 1),
    };
    Ok(Ratio::new(roots, m as i64))
}
