//! The loci: pure-tensor cones and projective spaces over a subset of the
//! pieces, cut out by the gamma functions, the quadrics q_{[i,m-i]} and the
//! pairings built from phi.

mod enumerate;
mod registry;

pub use enumerate::{count_points, count_report, enum_variety, for_each_point, lines, CountReport, Point};
pub use registry::{registry, registry_document, registry_names, RegistryEntry};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ffield::{Field, FieldError};
use crate::spaces::{GradedSpace, SpaceError, StableFunctional};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VarietyError {
    #[error("form {form} needs piece M_{piece}, which is not in the ambient")]
    MissingPiece { form: FormId, piece: usize },
    #[error("form {0} is not defined for this family")]
    WrongFamily(FormId),
    #[error("condition {form} {relation} is not homogeneous and cannot live on a projective ambient")]
    InhomogeneousOnProjective { form: FormId, relation: Relation },
    #[error("cannot projectivize: condition {form} {relation} is not scale invariant")]
    InhomogeneousCondition { form: FormId, relation: Relation },
    #[error("piece M_{0} does not exist in this space")]
    NoSuchPiece(usize),
    #[error("unknown variety {0:?}")]
    UnknownVariety(String),
    #[error("{name} is outside its range for this space: {reason}")]
    OutOfRange { name: String, reason: String },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// The functions conditions are imposed on. On a tensor t*u.v the value is
/// t*F(u, v); on a projective point [v] it is F(v, v).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FormId {
    /// gamma_i = omega(v_{m+1-i}, u_i)
    Gamma(usize),
    /// gamma_1 + ... + gamma_i
    GammaSum(usize),
    /// omega(phi_m v_m, u_m)
    FrobTop,
    /// omega(phi_i v_i, u_{m-i})
    PhiPair(usize),
    QFull,
    /// q restricted to M_i + ... + M_{m-i}
    QRange(usize),
    Q0,
    Ql,
    /// (phi_{l-i} ... phi_0 v_0, v_{m-l+i-1})
    OmegaChain(usize),
    /// (phi_i v_i, v_{m-i-1})
    OrthPair(usize),
}

impl fmt::Display for FormId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormId::Gamma(i) => write!(f, "gamma_{i}"),
            FormId::GammaSum(i) => write!(f, "gamma'_{i}"),
            FormId::FrobTop => write!(f, "omega(phi_m v_m, u_m)"),
            FormId::PhiPair(i) => write!(f, "omega(phi_{i} v_{i}, u_m-{i})"),
            FormId::QFull => write!(f, "q"),
            FormId::QRange(i) => write!(f, "q[{i},m-{i}]"),
            FormId::Q0 => write!(f, "q_0"),
            FormId::Ql => write!(f, "q_l"),
            FormId::OmegaChain(i) => write!(f, "omega_{i}"),
            FormId::OrthPair(i) => write!(f, "(phi_{i} v_{i}, v_m-{i}-1)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "=0")]
    Eq0,
    #[serde(rename = "=1")]
    Eq1,
    #[serde(rename = "!=0")]
    Ne0,
    #[serde(rename = "!=1")]
    Ne1,
}

impl Relation {
    pub fn is_homogeneous(self) -> bool {
        matches!(self, Relation::Eq0 | Relation::Ne0)
    }

    pub fn holds(self, value: u32) -> bool {
        match self {
            Relation::Eq0 => value == 0,
            Relation::Ne0 => value != 0,
            Relation::Eq1 => value == 1,
            Relation::Ne1 => value != 1,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Eq0 => "= 0",
            Relation::Eq1 => "= 1",
            Relation::Ne0 => "!= 0",
            Relation::Ne1 => "!= 1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Condition {
    pub form: FormId,
    pub relation: Relation,
}

impl Condition {
    pub fn new(form: FormId, relation: Relation) -> Self {
        Condition { form, relation }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ambient {
    /// Sym^2_{<=1} of the sum of the listed pieces.
    TensorCone(Vec<usize>),
    /// P of the sum of the listed pieces.
    Projective(Vec<usize>),
}

impl Ambient {
    pub fn pieces(&self) -> &[usize] {
        match self {
            Ambient::TensorCone(p) | Ambient::Projective(p) => p,
        }
    }

    pub fn is_projective(&self) -> bool {
        matches!(self, Ambient::Projective(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum TensorModel {
    /// u.v with u and v parallel
    #[default]
    #[serde(rename = "PARALLEL")]
    Parallel,
    /// all u.v, classes up to scaling and swapping the factors
    #[serde(rename = "DECOMPOSABLE")]
    Decomposable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum GammaModel {
    /// the formula on the ordered representative
    #[default]
    #[serde(rename = "RAW")]
    Raw,
    /// (F(u,v) + F(v,u)) / 2
    #[serde(rename = "SYMMETRIZED")]
    Symmetrized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Interpretation {
    pub tensor_model: TensorModel,
    pub gamma_model: GammaModel,
}

impl Interpretation {
    pub const PARALLEL_RAW: Interpretation =
        Interpretation { tensor_model: TensorModel::Parallel, gamma_model: GammaModel::Raw };

    pub fn all() -> [Interpretation; 3] {
        [
            Interpretation::PARALLEL_RAW,
            Interpretation { tensor_model: TensorModel::Decomposable, gamma_model: GammaModel::Raw },
            Interpretation { tensor_model: TensorModel::Decomposable, gamma_model: GammaModel::Symmetrized },
        ]
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = match self.tensor_model {
            TensorModel::Parallel => "PARALLEL",
            TensorModel::Decomposable => "DECOMPOSABLE",
        };
        let g = match self.gamma_model {
            GammaModel::Raw => "RAW",
            GammaModel::Symmetrized => "SYMMETRIZED",
        };
        write!(f, "{t}+{g}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarietySpec {
    pub name: String,
    pub ambient: Ambient,
    pub conditions: Vec<Condition>,
    #[serde(default)]
    pub interpretation: Interpretation,
    /// Overrides the default fitting degree (the ambient dimension).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_bound: Option<usize>,
}

impl VarietySpec {
    pub fn new(name: impl Into<String>, ambient: Ambient, conditions: Vec<Condition>) -> Self {
        VarietySpec {
            name: name.into(),
            ambient,
            conditions,
            interpretation: Interpretation::default(),
            degree_bound: None,
        }
    }

    pub fn with(mut self, form: FormId, relation: Relation) -> Self {
        self.conditions.push(Condition::new(form, relation));
        self
    }

    pub fn interpreted(mut self, interpretation: Interpretation) -> Self {
        self.interpretation = interpretation;
        self
    }

    pub fn coordinate_count(&self, space: &GradedSpace) -> usize {
        self.ambient.pieces().iter().map(|&i| space.piece_dim(i)).sum()
    }

    pub fn ambient_dimension(&self, space: &GradedSpace) -> usize {
        let n = self.coordinate_count(space);
        match (&self.ambient, self.interpretation.tensor_model) {
            (Ambient::TensorCone(_), TensorModel::Parallel) => n,
            (Ambient::Projective(_), TensorModel::Parallel) => n.saturating_sub(1),
            (Ambient::TensorCone(_), TensorModel::Decomposable) => (2 * n).saturating_sub(1),
            (Ambient::Projective(_), TensorModel::Decomposable) => (2 * n).saturating_sub(2),
        }
    }

    /// Fitting degree: explicit override, else the ambient dimension. Pair
    /// enumeration is too costly for the extra primes, so DECOMPOSABLE loci
    /// subtract one per equation.
    pub fn fit_degree(&self, space: &GradedSpace) -> usize {
        if let Some(d) = self.degree_bound {
            return d;
        }
        let dim = self.ambient_dimension(space);
        match self.interpretation.tensor_model {
            TensorModel::Parallel => dim,
            TensorModel::Decomposable => {
                let eqs = self.conditions.iter().filter(|c| matches!(c.relation, Relation::Eq0 | Relation::Eq1)).count();
                dim.saturating_sub(eqs)
            }
        }
    }

    pub fn validate(&self, space: &GradedSpace) -> Result<(), VarietyError> {
        for &i in self.ambient.pieces() {
            if !space.has_piece(i) {
                return Err(VarietyError::NoSuchPiece(i));
            }
        }
        for c in &self.conditions {
            if self.ambient.is_projective() && !c.relation.is_homogeneous() {
                return Err(VarietyError::InhomogeneousOnProjective { form: c.form, relation: c.relation });
            }
            CompiledForm::layout_check(space, &self.ambient, c.form)?;
        }
        Ok(())
    }
}

/// Cone to projective ambient; every condition must be scale invariant.
pub fn projectivize(spec: &VarietySpec) -> Result<VarietySpec, VarietyError> {
    if let Some(c) = spec.conditions.iter().find(|c| !c.relation.is_homogeneous()) {
        return Err(VarietyError::InhomogeneousCondition { form: c.form, relation: c.relation });
    }
    let mut out = spec.clone();
    out.name = format!("P({})", spec.name);
    out.ambient = Ambient::Projective(spec.ambient.pieces().to_vec());
    out.degree_bound = spec.degree_bound.map(|d| d.saturating_sub(1));
    Ok(out)
}

/// F(u, v) = sum c * u[a] * v[b] on ambient coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledForm {
    pub id: FormId,
    pub terms: Vec<(usize, usize, u32)>,
}

impl CompiledForm {
    fn offsets(space: &GradedSpace, ambient: &Ambient) -> Vec<Option<usize>> {
        let mut out = vec![None; space.first_index() + space.m];
        let mut off = 0;
        for &i in ambient.pieces() {
            out[i] = Some(off);
            off += space.piece_dim(i);
        }
        out
    }

    fn pieces_needed(space: &GradedSpace, form: FormId) -> Result<Vec<usize>, VarietyError> {
        let m = space.m;
        let l = space.l();
        let sym = space.is_symplectic();
        let need_sym = |ok: bool| if sym && ok { Ok(()) } else { Err(VarietyError::WrongFamily(form)) };
        let need_orth = |ok: bool| if !sym && ok { Ok(()) } else { Err(VarietyError::WrongFamily(form)) };
        Ok(match form {
            FormId::Gamma(i) => {
                need_sym(i >= 1 && i <= l)?;
                vec![i, m + 1 - i]
            }
            FormId::GammaSum(i) => {
                need_sym(i >= 1 && i <= l)?;
                (1..=i).flat_map(|j| [j, m + 1 - j]).collect()
            }
            FormId::FrobTop => {
                need_sym(true)?;
                vec![m]
            }
            FormId::PhiPair(i) => {
                need_sym(i >= 1 && i <= l)?;
                vec![i, m - i]
            }
            // quadratic forms restrict to whatever part of their support is present
            FormId::QFull => {
                need_orth(true)?;
                vec![]
            }
            FormId::QRange(i) => {
                need_orth(i <= l)?;
                vec![]
            }
            FormId::Q0 => {
                need_orth(true)?;
                vec![0]
            }
            FormId::Ql => {
                need_orth(true)?;
                vec![l]
            }
            FormId::OmegaChain(i) => {
                need_orth(i >= 1 && i <= l)?;
                vec![0, m - l + i - 1]
            }
            FormId::OrthPair(i) => {
                need_orth(i < l)?;
                vec![i, m - i - 1]
            }
        })
    }

    fn layout_check(space: &GradedSpace, ambient: &Ambient, form: FormId) -> Result<(), VarietyError> {
        for piece in Self::pieces_needed(space, form)? {
            if !ambient.pieces().contains(&piece) {
                return Err(VarietyError::MissingPiece { form, piece });
            }
        }
        Ok(())
    }

    pub fn compile(
        space: &GradedSpace,
        phi: &StableFunctional,
        ambient: &Ambient,
        form: FormId,
    ) -> Result<CompiledForm, VarietyError> {
        Self::layout_check(space, ambient, form)?;
        let field = phi.field();
        let off = Self::offsets(space, ambient);
        let at = |piece: usize, a: usize| off[piece].unwrap() + a;
        let present = |piece: usize| off[piece].is_some();
        let (m, l) = (space.m, space.l());
        let mut terms: Vec<(usize, usize, u32)> = Vec::new();
        let mut push = |u: usize, v: usize, c: i64| {
            let c = field.reduce(c);
            if c != 0 {
                terms.push((u, v, c));
            }
        };
        // (phi_src v_src) paired against u_partner
        let map_pair = |push: &mut dyn FnMut(usize, usize, i64), mat: &crate::linalg::Matrix, src: usize, dst: usize, partner: usize| {
            for c in 0..mat.rows {
                let sign = space.pairing(dst, c, partner, c);
                for b in 0..mat.cols {
                    let e = mat.get(c, b) as i64;
                    if e != 0 {
                        push(at(partner, c), at(src, b), sign * e);
                    }
                }
            }
        };
        match form {
            FormId::Gamma(i) => {
                for a in 0..space.d {
                    push(at(i, a), at(m + 1 - i, a), space.pairing(m + 1 - i, a, i, a));
                }
            }
            FormId::GammaSum(i) => {
                for j in 1..=i {
                    for a in 0..space.d {
                        push(at(j, a), at(m + 1 - j, a), space.pairing(m + 1 - j, a, j, a));
                    }
                }
            }
            FormId::FrobTop => map_pair(&mut push, phi.phi(space, m), m, 1, m),
            FormId::PhiPair(i) => map_pair(&mut push, phi.phi(space, i), i, i + 1, m - i),
            FormId::QFull | FormId::QRange(_) | FormId::Q0 | FormId::Ql => {
                let lo = match form {
                    FormId::QRange(i) if i > 0 => i,
                    FormId::Ql => l,
                    _ => 0,
                };
                let with_diag0 = matches!(form, FormId::QFull | FormId::Q0) || form == FormId::QRange(0);
                let with_pairs = !matches!(form, FormId::Q0 | FormId::Ql);
                let with_diagl = form != FormId::Q0;
                if with_diag0 && present(0) {
                    for (a, e) in space.diag_signs(0).into_iter().enumerate() {
                        push(at(0, a), at(0, a), e);
                    }
                }
                if with_diagl && present(l) {
                    for (a, e) in space.diag_signs(l).into_iter().enumerate() {
                        push(at(l, a), at(l, a), e);
                    }
                }
                if with_pairs {
                    for j in (lo.max(1)..l).filter(|&j| present(j) && present(m - j)) {
                        for a in 0..space.piece_dim(j) {
                            push(at(j, a), at(m - j, a), 1);
                        }
                    }
                }
            }
            FormId::OmegaChain(i) => {
                let steps = l - i + 1;
                let a = phi.composite(space, 0, steps);
                map_pair(&mut push, &a, 0, steps % m, m - l + i - 1);
            }
            FormId::OrthPair(i) => map_pair(&mut push, phi.phi(space, i), i, (i + 1) % m, m - i - 1),
        }
        Ok(CompiledForm { id: form, terms })
    }

    #[inline]
    pub fn eval(&self, field: &Field, u: &[u32], v: &[u32]) -> u32 {
        let p = field.p() as u64;
        let mut acc = 0u64;
        for &(a, b, c) in &self.terms {
            acc = (acc + (c as u64 * u[a] as u64 % p) * v[b] as u64) % p;
        }
        acc as u32
    }
}

/// Value of `form` at a point of `ambient`, in the given interpretation.
pub fn form_value(
    space: &GradedSpace,
    phi: &StableFunctional,
    ambient: &Ambient,
    form: FormId,
    point: &Point,
    gamma_model: GammaModel,
) -> Result<u32, VarietyError> {
    let compiled = CompiledForm::compile(space, phi, ambient, form)?;
    let field = phi.field();
    let raw = |u: &[u32], v: &[u32]| match gamma_model {
        GammaModel::Raw => compiled.eval(&field, u, v),
        GammaModel::Symmetrized => {
            let s = field.add(compiled.eval(&field, u, v), compiled.eval(&field, v, u));
            field.mul(s, field.inv(2).unwrap())
        }
    };
    Ok(match point {
        Point::Zero => 0,
        Point::Tensor { t, u, v } => field.mul(*t, raw(u, v)),
        Point::Projective { u, v } => raw(u, v),
    })
}

/// gamma_i at a point of a tensor cone.
pub fn gamma(
    space: &GradedSpace,
    phi: &StableFunctional,
    ambient: &Ambient,
    i: usize,
    point: &Point,
) -> Result<u32, VarietyError> {
    form_value(space, phi, ambient, FormId::Gamma(i), point, GammaModel::Raw)
}
