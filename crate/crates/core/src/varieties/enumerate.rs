use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CompiledForm, GammaModel, Relation, TensorModel, VarietyError, VarietySpec};
use crate::ffield::{Budget, Field};
use crate::spaces::{GradedSpace, StableFunctional};

/// One F_p-point of a locus. Lines are normalized (first nonzero entry 1).
/// Parallel tensors have u == v.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Point {
    Zero,
    Tensor { t: u32, u: Vec<u32>, v: Vec<u32> },
    Projective { u: Vec<u32>, v: Vec<u32> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CountReport {
    pub count: u64,
    /// Pairs u != v whose membership changes when the factors are swapped
    /// (DECOMPOSABLE + RAW only).
    pub swap_violations: u64,
}

fn line_blocks(n: usize, p: u32) -> Vec<(usize, Option<u32>)> {
    let mut out = Vec::new();
    for k in 0..n {
        if k + 1 < n {
            out.extend((0..p).map(|x| (k, Some(x))));
        } else {
            out.push((k, None));
        }
    }
    out
}

fn for_each_line_in_block(n: usize, p: u32, block: (usize, Option<u32>), mut f: impl FnMut(&[u32])) {
    let (k, second) = block;
    let mut v = vec![0u32; n];
    v[k] = 1;
    let fixed = match second {
        Some(x) => {
            v[k + 1] = x;
            k + 2
        }
        None => k + 1,
    };
    loop {
        f(&v);
        if !crate::ffield::odometer(&mut v[fixed..], p) {
            break;
        }
    }
}

/// All normalized nonzero vectors of F_p^n, i.e. the points of P^{n-1}.
pub fn lines(field: &Field, n: usize, budget: Budget) -> Result<Vec<Vec<u32>>, VarietyError> {
    let p = field.p();
    budget.check(((p as u128).pow(n as u32) - 1) / (p as u128 - 1))?;
    let mut out = Vec::new();
    for b in line_blocks(n, p) {
        for_each_line_in_block(n, p, b, |v| out.push(v.to_vec()));
    }
    Ok(out)
}

struct Compiled {
    forms: Vec<(CompiledForm, Relation)>,
    field: Field,
    cone: bool,
    gamma_model: GammaModel,
}

impl Compiled {
    fn new(spec: &VarietySpec, space: &GradedSpace, phi: &StableFunctional) -> Result<Self, VarietyError> {
        spec.validate(space)?;
        let forms = spec
            .conditions
            .iter()
            .map(|c| Ok((CompiledForm::compile(space, phi, &spec.ambient, c.form)?, c.relation)))
            .collect::<Result<Vec<_>, VarietyError>>()?;
        Ok(Compiled {
            forms,
            field: phi.field(),
            cone: !spec.ambient.is_projective(),
            gamma_model: spec.interpretation.gamma_model,
        })
    }

    fn value(&self, form: &CompiledForm, u: &[u32], v: &[u32]) -> u32 {
        match self.gamma_model {
            GammaModel::Raw => form.eval(&self.field, u, v),
            GammaModel::Symmetrized => {
                let s = self.field.add(form.eval(&self.field, u, v), form.eval(&self.field, v, u));
                self.field.mul(s, (self.field.p() + 1) / 2)
            }
        }
    }

    fn zero_tensor_member(&self) -> bool {
        self.cone && self.forms.iter().all(|(_, r)| r.holds(0))
    }

    /// Number of admissible t (cone) or 0/1 (projective) over the pair.
    fn count_on(&self, u: &[u32], v: &[u32]) -> u64 {
        let p = self.field.p();
        if !self.cone {
            return self.forms.iter().all(|(f, r)| r.holds(self.value(f, u, v))) as u64;
        }
        // t*a = 1 pins t = 1/a; t*a != 1 removes 1/a; compare the a's directly
        let mut pinned: Option<u32> = None;
        let mut excluded: Vec<u32> = Vec::new();
        for (f, r) in &self.forms {
            let a = self.value(f, u, v);
            match r {
                Relation::Eq0 if a != 0 => return 0,
                Relation::Ne0 if a == 0 => return 0,
                Relation::Eq1 => {
                    if a == 0 || pinned.map_or(false, |b| b != a) {
                        return 0;
                    }
                    pinned = Some(a);
                }
                Relation::Ne1 if a != 0 && !excluded.contains(&a) => excluded.push(a),
                _ => {}
            }
        }
        match pinned {
            Some(a) => !excluded.contains(&a) as u64,
            None => (p - 1) as u64 - excluded.len() as u64,
        }
    }

    fn points_on(&self, u: &[u32], v: &[u32], out: &mut dyn FnMut(Point)) {
        if !self.cone {
            if self.count_on(u, v) == 1 {
                out(Point::Projective { u: u.to_vec(), v: v.to_vec() });
            }
            return;
        }
        if self.count_on(u, v) == 0 {
            return;
        }
        let vals: Vec<u32> = self.forms.iter().map(|(f, _)| self.value(f, u, v)).collect();
        for t in 1..self.field.p() {
            let ok = self.forms.iter().zip(&vals).all(|((_, r), &a)| r.holds(self.field.mul(t, a)));
            if ok {
                out(Point::Tensor { t, u: u.to_vec(), v: v.to_vec() });
            }
        }
    }
}

fn check_budget(spec: &VarietySpec, space: &GradedSpace, p: u32, budget: Budget) -> Result<(), VarietyError> {
    let n = spec.coordinate_count(space) as u32;
    let lines = ((p as u128).pow(n) - 1) / (p as u128 - 1);
    let work = match spec.interpretation.tensor_model {
        TensorModel::Parallel => lines,
        TensorModel::Decomposable => lines * (lines + 1) / 2,
    };
    budget.check(work)?;
    Ok(())
}

/// Exact number of F_p-points of the locus at the functional's prime.
pub fn count_points(
    spec: &VarietySpec,
    space: &GradedSpace,
    phi: &StableFunctional,
    budget: Budget,
) -> Result<u64, VarietyError> {
    Ok(count_report(spec, space, phi, budget)?.count)
}

pub fn count_report(
    spec: &VarietySpec,
    space: &GradedSpace,
    phi: &StableFunctional,
    budget: Budget,
) -> Result<CountReport, VarietyError> {
    let c = Compiled::new(spec, space, phi)?;
    let p = c.field.p();
    check_budget(spec, space, p, budget)?;
    let n = spec.coordinate_count(space);
    let zero = c.zero_tensor_member() as u64;
    if n == 0 {
        return Ok(CountReport { count: zero, swap_violations: 0 });
    }
    match spec.interpretation.tensor_model {
        TensorModel::Parallel => {
            let count: u64 = line_blocks(n, p)
                .into_par_iter()
                .map(|b| {
                    let mut s = 0u64;
                    for_each_line_in_block(n, p, b, |v| s += c.count_on(v, v));
                    s
                })
                .sum();
            Ok(CountReport { count: count + zero, swap_violations: 0 })
        }
        TensorModel::Decomposable => {
            let all = lines(&c.field, n, budget)?;
            let track_swaps = c.gamma_model == GammaModel::Raw;
            let (count, swaps) = (0..all.len())
                .into_par_iter()
                .map(|i| {
                    let (mut s, mut w) = (0u64, 0u64);
                    for j in i..all.len() {
                        let k = c.count_on(&all[i], &all[j]);
                        s += k;
                        if track_swaps && i != j && k != c.count_on(&all[j], &all[i]) {
                            w += 1;
                        }
                    }
                    (s, w)
                })
                .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
            Ok(CountReport { count: count + zero, swap_violations: swaps })
        }
    }
}

/// Visits every point of the locus once, sequentially in enumeration order.
pub fn for_each_point(
    spec: &VarietySpec,
    space: &GradedSpace,
    phi: &StableFunctional,
    budget: Budget,
    mut f: impl FnMut(Point),
) -> Result<(), VarietyError> {
    let c = Compiled::new(spec, space, phi)?;
    let p = c.field.p();
    check_budget(spec, space, p, budget)?;
    let n = spec.coordinate_count(space);
    if c.zero_tensor_member() {
        f(Point::Zero);
    }
    if n == 0 {
        return Ok(());
    }
    match spec.interpretation.tensor_model {
        TensorModel::Parallel => {
            for b in line_blocks(n, p) {
                for_each_line_in_block(n, p, b, |v| c.points_on(v, v, &mut f));
            }
        }
        TensorModel::Decomposable => {
            let all = lines(&c.field, n, budget)?;
            for i in 0..all.len() {
                for j in i..all.len() {
                    c.points_on(&all[i], &all[j], &mut f);
                }
            }
        }
    }
    Ok(())
}

pub fn enum_variety(
    spec: &VarietySpec,
    space: &GradedSpace,
    phi: &StableFunctional,
    budget: Budget,
) -> Result<Vec<Point>, VarietyError> {
    let mut out = Vec::new();
    for_each_point(spec, space, phi, budget, |pt| out.push(pt))?;
    Ok(out)
}
