use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GradedSpace, SpaceError};
use crate::ffield::Field;
use crate::linalg::{diagonalize_symmetric, pencil_determinant, split_condition, Matrix};

pub const MAX_ATTEMPTS: usize = 4000;

/// phi = (phi_i) with phi_i : M_i -> M_{i+1} (indices cyclic), plus the two
/// quadratic forms whose pencil defines general position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StableFunctional {
    pub p: u32,
    pub seed: u64,
    /// `maps[k]` is phi_{first_index + k}, a (dim M_{i+1}) x (dim M_i) matrix.
    pub maps: Vec<Matrix>,
    pub certificate: Option<Certificate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankCheck {
    pub map: usize,
    pub rank: usize,
    pub max_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub p: u32,
    pub ranks: Vec<RankCheck>,
    pub ranks_ok: bool,
    /// delta(lambda) = det(lambda S_a - S_b), low degree first.
    pub pencil: Vec<u32>,
    pub squarefree: bool,
    pub roots: Vec<u32>,
    pub split: bool,
    pub passed: bool,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCheck {
    pub name: String,
    pub ok: bool,
}

impl StableFunctional {
    pub fn field(&self) -> Field {
        Field::new(self.p as u64).expect("functional built over a valid field")
    }

    pub fn phi(&self, space: &GradedSpace, i: usize) -> &Matrix {
        &self.maps[i - space.first_index()]
    }

    /// Composite phi_{j-1} ... phi_i : M_i -> M_j (j > i, indices taken mod m).
    pub fn composite(&self, space: &GradedSpace, i: usize, steps: usize) -> Matrix {
        let field = self.field();
        let mut acc = Matrix::identity(space.piece_dim(i));
        let mut cur = i;
        for _ in 0..steps {
            acc = self.phi(space, cur).mul(&field, &acc);
            cur = next_index(space, cur);
        }
        acc
    }

    /// Gram matrices (x^T S x convention) of the two pencil forms.
    ///
    /// Symplectic: Q_a(v) = omega(phi_m v, v) on M_m and Q_b = pullback of
    /// omega(phi_l w, w) along T = phi_{l-1}...phi_1 phi_m.
    /// Orthogonal: q_0 and the pullback of q_l along A = phi_{l-1}...phi_0.
    pub fn pencil_forms(&self, space: &GradedSpace) -> (Matrix, Matrix) {
        let field = self.field();
        let l = space.l();
        if space.is_symplectic() {
            let m = space.m;
            let sign_a = space.pairing(1, 0, m, 0);
            let sa = symmetrize(&field, self.phi(space, m)).scale(&field, field.reduce(sign_a));
            let sign_l = space.pairing(l + 1, 0, l, 0);
            let sl = symmetrize(&field, self.phi(space, l)).scale(&field, field.reduce(sign_l));
            let t = self.composite(space, m, l);
            let sb = t.transpose().mul(&field, &sl).mul(&field, &t);
            (sa, sb)
        } else {
            let sa = Matrix::diag(&field, &space.diag_signs(0));
            let dl = Matrix::diag(&field, &space.diag_signs(l));
            let a = self.composite(space, 0, l);
            let sb = a.transpose().mul(&field, &dl).mul(&field, &a);
            (sa, sb)
        }
    }
}

fn next_index(space: &GradedSpace, i: usize) -> usize {
    if space.is_symplectic() {
        if i == space.m {
            1
        } else {
            i + 1
        }
    } else {
        (i + 1) % space.m
    }
}

fn symmetrize(field: &Field, m: &Matrix) -> Matrix {
    let half = field.inv(2).unwrap();
    Matrix::from_fn(m.rows, m.cols, |r, c| field.mul(field.add(m.get(r, c), m.get(c, r)), half))
}

/// Stability check: maximal ranks, squarefree and fully split pencil.
pub fn check_stability(space: &GradedSpace, phi: &StableFunctional) -> Result<Certificate, SpaceError> {
    let field = Field::new(phi.p as u64)?;
    if phi.maps.len() != space.m {
        return Err(SpaceError::ShapeMismatch(format!("expected {} maps, got {}", space.m, phi.maps.len())));
    }
    let mut ranks = Vec::new();
    for i in space.indices() {
        let mat = phi.phi(space, i);
        let (src, dst) = (space.piece_dim(i), space.piece_dim(next_index(space, i)));
        if mat.rows != dst || mat.cols != src {
            return Err(SpaceError::ShapeMismatch(format!(
                "phi_{i} is {}x{}, expected {dst}x{src}",
                mat.rows, mat.cols
            )));
        }
        ranks.push(RankCheck { map: i, rank: mat.rank(&field), max_rank: src.min(dst) });
    }
    let ranks_ok = ranks.iter().all(|r| r.rank == r.max_rank);
    let (sa, sb) = phi.pencil_forms(space);
    if (phi.p as usize) <= sa.rows {
        // too few residues for a pencil with distinct roots
        return Ok(Certificate {
            p: phi.p,
            ranks,
            ranks_ok,
            pencil: Vec::new(),
            squarefree: false,
            roots: Vec::new(),
            split: false,
            passed: false,
            failure: Some(if ranks_ok { "p too small for the pencil".into() } else { "rank".into() }),
        });
    }
    let delta = pencil_determinant(&field, &sa, &sb);
    let deriv = delta.derivative(&field);
    let squarefree = delta.degree().is_some() && delta.gcd(&field, &deriv).degree() == Some(0);
    let roots_m = delta.roots_with_multiplicity(&field);
    let roots: Vec<u32> = roots_m.iter().map(|r| r.0).collect();
    let total: usize = roots_m.iter().map(|r| r.1).sum();
    let split = delta.degree() == Some(total) && total == sa.rows;
    let failure = if !ranks_ok {
        Some("rank".to_string())
    } else if !squarefree {
        Some("squarefree".to_string())
    } else if !split {
        Some("split".to_string())
    } else {
        None
    };
    Ok(Certificate {
        p: phi.p,
        ranks,
        ranks_ok,
        pencil: delta.coeffs.clone(),
        squarefree,
        roots,
        split,
        passed: failure.is_none(),
        failure,
    })
}

/// Conditions making the finite Galois sets attached to the loci rational,
/// so that point counts are the split polynomials. Empty list = nothing to check.
pub fn split_certificate(space: &GradedSpace, phi: &StableFunctional) -> Vec<SplitCheck> {
    let field = phi.field();
    let mut out = Vec::new();
    let mut push = |name: String, cond: Option<bool>| {
        if let Some(ok) = cond {
            out.push(SplitCheck { name, ok });
        }
    };
    if space.is_symplectic() {
        let (sa, _) = phi.pencil_forms(space);
        push("Q_a split".into(), split_condition(&field, &diagonalize_symmetric(&field, &sa)));
        let l = space.l();
        let ql = symmetrize(&field, phi.phi(space, l));
        push("Q_l split".into(), split_condition(&field, &diagonalize_symmetric(&field, &ql)));
        return out;
    }
    let l = space.l();
    let (e0, el) = (space.diag_signs(0), space.diag_signs(l));
    let (a0, al) = (e0.len(), el.len());
    let n = a0 + al;
    let field_ref = &field;
    let diag_split = |v: &[i64]| split_condition(field_ref, &v.iter().map(|&x| field_ref.reduce(x)).collect::<Vec<_>>());
    push("q_0 split".into(), diag_split(&e0));
    push("q_l split".into(), diag_split(&el));
    let both: Vec<i64> = e0.iter().chain(el.iter()).copied().collect();
    push("q_0+q_l split".into(), diag_split(&both));

    // W_1 pencil: Q = q_0 + q_l against R(v) = (A v_0, v_l). For N = 2 the
    // base locus of a squarefree pencil is empty, so nothing depends on roots.
    let a = phi.composite(space, 0, l);
    let dl = Matrix::diag(&field, &el);
    let da = dl.mul(&field, &a); // al x a0
    let sq = Matrix::diag(&field, &both);
    let sr = Matrix::from_fn(n, n, |r, c| match (r < a0, c < a0) {
        (true, false) => da.get(c - a0, r),
        (false, true) => da.get(r - a0, c),
        _ => 0,
    });
    if field.p() as usize <= n {
        // too few points to interpolate the W_1 pencil
        push("W_1 pencil splits".into(), Some(false));
        return out;
    }
    let delta = pencil_determinant(&field, &sq, &sr);
    let roots = if n > 2 { delta.roots_with_multiplicity(&field) } else { Vec::new() };
    let total: usize = roots.iter().map(|r| r.1).sum();
    push("W_1 pencil splits".into(), (n > 2).then_some(total == n));
    for (lam, _) in &roots {
        let member = sq.scale(&field, *lam).sub(&field, &sr);
        push(format!("member {lam} rulings"), split_condition(&field, &diagonalize_symmetric(&field, &member)));
        let ker = member.kernel(&field);
        if ker.len() >= 2 && ker.len() % 2 == 0 {
            let kmat = Matrix::from_fn(n, ker.len(), |r, c| ker[c][r]);
            let restricted = kmat.transpose().mul(&field, &sq).mul(&field, &kmat);
            let dg = diagonalize_symmetric(&field, &restricted);
            if dg.iter().all(|&x| x != 0) {
                push(format!("member {lam} vertex"), split_condition(&field, &dg));
            }
        }
    }

    // fibres of W_{1,1} over the two isotropic lines of q_0
    if a0 == 2 && (al - 1) % 2 == 0 && al > 1 {
        let q0 = |y: &[u32]| {
            let mut s = 0u32;
            for k in 0..2 {
                s = field.add(s, field.mul(field.reduce(e0[k]), field.mul(y[k], y[k])));
            }
            s
        };
        let lines: Vec<[u32; 2]> =
            std::iter::once([0u32, 1]).chain((0..field.p()).map(|t| [1, t])).filter(|y| q0(y) == 0).collect();
        for y in lines {
            let img = a.apply(&field, &y);
            let ql: u32 = (0..al).fold(0, |s, k| field.add(s, field.mul(field.reduce(el[k]), field.mul(img[k], img[k]))));
            if ql == 0 {
                continue;
            }
            let row = Matrix::from_fn(1, al, |_, c| field.mul(field.reduce(el[c]), img[c]));
            let perp = row.kernel(&field);
            let pm = Matrix::from_fn(al, perp.len(), |r, c| perp[c][r]);
            let restricted = pm.transpose().mul(&field, &dl).mul(&field, &pm);
            push(
                format!("fibre over [{}:{}]", y[0], y[1]),
                split_condition(&field, &diagonalize_symmetric(&field, &restricted)),
            );
        }
    }
    out
}

fn rng_for(seed: u64, p: u32, attempt: usize) -> ChaCha8Rng {
    let mix = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((p as u64) << 32) ^ attempt as u64;
    ChaCha8Rng::seed_from_u64(mix)
}

fn random_invertible(field: &Field, n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    loop {
        let m = Matrix::from_fn(n, n, |_, _| rng.gen_range(0..field.p()));
        if m.det(field) != 0 {
            return m;
        }
    }
}

/// Deterministic in (space, seed, p). With `split = true` the result also
/// passes `split_certificate`, which is what point counting needs.
pub fn build_stable_functional(
    space: &GradedSpace,
    seed: u64,
    p: u32,
    split: bool,
) -> Result<StableFunctional, SpaceError> {
    let field = Field::new(p as u64)?;
    let need = space.d.max(space.piece_dim(space.first_index())) + 2;
    if (p as usize) <= need {
        return Err(SpaceError::NoStableFound { p, attempts: 0, reason: format!("p must exceed {need}") });
    }
    let attempts = MAX_ATTEMPTS;
    for attempt in 0..attempts {
        let mut rng = rng_for(seed, p, attempt);
        let mut phi = if space.is_symplectic() {
            symplectic_candidate(space, &field, seed, attempt, &mut rng)
        } else {
            orthogonal_candidate(space, &field, seed, &mut rng)
        };
        let cert = check_stability(space, &phi)?;
        if !cert.passed {
            continue;
        }
        if split && !split_certificate(space, &phi).iter().all(|c| c.ok) {
            continue;
        }
        phi.certificate = Some(cert);
        return Ok(phi);
    }
    Err(SpaceError::NoStableFound {
        p,
        attempts,
        reason: if split { "no split model".into() } else { "no stable candidate".into() },
    })
}

/// For trace sums only: below the pencil-root bound, the first seeded
/// candidate whose maps have maximal rank. The certificate records that the
/// pencil was not checked.
pub fn build_trace_functional(space: &GradedSpace, seed: u64, p: u32) -> Result<StableFunctional, SpaceError> {
    let need = space.d.max(space.piece_dim(space.first_index())) + 2;
    if p as usize > need {
        return build_stable_functional(space, seed, p, false);
    }
    let field = Field::new(p as u64)?;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = rng_for(seed, p, attempt);
        let mut phi = if space.is_symplectic() {
            symplectic_candidate(space, &field, seed, attempt, &mut rng)
        } else {
            orthogonal_candidate(space, &field, seed, &mut rng)
        };
        let cert = check_stability(space, &phi)?;
        if cert.ranks_ok {
            phi.certificate = Some(cert);
            return Ok(phi);
        }
    }
    Err(SpaceError::NoStableFound { p, attempts: MAX_ATTEMPTS, reason: "no maximal-rank candidate".into() })
}

/// Roots 1..d first; later attempts draw distinct residues, which is needed
/// when the discriminant class of 1..d keeps Q_l from splitting.
fn symplectic_candidate(
    space: &GradedSpace,
    field: &Field,
    seed: u64,
    attempt: usize,
    rng: &mut ChaCha8Rng,
) -> StableFunctional {
    let (d, m, l) = (space.d, space.m, space.l());
    let eps: Vec<i64> = (0..d).map(|k| if k % 2 == 0 { 1 } else { -1 }).collect();
    let mut roots: Vec<i64> = if attempt == 0 {
        (1..=d as i64).collect()
    } else {
        let mut pool: Vec<i64> = (1..field.p() as i64).collect();
        pool.shuffle(rng);
        pool.truncate(d);
        pool
    };
    roots.shuffle(rng);
    let mut maps: Vec<Option<Matrix>> = vec![None; m];
    let slot = |i: usize| i - 1;
    let phi_m = Matrix::diag(field, &eps);
    maps[slot(m)] = Some(phi_m.clone());
    let mut t = phi_m;
    for i in 1..l {
        let mi = random_invertible(field, d, rng);
        t = mi.mul(field, &t);
        maps[slot(i)] = Some(mi);
    }
    // phi_l chosen so that T^T S_l T = diag(eps_j mu_j)
    let target = Matrix::diag(field, &eps.iter().zip(&roots).map(|(e, r)| e * r).collect::<Vec<_>>());
    let tinv = t.inverse(field).expect("T invertible");
    let sl = tinv.transpose().mul(field, &target).mul(field, &tinv);
    let sign_l = space.pairing(l + 1, 0, l, 0);
    maps[slot(l)] = Some(sl.scale(field, field.reduce(sign_l)));
    // arrows fixed by tau-invariance; they enter no locus or sum used here
    for i in 1..l {
        let dual = maps[slot(i)].as_ref().unwrap().transpose();
        maps[slot(m - i)] = Some(dual);
    }
    StableFunctional { p: field.p(), seed, maps: maps.into_iter().map(|x| x.unwrap()).collect(), certificate: None }
}

fn orthogonal_candidate(space: &GradedSpace, field: &Field, seed: u64, rng: &mut ChaCha8Rng) -> StableFunctional {
    let (d, m, l) = (space.d, space.m, space.l());
    let (a0, al) = (space.piece_dim(0), space.piece_dim(l));
    let r = if l == 1 { a0.min(al) } else { a0.min(al).min(d) };
    let mut ys: Vec<usize> = (0..a0).collect();
    ys.shuffle(rng);
    let mut zs: Vec<usize> = (0..al).collect();
    zs.shuffle(rng);
    let cs: Vec<u32> = (0..r).map(|_| rng.gen_range(1..field.p())).collect();
    let mut maps: Vec<Matrix> = Vec::with_capacity(m);
    if l == 1 {
        let mut a = Matrix::zeros(al, a0);
        for k in 0..r {
            a.set(zs[k], ys[k], cs[k]);
        }
        maps.push(a);
    } else {
        let mut first = Matrix::zeros(d, a0);
        for k in 0..r {
            first.set(k, ys[k], cs[k]);
        }
        maps.push(first);
        for _ in 1..l - 1 {
            maps.push(Matrix::identity(d));
        }
        let mut last = Matrix::zeros(al, d);
        for k in 0..r {
            last.set(zs[k], k, 1);
        }
        maps.push(last);
    }
    // phi_{m-1-i} = -phi_i^* under the pairing identifications; only ranks matter
    for i in (0..l).rev() {
        let t = maps[i].transpose();
        maps.push(t.scale(field, field.p() - 1));
    }
    StableFunctional { p: field.p(), seed, maps, certificate: None }
}
