use serde::Serialize;

use super::{chi_class, chi_combine, cited, ChiExpr, ClassKind, Rule, SymbolicError};
use crate::spaces::{Family, Profile};

const IDS: [&str; 11] = [
    "lemma-sym-square",
    "lemma-gamma1",
    "lemma-gamma1prime",
    "lemma-two-quadrics",
    "prop-m-ge-3",
    "prop-m-eq-2",
    "lemma-orth-Q1",
    "lemma-orth-W11",
    "thm-orth",
    "table1-row",
    "thm-sp",
];

pub fn derivation_ids() -> &'static [&'static str] {
    &IDS
}

/// Inputs of a derivation. Symplectic scripts read `d` (and `m` or `n` where
/// the domain depends on it); orthogonal ones read `family`, `d`, `profile`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DerivationParams {
    pub family: Family,
    pub d: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    pub profile: Profile,
}

impl DerivationParams {
    pub fn symplectic(d: usize) -> Self {
        DerivationParams { family: Family::C, d, n: None, m: None, profile: Profile::NonDegenerate }
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = Some(m);
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn orthogonal(family: Family, d: usize, profile: Profile) -> Self {
        DerivationParams { family, d, n: None, m: None, profile }
    }
}

/// dims of M_0 and M_l for (family, d, profile), if that profile occurs.
pub fn orthogonal_dims(family: Family, d: usize, profile: Profile) -> Option<(usize, usize)> {
    let even = d % 2 == 0;
    match (family, profile) {
        (Family::B, Profile::NonDegenerate) if even => Some((d, d + 1)),
        (Family::B, Profile::NonDegenerate) => Some((d + 1, d)),
        (Family::D, Profile::NonDegenerate) if even => Some((d, d)),
        (Family::D, Profile::Degenerate) if !even => Some((d + 1, d + 1)),
        (Family::D2, Profile::NonDegenerate) if !even => Some((d, d)),
        (Family::D2, Profile::Degenerate) if even => Some((d + 1, d + 1)),
        _ => None,
    }
}

fn out_of_domain(id: &str, reason: impl Into<String>) -> SymbolicError {
    SymbolicError::OutOfDomain { id: id.to_string(), reason: reason.into() }
}

fn combine(rule: Rule, parts: &[ChiExpr], label: &str, citation: &str) -> ChiExpr {
    chi_combine(rule, parts).expect("scripts pass the right number of parts").labelled(label, citation)
}

fn class(kind: ClassKind, label: &str, citation: &str) -> ChiExpr {
    chi_class(kind).labelled(label, citation)
}

fn sym_square() -> ChiExpr {
    class(
        ClassKind::AffineCone("P(M_1+M_m)".into()),
        "Sym2(M_1+M_m)",
        "Lemma 4.5, \"is a cone over P(M_1⊕M_m)\"",
    )
}

fn gamma1(d: usize) -> ChiExpr {
    let c = "Lemma 4.6, \"χ_c(k*)·χ_c(M_1∖{0})=0\"";
    let torus = class(ClassKind::Torus, "fiber {v_m | ω(u_1,v_m)=1} ⊃ k*", c);
    let m1 = class(ClassKind::Affine(d), "M_1", c);
    let origin = class(ClassKind::Affine(0), "{0}", c);
    let base = combine(Rule::Additivity, &[m1, origin], "M_1∖{0}", c);
    combine(Rule::Fibration, &[torus, base], "Gamma_1", c)
}

fn gamma1_prime(d: usize) -> ChiExpr {
    let c = "Lemma 4.7, \"it is a projective quadric defined by the same homogenous equation\"";
    let torus = class(ClassKind::Torus, "k* fiber", c);
    let quadric = class(ClassKind::SmoothQuadric(2 * d as i64 - 2), "P(Gamma_1')", c);
    let punctured = combine(Rule::Fibration, &[torus, quadric], "Gamma_1' - {0}", c);
    let over_zero = sym_square().labelled("fiber over v_1=0: Sym2(M_m)", "Lemma 4.7, \"The fiber over v_1=0 is nothing but Sym^2_{≤1}(M_m)\"");
    combine(Rule::Sum(vec![1, 1]), &[punctured, over_zero], "Gamma_1'", c)
}

fn two_quadrics(d: usize) -> ChiExpr {
    let c = "Lemma 4.8, \"χ_c(Γ_1∩Γ_1')=-d\"";
    let cone = class(ClassKind::AffineCone("quadric meet hyperplane".into()), "fiber of Gamma_0 - V(v_1=0)", c);
    let base = class(ClassKind::Projective(d - 1), "P(M_1)", c);
    let open = combine(Rule::Fibration, &[cone, base], "Gamma_0 - V(v_1=0)", c);
    let closed = gamma1_prime(d).labelled("Gamma_0 meet V(v_1=0)", "Lemma 4.8, \"is 1 by Lemma 4.7\"");
    let gamma0 = combine(Rule::Sum(vec![1, 1]), &[open, closed], "Gamma_0", c);
    combine(Rule::Additivity, &[gamma1_prime(d), gamma0], "Gamma_1 meet Gamma_1'", c)
}

fn symplectic_top(d: usize, citation: &str, q2: &str) -> ChiExpr {
    combine(
        Rule::Sum(vec![-1, 1, 1, -1]),
        &[sym_square(), gamma1(d), gamma1_prime(d).labelled(q2, ""), two_quadrics(d)],
        "-chi_c(U_0)+chi_c(W_0)",
        citation,
    )
}

fn prop_m_eq_2(d: usize) -> ChiExpr {
    let c = "Prop. 4.4, \"χ_c(P(Ũ)) − χ_c(P(W̃))\"";
    let even = d % 2 == 0;
    let di = d as i64;
    let top = symplectic_top(d, "m = 2 proof, \"−χ_c(Sym²_{≤1}(M_1⊕M_2))+χ_c(Γ_1)+χ_c(Q_2)−χ_c(Γ_1∩Q_2) = d\"", "Q_2");

    let ambient = class(ClassKind::Projective(2 * d - 1), "P(M_1+M_2)", c);
    let p_gamma1 = combine(Rule::Additivity, &[ambient.clone(), ambient.clone()], "P(Gamma_1)", "m = 2 proof, \"2d-(2d-2d)\"");
    let pu0 = combine(Rule::Additivity, &[ambient, p_gamma1], "P(U_0)", c);

    let quadric_piece = |name: &str| {
        let pq = cited(
            if even { 2 * di } else { 2 * di - 1 },
            &format!("P({name})"),
            "m = 2 proof, \"χ_c(P(Q_1))=2d (when d is even, 2d−1 when d is odd)\"",
        );
        let m2 = class(ClassKind::Affine(d), "M_2", c);
        let hyperplane = class(ClassKind::Affine(d - 1), "hyperplane", c);
        let fiber = combine(Rule::Additivity, &[m2, hyperplane], "F_{v_1}", "m = 2 proof, \"χ_c(F_{v_1})=1−1=0\"");
        let meet = combine(Rule::Fibration, &[fiber, pq.clone()], &format!("P({name} meet Gamma_1)"), c);
        (pq, meet)
    };
    let (pq1, meet1) = quadric_piece("Q_1");
    let pu0p = combine(Rule::Additivity, &[pq1, meet1], "P(U_0')", c);
    let (pq2, meet2) = quadric_piece("Q_2");
    let pw0 = combine(Rule::Additivity, &[pq2, meet2], "P(W_0)", "m = 2 proof, \"by the same reason\"");

    // P(Q_1 meet Q_2) enters with both signs; the proof never evaluates it.
    let pq1q2 = cited(0, "P(Q_1 meet Q_2) (cancels)", c);
    let perp = cited(if even { 2 * di } else { 2 * di - 2 }, "Gamma_1^perp meet Q_1 meet Q_2", c);
    let pw0u0p = combine(
        Rule::Sum(vec![1, -1, 1]),
        &[pq1q2.clone(), pq1q2, perp],
        "P(W_0 meet U_0')",
        "m = 2 proof, \"= 2d if d is even, 2d−2 if d is odd\"",
    );
    let difference = combine(Rule::Sum(vec![1, -1, -1, 1]), &[pu0, pu0p, pw0, pw0u0p], "P(U) - P(W)", c);
    combine(Rule::Sum(vec![1, 1]), &[top, difference], "-chi_c(Kl) for m = 2", c).mark_reconstructed()
}

fn orth_two_parts(a0: usize, al: usize, name: &str, citation: &str) -> ChiExpr {
    let zero_part = class(ClassKind::SmoothQuadric(al as i64 - 2), &format!("{name}^(v_0=0): q_l=0 in P(M_l)"), citation);
    let cone = class(ClassKind::AffineCone("fiber over [v_0]".into()), "cone fiber", citation);
    let base = class(ClassKind::SmoothQuadric(a0 as i64 - 2), "q_0=0 in P(M_0)", citation);
    let nonzero_part = combine(Rule::Fibration, &[cone, base], &format!("{name}^(v_0≠0)"), citation);
    combine(Rule::Sum(vec![1, 1]), &[zero_part, nonzero_part], name, citation)
}

fn thm_orth(family: Family, d: usize, a0: usize, al: usize) -> ChiExpr {
    let c = "Theorem 1.2 proof, \"χ_c(Q)=2d, χ_c(W_1)=4d\"";
    let q = class(ClassKind::SmoothQuadric((a0 + al) as i64 - 2), "Q", c);
    let q1 = orth_two_parts(a0, al, "Q_1", "Lemma 5.4, \"χ(Q_1)=2d\"");
    let w1 = cited(if family == Family::B { 4 * d as i64 } else { 0 }, "W_1", "Table 1, \"χ_c(W_1)\" column");
    let w11 = orth_two_parts(a0, al, "W_11", "Lemma 5.5, \"χ_c(W_{1,1}) =2d\"");
    let signs = if family == Family::B { vec![-1, 1, 1, -1] } else { vec![1, -1, -1, 1] };
    combine(Rule::Sum(signs), &[q, q1, w1, w11], "-chi_c(Kl)", "Theorem 1.2, \"2d … 2(d+1)\"")
}

/// Dimension-table entries carried by a thm-orth derivation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Table1Row {
    pub family: Family,
    pub profile: Profile,
    pub d: usize,
    pub dim_m0: usize,
    pub dim_ml: usize,
    pub w1: i64,
    pub w11: i64,
    pub result: i64,
}

pub fn table1_row(params: &DerivationParams) -> Result<Table1Row, SymbolicError> {
    let expr = run_derivation("table1-row", params)?;
    let (dim_m0, dim_ml) = orthogonal_dims(params.family, params.d, params.profile).expect("checked by the script");
    Ok(Table1Row {
        family: params.family,
        profile: params.profile,
        d: params.d,
        dim_m0,
        dim_ml,
        w1: expr.find("W_1").expect("W_1 step"),
        w11: expr.find("W_11").expect("W_11 step"),
        result: expr.value,
    })
}

/// Replays the proof registered under `id`.
pub fn run_derivation(id: &str, params: &DerivationParams) -> Result<ChiExpr, SymbolicError> {
    if !IDS.contains(&id) {
        return Err(SymbolicError::UnknownDerivation(id.to_string()));
    }
    let d = params.d;
    if d == 0 {
        return Err(out_of_domain(id, "d must be positive"));
    }
    let symplectic = matches!(id, "lemma-sym-square" | "lemma-gamma1" | "lemma-gamma1prime" | "lemma-two-quadrics" | "prop-m-ge-3" | "prop-m-eq-2" | "thm-sp");
    if symplectic && params.family != Family::C {
        return Err(out_of_domain(id, "symplectic derivation"));
    }
    if !symplectic && params.family == Family::C {
        return Err(out_of_domain(id, "orthogonal derivation"));
    }
    match id {
        "lemma-sym-square" => Ok(sym_square()),
        "lemma-gamma1" => Ok(gamma1(d)),
        "lemma-gamma1prime" => Ok(gamma1_prime(d)),
        "lemma-two-quadrics" => Ok(two_quadrics(d)),
        "prop-m-ge-3" => match params.m {
            Some(m) if m < 3 => Err(out_of_domain(id, format!("needs m >= 3, got m = {m}"))),
            _ => Ok(symplectic_top(d, "Prop. 4.3, \"−χ_c(Sym²_{≤1}(M_1⊕M_m))+χ_c(Γ_1)\"", "Gamma_1'")),
        },
        "prop-m-eq-2" => match params.m {
            Some(m) if m != 2 => Err(out_of_domain(id, format!("needs m = 2, got m = {m}"))),
            _ => Ok(prop_m_eq_2(d)),
        },
        "thm-sp" => {
            let n = params.n.ok_or_else(|| out_of_domain(id, "needs n"))?;
            if (2 * n) % d != 0 || 2 * n / d < 2 {
                return Err(out_of_domain(id, format!("d = {d} must divide 2n = {} with m = 2n/d >= 2", 2 * n)));
            }
            let m = 2 * n / d;
            let inner = if m >= 3 {
                run_derivation("prop-m-ge-3", &params.with_m(m))?
            } else {
                run_derivation("prop-m-eq-2", &params.with_m(m))?
            };
            Ok(combine(Rule::Sum(vec![1]), &[inner], "-chi_c(Kl)", "Theorem 1.1, \"where d=2n/m\""))
        }
        _ => {
            let (a0, al) = orthogonal_dims(params.family, d, params.profile).ok_or_else(|| {
                out_of_domain(id, format!("no dimension-table row for {} {} with d = {d}", params.family, params.profile))
            })?;
            Ok(match id {
                "lemma-orth-Q1" => orth_two_parts(a0, al, "Q_1", "Lemma 5.4, \"χ(Q_1)=2d\""),
                "lemma-orth-W11" => orth_two_parts(a0, al, "W_11", "Lemma 5.5, \"χ_c(W_{1,1}) =2d\""),
                "thm-orth" => thm_orth(params.family, d, a0, al),
                _ => thm_orth(params.family, d, a0, al).labelled("-chi_c(Kl)", "Table 1, \"Dimension, parity and Euler characteristics\""),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem_examples() {
        let e = run_derivation("thm-sp", &DerivationParams::symplectic(2).with_n(2)).unwrap();
        assert_eq!(e.value, 2);
        assert_eq!(e.replay(), Ok(2));
        let row = table1_row(&DerivationParams::orthogonal(Family::B, 2, Profile::NonDegenerate)).unwrap();
        assert_eq!((row.w1, row.w11, row.result), (8, 4, 4));
        let e = run_derivation("thm-orth", &DerivationParams::orthogonal(Family::D, 2, Profile::NonDegenerate)).unwrap();
        assert_eq!(e.root().inputs, vec![4, 4, 0, 4]);
        assert_eq!(e.value, 4);
    }

    #[test]
    fn domains() {
        let p = DerivationParams::symplectic(1);
        assert!(matches!(run_derivation("prop-m-ge-3", &p.with_m(2)), Err(SymbolicError::OutOfDomain { .. })));
        assert!(matches!(run_derivation("prop-m-eq-2", &p.with_m(4)), Err(SymbolicError::OutOfDomain { .. })));
        assert!(matches!(run_derivation("lemma-4.99", &p), Err(SymbolicError::UnknownDerivation(_))));
        assert!(matches!(run_derivation("thm-sp", &p.with_n(1).with_m(2)), Ok(_)));
        assert!(run_derivation("thm-sp", &DerivationParams::symplectic(3).with_n(2)).is_err());
        let odd_d = DerivationParams::orthogonal(Family::D, 3, Profile::NonDegenerate);
        assert!(matches!(run_derivation("thm-orth", &odd_d), Err(SymbolicError::OutOfDomain { .. })));
        assert!(run_derivation("lemma-gamma1", &odd_d).is_err());
    }

    #[test]
    fn m_eq_2_is_flagged() {
        let e = run_derivation("prop-m-eq-2", &DerivationParams::symplectic(3)).unwrap();
        assert!(e.reconstructed);
        assert_eq!(e.find("P(U) - P(W)"), Some(0));
        assert_eq!(e.find("P(W_0 meet U_0')"), Some(4));
        assert!(e.to_markdown("prop-m-eq-2").contains("reconstructed"));
    }
}
