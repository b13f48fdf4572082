use serde::Serialize;

use super::{Ambient, FormId, Relation, VarietyError, VarietySpec};
use crate::spaces::GradedSpace;

use FormId::*;
use Relation::*;

#[derive(Debug, Clone, Serialize)]
pub struct RegistryEntry {
    pub name: String,
    pub description: &'static str,
    pub spec: VarietySpec,
}

/// Names available for this space, in a stable order.
pub fn registry_names(space: &GradedSpace) -> Vec<String> {
    let l = space.l();
    let mut out: Vec<String> = Vec::new();
    if space.is_symplectic() {
        out.extend(["Sym2", "Gamma1", "Gamma1Prime", "Gamma1Cap"].map(String::from));
        out.extend((0..=l).map(|i| format!("U_sym({i})")));
        out.extend((0..=l).map(|i| format!("W_sym({i})")));
        if space.m == 2 {
            out.extend(["Utilde0", "Wtilde0", "PU0", "PU0p", "PW0", "PW0U0p", "PU", "PW"].map(String::from));
        }
    } else {
        out.extend(["Q", "Q1", "W1", "W11"].map(String::from));
        out.extend((1..=l).map(|i| format!("U_orth({i})")));
        out.extend((1..=l).map(|i| format!("W_orth({i})")));
    }
    out
}

fn indexed(name: &str, stem: &str) -> Option<usize> {
    name.strip_prefix(stem)?.strip_prefix('(')?.strip_suffix(')')?.trim().parse().ok()
}

fn out_of_range(name: &str, reason: impl Into<String>) -> VarietyError {
    VarietyError::OutOfRange { name: name.to_string(), reason: reason.into() }
}

fn description(name: &str) -> &'static str {
    match name {
        "Sym2" => "pure tensors on M_1 + M_m",
        "Gamma1" => "gamma_1 = 1",
        "Gamma1Prime" => "omega(phi_m v_m, u_m) = 0",
        "Gamma1Cap" => "Gamma_1 meet Gamma_1'",
        "Utilde0" => "Sym2 minus Gamma_1 (m = 2)",
        "Wtilde0" => "Utilde0 meet omega(phi_2 v_2, u_2) = 0",
        "PU0" => "scaling orbits of Utilde0 that are full G_m torsors: gamma_1 = 0 in P(M_1 + M_2)",
        "PU0p" => "PU0 meet omega(phi_1 v_1, u_1) = 0",
        "PW0" => "PU0 meet omega(phi_2 v_2, u_2) = 0",
        "PW0U0p" => "PU0 meet both quadrics",
        "PU" => "PU0 minus PU0p",
        "PW" => "PW0 minus PW0U0p",
        "Q" => "q = 0 in P(M_0 + M_l)",
        "Q1" => "Q meet q_l = 0",
        "W1" => "Q meet (A v_0, v_l) = 0",
        "W11" => "W1 meet q_l = 0",
        n if n.starts_with("U_sym") => "pure tensors minus Gamma_1..Gamma_i",
        n if n.starts_with("W_sym") => "U_sym(i) meet omega(phi_m v_m, u_m) = 0",
        n if n.starts_with("U_orth") => "Q(q) minus the quadrics Q_1..Q_i",
        n if n.starts_with("W_orth") => "U_orth(i) meet omega_i = 0",
        _ => "",
    }
}

/// The named locus `name` for this space.
pub fn registry(space: &GradedSpace, name: &str) -> Result<VarietySpec, VarietyError> {
    let (m, l) = (space.m, space.l());
    let spec = |ambient: Ambient| VarietySpec::new(name, ambient, Vec::new());
    let unknown = || VarietyError::UnknownVariety(name.to_string());
    if space.is_symplectic() {
        let top = Ambient::TensorCone(vec![1, m]);
        let u_sym = |i: usize| -> Result<VarietySpec, VarietyError> {
            if i > l {
                return Err(out_of_range(name, format!("need 0 <= i <= {l}")));
            }
            let pieces: Vec<usize> = if i == 0 {
                vec![1, m]
            } else if i >= l - 1 {
                (1..=m).collect()
            } else {
                (1..=i).chain(m - i - 1..=m).collect()
            };
            let mut s = spec(Ambient::TensorCone(pieces));
            for j in 1..=i.max(1) {
                s = s.with(GammaSum(j), Ne1);
            }
            Ok(s)
        };
        let m2 = |s: VarietySpec| {
            if m == 2 {
                Ok(s)
            } else {
                Err(out_of_range(name, "defined only for m = 2"))
            }
        };
        let pu0 = || spec(Ambient::Projective(vec![1, 2])).with(GammaSum(1), Eq0);
        return match name {
            "Sym2" => Ok(spec(top)),
            "Gamma1" => Ok(spec(top).with(GammaSum(1), Eq1)),
            "Gamma1Prime" => Ok(spec(top).with(FrobTop, Eq0)),
            "Gamma1Cap" => Ok(spec(top).with(GammaSum(1), Eq1).with(FrobTop, Eq0)),
            "Utilde0" => m2(u_sym(0)?),
            "Wtilde0" => m2(u_sym(0)?.with(FrobTop, Eq0)),
            "PU0" => m2(pu0()),
            "PU0p" => m2(pu0().with(PhiPair(1), Eq0)),
            "PW0" => m2(pu0().with(FrobTop, Eq0)),
            "PW0U0p" => m2(pu0().with(PhiPair(1), Eq0).with(FrobTop, Eq0)),
            "PU" => m2(pu0().with(PhiPair(1), Ne0)),
            "PW" => m2(pu0().with(PhiPair(1), Ne0).with(FrobTop, Eq0)),
            _ => {
                if let Some(i) = indexed(name, "U_sym") {
                    u_sym(i)
                } else if let Some(i) = indexed(name, "W_sym") {
                    Ok(u_sym(i)?.with(FrobTop, Eq0))
                } else {
                    Err(unknown())
                }
            }
        };
    }
    let base = Ambient::Projective(vec![0, l]);
    let u_orth = |i: usize| -> Result<VarietySpec, VarietyError> {
        if i == 0 || i > l {
            return Err(out_of_range(name, format!("need 1 <= i <= {l}")));
        }
        let pieces: Vec<usize> = std::iter::once(0).chain(l + 1 - i..=m - l + i - 1).collect();
        let mut s = spec(Ambient::Projective(pieces)).with(QFull, Eq0);
        for j in 1..=i {
            s = s.with(QRange(l - j + 1), Ne0);
        }
        Ok(s)
    };
    match name {
        "Q" => Ok(spec(base).with(QFull, Eq0)),
        "Q1" => Ok(spec(base).with(QFull, Eq0).with(QRange(l), Eq0)),
        "W1" => Ok(spec(base).with(QFull, Eq0).with(OmegaChain(1), Eq0)),
        "W11" => Ok(spec(base).with(QFull, Eq0).with(OmegaChain(1), Eq0).with(QRange(l), Eq0)),
        _ => {
            if let Some(i) = indexed(name, "U_orth") {
                u_orth(i)
            } else if let Some(i) = indexed(name, "W_orth") {
                Ok(u_orth(i)?.with(OmegaChain(i), Eq0))
            } else {
                Err(unknown())
            }
        }
    }
}

/// Every registered locus of the space, for export.
pub fn registry_document(space: &GradedSpace) -> Vec<RegistryEntry> {
    registry_names(space)
        .into_iter()
        .map(|name| {
            let spec = registry(space, &name).expect("registered names resolve");
            RegistryEntry { description: description(&name), name, spec }
        })
        .collect()
}
