//! Scissor-calculus bookkeeping: integer chi_c values carried with the
//! trace of rule applications that produced them.

mod derivations;

pub use derivations::{derivation_ids, orthogonal_dims, run_derivation, table1_row, DerivationParams, Table1Row};

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymbolicError {
    #[error("unknown class kind {0:?}")]
    UnknownKind(String),
    #[error("{rule} takes {expected} parts, got {got}")]
    ArityMismatch { rule: String, expected: usize, got: usize },
    #[error("unknown derivation {0:?}")]
    UnknownDerivation(String),
    #[error("{id} is not defined here: {reason}")]
    OutOfDomain { id: String, reason: String },
    #[error("replay failed at step {step}: {reason}")]
    Replay { step: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "param")]
pub enum ClassKind {
    #[serde(rename = "AFFINE")]
    Affine(usize),
    #[serde(rename = "PROJECTIVE")]
    Projective(usize),
    #[serde(rename = "TORUS")]
    Torus,
    /// Smooth split quadric of the given dimension; -1 is the empty quadric.
    #[serde(rename = "SMOOTH_QUADRIC")]
    SmoothQuadric(i64),
    #[serde(rename = "AFFINE_CONE")]
    AffineCone(String),
}

impl ClassKind {
    pub fn chi(&self) -> i64 {
        match self {
            ClassKind::Affine(_) => 1,
            ClassKind::Projective(n) => *n as i64 + 1,
            ClassKind::Torus => 0,
            ClassKind::SmoothQuadric(d) if d.rem_euclid(2) == 0 => d + 2,
            ClassKind::SmoothQuadric(d) => d + 1,
            ClassKind::AffineCone(_) => 1,
        }
    }
}

impl fmt::Display for ClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassKind::Affine(n) => write!(f, "AFFINE({n})"),
            ClassKind::Projective(n) => write!(f, "PROJECTIVE({n})"),
            ClassKind::Torus => write!(f, "TORUS"),
            ClassKind::SmoothQuadric(d) => write!(f, "SMOOTH_QUADRIC({d})"),
            ClassKind::AffineCone(base) => write!(f, "AFFINE_CONE({base})"),
        }
    }
}

impl FromStr for ClassKind {
    type Err = SymbolicError;

    /// Parses `TORUS`, `AFFINE(3)`, `SMOOTH_QUADRIC(-1)`, `AFFINE_CONE(P(M))`.
    fn from_str(s: &str) -> Result<Self, SymbolicError> {
        let bad = || SymbolicError::UnknownKind(s.to_string());
        let s = s.trim();
        if s == "TORUS" {
            return Ok(ClassKind::Torus);
        }
        let open = s.find('(').ok_or_else(bad)?;
        let arg = s[open + 1..].strip_suffix(')').ok_or_else(bad)?.trim();
        match &s[..open] {
            "AFFINE" => arg.parse().map(ClassKind::Affine).map_err(|_| bad()),
            "PROJECTIVE" => arg.parse().map(ClassKind::Projective).map_err(|_| bad()),
            "SMOOTH_QUADRIC" => match arg.parse::<i64>() {
                Ok(d) if d >= -1 => Ok(ClassKind::SmoothQuadric(d)),
                _ => Err(bad()),
            },
            "AFFINE_CONE" => Ok(ClassKind::AffineCone(arg.to_string())),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", content = "data")]
pub enum Rule {
    #[serde(rename = "CLASS")]
    Class(ClassKind),
    /// Value read off a table the proof quotes rather than derives.
    #[serde(rename = "CITED")]
    Cited(i64),
    /// X = Z + U: the open part from (ambient, closed).
    #[serde(rename = "ADDITIVITY")]
    Additivity,
    /// chi(E) = chi(F) chi(B) from (fiber, base).
    #[serde(rename = "FIBRATION")]
    Fibration,
    #[serde(rename = "PRODUCT")]
    Product,
    /// Signed sum, one sign per part.
    #[serde(rename = "SUM")]
    Sum(Vec<i64>),
}

impl Rule {
    pub fn arity(&self) -> usize {
        match self {
            Rule::Class(_) | Rule::Cited(_) => 0,
            Rule::Additivity | Rule::Fibration | Rule::Product => 2,
            Rule::Sum(signs) => signs.len(),
        }
    }

    pub fn apply(&self, inputs: &[i64]) -> Result<i64, SymbolicError> {
        if inputs.len() != self.arity() {
            return Err(SymbolicError::ArityMismatch { rule: self.to_string(), expected: self.arity(), got: inputs.len() });
        }
        Ok(match self {
            Rule::Class(kind) => kind.chi(),
            Rule::Cited(v) => *v,
            Rule::Additivity => inputs[0] - inputs[1],
            Rule::Fibration | Rule::Product => inputs[0] * inputs[1],
            Rule::Sum(signs) => signs.iter().zip(inputs).map(|(s, x)| s * x).sum(),
        })
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Class(kind) => write!(f, "CLASS {kind}"),
            Rule::Cited(v) => write!(f, "CITED {v}"),
            Rule::Additivity => write!(f, "ADDITIVITY"),
            Rule::Fibration => write!(f, "FIBRATION"),
            Rule::Product => write!(f, "PRODUCT"),
            Rule::Sum(signs) => {
                let s: Vec<String> = signs.iter().map(|s| format!("{s:+}")).collect();
                write!(f, "SUM[{}]", s.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Step {
    pub rule: Rule,
    /// Indices of earlier steps feeding this one.
    pub args: Vec<usize>,
    pub inputs: Vec<i64>,
    pub output: i64,
    pub label: String,
    pub citation: String,
}

/// A value and its derivation; the last step is the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChiExpr {
    pub value: i64,
    pub trace: Vec<Step>,
    /// Set when some step assembles pieces the source leaves implicit.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub reconstructed: bool,
}

pub fn chi_class(kind: ClassKind) -> ChiExpr {
    let value = kind.chi();
    let label = kind.to_string();
    ChiExpr {
        value,
        trace: vec![Step { rule: Rule::Class(kind), args: vec![], inputs: vec![], output: value, label, citation: String::new() }],
        reconstructed: false,
    }
}

pub fn cited(value: i64, label: &str, citation: &str) -> ChiExpr {
    ChiExpr {
        value,
        trace: vec![Step {
            rule: Rule::Cited(value),
            args: vec![],
            inputs: vec![],
            output: value,
            label: label.to_string(),
            citation: citation.to_string(),
        }],
        reconstructed: false,
    }
}

/// Applies `rule` to the roots of `parts`, concatenating their traces.
pub fn chi_combine(rule: Rule, parts: &[ChiExpr]) -> Result<ChiExpr, SymbolicError> {
    let inputs: Vec<i64> = parts.iter().map(|p| p.value).collect();
    let output = rule.apply(&inputs)?;
    let mut trace = Vec::new();
    let mut args = Vec::new();
    for part in parts {
        let offset = trace.len();
        trace.extend(part.trace.iter().map(|s| Step { args: s.args.iter().map(|a| a + offset).collect(), ..s.clone() }));
        args.push(trace.len() - 1);
    }
    trace.push(Step { label: rule.to_string(), rule, args, inputs, output, citation: String::new() });
    Ok(ChiExpr { value: output, trace, reconstructed: parts.iter().any(|p| p.reconstructed) })
}

impl ChiExpr {
    /// Names the root step.
    pub fn labelled(mut self, label: &str, citation: &str) -> Self {
        if let Some(last) = self.trace.last_mut() {
            last.label = label.to_string();
            last.citation = citation.to_string();
        }
        self
    }

    pub fn mark_reconstructed(mut self) -> Self {
        self.reconstructed = true;
        self
    }

    pub fn root(&self) -> &Step {
        self.trace.last().expect("a ChiExpr has at least one step")
    }

    /// Output of the last step carrying this label.
    pub fn find(&self, label: &str) -> Option<i64> {
        self.trace.iter().rev().find(|s| s.label == label).map(|s| s.output)
    }

    /// Re-executes every step from its arguments and returns the root value.
    pub fn replay(&self) -> Result<i64, SymbolicError> {
        let mut outputs: Vec<i64> = Vec::with_capacity(self.trace.len());
        for (k, step) in self.trace.iter().enumerate() {
            let fail = |reason: String| SymbolicError::Replay { step: k, reason };
            if let Some(&a) = step.args.iter().find(|&&a| a >= k) {
                return Err(fail(format!("argument {a} is not an earlier step")));
            }
            let inputs: Vec<i64> = step.args.iter().map(|&a| outputs[a]).collect();
            if inputs != step.inputs {
                return Err(fail(format!("recorded inputs {:?}, recomputed {:?}", step.inputs, inputs)));
            }
            let out = step.rule.apply(&inputs).map_err(|e| fail(e.to_string()))?;
            if out != step.output {
                return Err(fail(format!("recorded {}, recomputed {out}", step.output)));
            }
            outputs.push(out);
        }
        let value = *outputs.last().ok_or_else(|| SymbolicError::Replay { step: 0, reason: "empty trace".into() })?;
        if value != self.value {
            return Err(SymbolicError::Replay { step: self.trace.len() - 1, reason: format!("value {} but root {value}", self.value) });
        }
        Ok(value)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ChiExpr serializes")
    }

    /// A numbered proof, one line per step.
    pub fn to_markdown(&self, title: &str) -> String {
        let mut out = format!("### {title}\n\n");
        if self.reconstructed {
            out.push_str("_Assembly reconstructed: the source leaves the final combination implicit._\n\n");
        }
        out.push_str("| step | quantity | rule | from | value | citation |\n|---|---|---|---|---|---|\n");
        for (k, s) in self.trace.iter().enumerate() {
            let from: Vec<String> = s.args.iter().map(|a| format!("#{a}")).collect();
            out.push_str(&format!(
                "| #{k} | {} | {} | {} | {} | {} |\n",
                s.label.replace('|', "\\|"),
                s.rule,
                from.join(", "),
                s.output,
                s.citation.replace('|', "\\|")
            ));
        }
        out.push_str(&format!("\nResult: **{}**\n", self.value));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_values() {
        assert_eq!(chi_class(ClassKind::Projective(3)).value, 4);
        assert_eq!(chi_class(ClassKind::Torus).value, 0);
        assert_eq!(chi_class(ClassKind::SmoothQuadric(2)).value, 4);
        assert_eq!(chi_class(ClassKind::SmoothQuadric(1)).value, 2);
        assert_eq!(chi_class(ClassKind::SmoothQuadric(-1)).value, 0);
        assert_eq!(chi_class(ClassKind::Affine(7)).value, 1);
        assert_eq!(chi_class(ClassKind::AffineCone("P(M)".into())).value, 1);
    }

    #[test]
    fn kinds_parse() {
        assert_eq!("PROJECTIVE(3)".parse::<ClassKind>(), Ok(ClassKind::Projective(3)));
        assert_eq!("TORUS".parse::<ClassKind>(), Ok(ClassKind::Torus));
        assert!(matches!("SPHERE(2)".parse::<ClassKind>(), Err(SymbolicError::UnknownKind(_))));
        assert!("SMOOTH_QUADRIC(-2)".parse::<ClassKind>().is_err());
    }

    #[test]
    fn combine_rules() {
        let one = chi_class(ClassKind::Affine(1));
        let pt = chi_class(ClassKind::Affine(0));
        let zero = chi_class(ClassKind::Torus);
        let open = chi_combine(Rule::Additivity, &[one.clone(), zero.clone()]).unwrap();
        assert_eq!(open.value, 1);
        let line_minus_pt = chi_combine(Rule::Additivity, &[one.clone(), pt]).unwrap();
        let fib = chi_combine(Rule::Fibration, &[zero, line_minus_pt]).unwrap();
        assert_eq!(fib.value, 0);
        let d = chi_class(ClassKind::Projective(4));
        assert_eq!(chi_combine(Rule::Product, &[one.clone(), d]).unwrap().value, 5);
        assert_eq!(fib.replay(), Ok(0));
        assert!(matches!(
            chi_combine(Rule::Fibration, &[one.clone()]),
            Err(SymbolicError::ArityMismatch { expected: 2, got: 1, .. })
        ));
        assert!(matches!(chi_combine(Rule::Sum(vec![1, -1]), &[one]), Err(SymbolicError::ArityMismatch { .. })));
    }

    #[test]
    fn tampered_trace_fails_replay() {
        let e = chi_combine(Rule::Sum(vec![1, 1]), &[chi_class(ClassKind::Projective(2)), chi_class(ClassKind::Torus)]).unwrap();
        assert_eq!(e.replay(), Ok(3));
        let mut bad = e.clone();
        bad.trace[0].output = 5;
        assert!(bad.replay().is_err());
        let mut bad = e;
        bad.value = 4;
        assert!(bad.replay().is_err());
    }
}
