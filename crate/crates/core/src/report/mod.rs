//! Verification rows, their serializations and the exit-code policy.

mod verify;

pub use verify::{default_orthogonal_n, trace_rows, verify, verify_targets, VerifyOptions, TABLE1_CONFIGS, TARGETS};

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::count::{CountError, CountPolynomial, FitStatus, Status};
use crate::spaces::SpaceError;
use crate::symbolic::SymbolicError;
use crate::tracesum::TraceError;
use crate::varieties::VarietyError;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unknown target {0:?}")]
    UnknownTarget(String),
    #[error("invalid parameters: {0}")]
    Usage(String),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Variety(#[from] VarietyError),
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// HARD rows decide the exit code; CONTESTED rows are reported only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Class {
    #[serde(rename = "HARD")]
    Hard,
    #[serde(rename = "CONTESTED")]
    Contested,
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Class::Hard => "HARD",
            Class::Contested => "CONTESTED",
        })
    }
}

/// What the oracle made of one locus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    pub primes: Vec<u32>,
    pub coeffs: Vec<String>,
    pub status: FitStatus,
    pub holdouts_ok: bool,
}

impl From<&CountPolynomial> for FitSummary {
    fn from(fit: &CountPolynomial) -> Self {
        FitSummary {
            primes: fit.samples.iter().map(|s| s.0).collect(),
            coeffs: fit.coeffs.clone(),
            status: fit.status,
            holdouts_ok: fit.holdouts.iter().all(|h| h.ok),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Piece {
    pub name: String,
    pub computed: Option<i64>,
    pub target: Option<i64>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationRow {
    pub target: String,
    pub params: String,
    pub citation: String,
    pub class: Class,
    pub interpretation: String,
    pub computed: Option<i64>,
    pub target_value: Option<i64>,
    pub status: Status,
    /// Wall time; left out of JSON so identical runs give identical bytes.
    #[serde(skip)]
    pub ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<i64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub pieces: Vec<Piece>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl VerificationRow {
    pub fn new(target: &str, params: String, citation: &str, class: Class) -> Self {
        VerificationRow {
            target: target.to_string(),
            params,
            citation: citation.to_string(),
            class,
            interpretation: String::new(),
            computed: None,
            target_value: None,
            status: Status::Skipped,
            ms: 0,
            closed_form: None,
            pieces: Vec::new(),
            fit: None,
            note: None,
        }
    }
}

/// 0 iff every HARD row is MATCH.
pub fn exit_code(rows: &[VerificationRow]) -> i32 {
    if rows.iter().all(|r| r.class != Class::Hard || r.status == Status::Match) {
        0
    } else {
        1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            other => Err(format!("unknown format {other:?} (json, csv, markdown)")),
        }
    }
}

#[derive(Serialize)]
struct Document<'a, I: Serialize> {
    version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    invocation: Option<&'a I>,
    rows: &'a [VerificationRow],
}

pub fn emit_json<I: Serialize>(rows: &[VerificationRow], invocation: Option<&I>) -> String {
    serde_json::to_string(&Document { version: 1, invocation, rows }).expect("rows serialize")
}

fn opt(v: Option<i64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub const CSV_HEADER: &str = "target,params,citation,interpretation,computed,target_value,status,ms";

pub fn emit_csv(rows: &[VerificationRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let fields = [
            csv_field(&r.target),
            csv_field(&r.params),
            csv_field(&r.citation),
            csv_field(&r.interpretation),
            opt(r.computed),
            opt(r.target_value),
            r.status.to_string(),
            r.ms.to_string(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn md(s: &str) -> String {
    s.replace('|', "\\|")
}

fn show(v: Option<i64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "-".into())
}

pub fn emit_markdown(rows: &[VerificationRow]) -> String {
    let mut out = String::from(
        "| target | params | interpretation | class | computed | target | status | citation |\n|---|---|---|---|---|---|---|---|\n",
    );
    for r in rows {
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} | {} |\n",
            md(&r.target),
            md(&r.params),
            md(&r.interpretation),
            r.class,
            show(r.computed),
            show(r.target_value),
            r.status,
            md(&r.citation)
        ));
    }
    let table1: Vec<&VerificationRow> = rows.iter().filter(|r| r.target == "table1").collect();
    if !table1.is_empty() {
        out.push_str("\n#### Dimension, parity and Euler characteristics (target / computed)\n\n");
        out.push_str("| Type | params | χ_c(Q) | χ_c(Q_1) | χ_c(W_1) | χ_c(W_{1,1}) | −χ_c(Kl) | status |\n|---|---|---|---|---|---|---|---|\n");
        for r in table1 {
            let cell = |name: &str| {
                r.pieces
                    .iter()
                    .find(|p| p.name == name)
                    .map(|p| format!("{} / {}", show(p.target), show(p.computed)))
                    .unwrap_or_else(|| "-".into())
            };
            let family = r.params.split_whitespace().next().unwrap_or("");
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} | {} | {} / {} | {} |\n",
                family,
                md(&r.params),
                cell("Q"),
                cell("Q1"),
                cell("W1"),
                cell("W11"),
                show(r.target_value),
                show(r.computed),
                r.status
            ));
        }
    }
    let notes: Vec<String> = rows
        .iter()
        .filter_map(|r| r.note.as_ref().map(|n| format!("- {} ({}, {}): {}", r.target, r.params, r.interpretation, n)))
        .collect();
    if !notes.is_empty() {
        out.push_str("\nNotes:\n\n");
        out.push_str(&notes.join("\n"));
        out.push('\n');
    }
    out
}

pub fn emit<I: Serialize>(rows: &[VerificationRow], format: Format, invocation: Option<&I>) -> String {
    match format {
        Format::Json => emit_json(rows, invocation),
        Format::Csv => emit_csv(rows),
        Format::Markdown => emit_markdown(rows),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(class: Class, status: Status) -> VerificationRow {
        let mut r = VerificationRow::new("lemma-4.5", "C n=2 d=1".into(), "Lemma 4.5, \"=1\"", class);
        r.status = status;
        r.computed = Some(1);
        r.target_value = Some(1);
        r.interpretation = "PARALLEL+RAW".into();
        r
    }

    #[test]
    fn empty_json() {
        assert_eq!(emit_json::<()>(&[], None), r#"{"version":1,"rows":[]}"#);
    }

    #[test]
    fn csv_single_row() {
        let out = emit_csv(&[row(Class::Hard, Status::Match)]);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 2);
        assert!(lines[1].contains(",MATCH,"));
        assert!(lines[1].starts_with("lemma-4.5,C n=2 d=1,\"Lemma 4.5, \"\"=1\"\"\",PARALLEL+RAW,1,1,MATCH,"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&[]), 0);
        assert_eq!(exit_code(&[row(Class::Hard, Status::Match), row(Class::Contested, Status::Mismatch)]), 0);
        assert_eq!(exit_code(&[row(Class::Hard, Status::Mismatch)]), 1);
        assert_eq!(exit_code(&[row(Class::Hard, Status::NonPolynomial)]), 1);
        assert_eq!(exit_code(&[row(Class::Contested, Status::NonPolynomial)]), 0);
    }

    #[test]
    fn markdown_has_citations() {
        let md = emit_markdown(&[row(Class::Hard, Status::Match)]);
        assert!(md.contains("Lemma 4.5"));
        assert!(md.contains("| MATCH |"));
    }

    fn status_of(k: u8) -> Status {
        [Status::Match, Status::Mismatch, Status::NonPolynomial, Status::Skipped][k as usize % 4]
    }

    proptest::proptest! {
        #[test]
        fn injected_mismatches_decide_exit(rows in proptest::collection::vec((proptest::bool::ANY, 0u8..4), 0..20), at in 0usize..20) {
            let mut rs: Vec<VerificationRow> = rows
                .iter()
                .map(|&(hard, k)| row(if hard { Class::Hard } else { Class::Contested }, status_of(k)))
                .collect();
            let expected = if rs.iter().any(|r| r.class == Class::Hard && r.status != Status::Match) { 1 } else { 0 };
            proptest::prop_assert_eq!(exit_code(&rs), expected);
            // a HARD mismatch anywhere always fails the run
            let idx = at.min(rs.len());
            rs.insert(idx, row(Class::Hard, Status::Mismatch));
            proptest::prop_assert_eq!(exit_code(&rs), 1);
            // contested rows never do
            rs.retain(|r| r.class == Class::Contested);
            rs.insert(0, row(Class::Contested, Status::Mismatch));
            proptest::prop_assert_eq!(exit_code(&rs), 0);
        }
    }

    #[test]
    fn table1_markdown_mirrors_columns() {
        let mut r = row(Class::Hard, Status::Match);
        r.target = "table1".into();
        r.params = "B non-degenerate n=2 d=1 m=4 dims=(2,1)".into();
        r.pieces = ["Q", "Q1", "W1", "W11"]
            .iter()
            .map(|n| Piece { name: n.to_string(), computed: Some(2), target: Some(2), status: Status::Match, fit: None })
            .collect();
        let md = emit_markdown(&[r]);
        assert!(md.contains("Dimension, parity and Euler characteristics"));
        assert!(md.contains("| B | B non-degenerate n=2 d=1 m=4 dims=(2,1) | 2 / 2 | 2 / 2 | 2 / 2 | 2 / 2 | 1 / 1 | MATCH |"));
    }

    #[test]
    fn json_omits_runtime() {
        let mut a = row(Class::Hard, Status::Match);
        let mut b = a.clone();
        a.ms = 3;
        b.ms = 999;
        assert_eq!(emit_json::<()>(&[a], None), emit_json::<()>(&[b], None));
    }
}
