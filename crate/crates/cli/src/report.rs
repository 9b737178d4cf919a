//! Structured run reports.

use hydroham_core::conditions::{Residual, ResidualReport};
use hydroham_core::oassoc::{residual_text, CaseReport, Expect, OAssocBundle};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct FirstNonzero {
    /// One-based index tuple.
    pub index: Vec<usize>,
    pub residual: String,
}

#[derive(Debug, Serialize)]
pub struct CheckEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    pub name: String,
    pub tuples: usize,
    pub nonzero: usize,
    pub expected: &'static str,
    pub met: bool,
    pub first_nonzero: Option<FirstNonzero>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

impl CheckEntry {
    pub fn new(
        report: &ResidualReport,
        expect: Expect,
        print: &dyn Fn(&Residual) -> String,
        seconds: Option<f64>,
    ) -> CheckEntry {
        let passed = report.passed();
        CheckEntry {
            case: None,
            name: report.name.clone(),
            tuples: report.len(),
            nonzero: report.nonzero(),
            expected: expect.as_str(),
            met: passed == (expect == Expect::Pass),
            first_nonzero: report.first_nonzero().map(|(ix, r)| FirstNonzero {
                index: ix.iter().map(|i| i + 1).collect(),
                residual: print(r),
            }),
            seconds,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    pub met: bool,
    pub notes: Vec<String>,
    pub checks: Vec<CheckEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derived_metric: Option<Vec<Vec<String>>>,
}

impl Report {
    pub fn from_case(b: &OAssocBundle, r: &CaseReport, timings: bool) -> Report {
        let checks: Vec<CheckEntry> = r
            .checks
            .iter()
            .map(|c| CheckEntry {
                case: Some(c.case.clone()),
                ..CheckEntry::new(
                    &c.report,
                    c.expect,
                    &|x| residual_text(b, c.chart, x),
                    timings.then_some(c.seconds),
                )
            })
            .collect();
        Report {
            command: "verify".into(),
            case: Some(r.case.clone()),
            file: None,
            met: checks.iter().all(|c| c.met),
            notes: r.notes.clone(),
            checks,
            derived_metric: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Serialize)]
pub struct DensityEntry {
    /// Power of `1/lambda`; `-1` is the leading term.
    pub order: i32,
    pub text: String,
    pub x_weight: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub printed_match: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct ExpandReport {
    pub command: String,
    pub branch: usize,
    pub depth: usize,
    pub met: bool,
    pub leading_residual: String,
    pub recursion_coefficient: String,
    pub densities: Vec<DensityEntry>,
    pub order_residuals: Vec<String>,
}

impl ExpandReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
