//! Verification records and bundles.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::time::Instant;

use num_rational::BigRational;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

/// Relation `observed ⋈ expected`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Relation {
    pub fn holds(self, observed: &BigRational, expected: &BigRational) -> bool {
        match self {
            Relation::Eq => observed == expected,
            Relation::Le => observed <= expected,
            Relation::Lt => observed < expected,
            Relation::Ge => observed >= expected,
            Relation::Gt => observed > expected,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub id: String,
    pub params: BTreeMap<String, String>,
    pub relation: Relation,
    pub expected: String,
    pub observed: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub millis: Option<u64>,
}

impl VerificationReport {
    /// Exact comparison of `observed` against `expected`.
    pub fn check(
        id: impl Into<String>,
        relation: Relation,
        expected: &BigRational,
        observed: &BigRational,
    ) -> Self {
        VerificationReport {
            id: id.into(),
            params: BTreeMap::new(),
            relation,
            expected: expected.to_string(),
            observed: observed.to_string(),
            verdict: if relation.holds(observed, expected) {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            note: None,
            millis: None,
        }
    }

    pub fn skipped(id: impl Into<String>, reason: impl Into<String>) -> Self {
        VerificationReport {
            id: id.into(),
            params: BTreeMap::new(),
            relation: Relation::Eq,
            expected: "-".into(),
            observed: "-".into(),
            verdict: Verdict::Skipped,
            note: Some(reason.into()),
            millis: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}

/// Runs `f` and stamps its wall time on every report it returns.
pub fn timed<E>(
    f: impl FnOnce() -> Result<Vec<VerificationReport>, E>,
) -> Result<Vec<VerificationReport>, E> {
    let start = Instant::now();
    let mut reports = f()?;
    let ms = start.elapsed().as_millis() as u64;
    for r in &mut reports {
        r.millis = Some(ms);
    }
    Ok(reports)
}

/// Reports ordered by claim id. Ties keep insertion order.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Bundle {
    pub reports: Vec<VerificationReport>,
}

impl Bundle {
    pub fn new(mut reports: Vec<VerificationReport>) -> Self {
        reports.sort_by(|a, b| a.id.cmp(&b.id));
        Bundle { reports }
    }

    pub fn extend(&mut self, more: Vec<VerificationReport>) {
        self.reports.extend(more);
        self.reports.sort_by(|a, b| a.id.cmp(&b.id));
    }

    pub fn all_passed(&self) -> bool {
        !self.reports.iter().any(VerificationReport::failed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerificationReport> {
        self.reports.iter().filter(|r| r.failed())
    }

    pub fn get(&self, id: &str) -> Option<&VerificationReport> {
        self.reports.iter().find(|r| r.id == id)
    }

    /// Drops wall times so that identical runs give identical documents.
    pub fn without_timing(&self) -> Bundle {
        let mut b = self.clone();
        for r in &mut b.reports {
            r.millis = None;
        }
        b
    }

    /// One JSON object per line.
    pub fn to_records(&self) -> String {
        let mut out = String::new();
        for r in &self.reports {
            out.push_str(&serde_json::to_string(r).expect("report serialises"));
            out.push('\n');
        }
        out
    }

    pub fn to_table(&self) -> String {
        let rows: Vec<[String; 5]> = self
            .reports
            .iter()
            .map(|r| {
                [
                    r.id.clone(),
                    format!("{:?}", r.verdict).to_lowercase(),
                    format!("{} {} {}", r.observed, r.relation.symbol(), r.expected),
                    r.millis.map(|m| format!("{m}ms")).unwrap_or_default(),
                    r.note.clone().unwrap_or_default(),
                ]
            })
            .collect();
        let header = ["claim", "verdict", "observed vs expected", "time", "note"].map(String::from);
        let mut widths = header.clone().map(|h| h.chars().count());
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        for row in std::iter::once(&header).chain(&rows) {
            let line: Vec<String> = row
                .iter()
                .zip(widths)
                .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
                .collect();
            writeln!(out, "{}", line.join("  ").trim_end()).unwrap();
        }
        out
    }
}

impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_table())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn verdicts_are_exact() {
        let r = VerificationReport::check("a", Relation::Le, &ratio(5, 8), &ratio(5, 8));
        assert!(r.passed());
        let r = VerificationReport::check("a", Relation::Lt, &ratio(5, 8), &ratio(5, 8));
        assert!(r.failed());
        assert!(VerificationReport::check("a", Relation::Ge, &ratio(1, 2), &ratio(3, 4)).passed());
        assert_eq!(
            VerificationReport::skipped("s", "why").verdict,
            Verdict::Skipped
        );
    }

    #[test]
    fn bundle_order_and_rendering() {
        let b = Bundle::new(vec![
            VerificationReport::check("b", Relation::Eq, &ratio(1, 2), &ratio(1, 2)).param("k", 3),
            VerificationReport::check("a", Relation::Eq, &ratio(1, 2), &ratio(1, 3)),
        ]);
        assert_eq!(b.reports[0].id, "a");
        assert!(!b.all_passed());
        assert_eq!(b.failures().count(), 1);
        let records = b.to_records();
        assert_eq!(records.lines().count(), 2);
        assert!(records
            .lines()
            .nth(1)
            .unwrap()
            .contains("\"params\":{\"k\":\"3\"}"));
        assert!(records.contains("\"relation\":\"=\""));
        assert!(b.to_table().lines().nth(1).unwrap().starts_with("a  "));
    }
}
