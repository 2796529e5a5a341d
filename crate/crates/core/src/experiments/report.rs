//! Summary rows, verdicts and CSV/text output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{Scenario, Tolerances};
use super::fit::SlopeFit;
use crate::error::{Error, Result};
use crate::norms::ResultTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Unconverged,
    Fail,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Unconverged => "UNCONVERGED",
            Verdict::Fail => "FAIL",
        }
    }

    fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// How `fitted` is compared with `predicted`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// fitted ≤ predicted + tolerance.
    SlopeUpper,
    /// fitted ≥ predicted − tolerance.
    SlopeLower,
    /// |fitted − predicted| ≤ tolerance.
    SlopeSaturated,
    /// max/min of a normalized ratio; fitted ≤ tolerance.
    Ratio,
    /// Relative residual of a linear fit; fitted < tolerance.
    Residual,
    /// Distance in octaves; |fitted − predicted| ≤ tolerance.
    Crossover,
    /// A defect or bound; fitted ≤ tolerance.
    Bound,
}

impl CheckKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckKind::SlopeUpper => "slope_upper",
            CheckKind::SlopeLower => "slope_lower",
            CheckKind::SlopeSaturated => "slope_saturated",
            CheckKind::Ratio => "ratio",
            CheckKind::Residual => "residual",
            CheckKind::Crossover => "crossover",
            CheckKind::Bound => "bound",
        }
    }

    pub fn is_slope(self) -> bool {
        matches!(
            self,
            CheckKind::SlopeUpper | CheckKind::SlopeLower | CheckKind::SlopeSaturated
        )
    }

    fn passes(self, predicted: f64, fitted: f64, tolerance: f64) -> bool {
        match self {
            CheckKind::SlopeUpper => fitted <= predicted + tolerance,
            CheckKind::SlopeLower => fitted >= predicted - tolerance,
            CheckKind::SlopeSaturated | CheckKind::Crossover => {
                (fitted - predicted).abs() <= tolerance
            }
            CheckKind::Ratio | CheckKind::Bound => fitted <= tolerance,
            CheckKind::Residual => fitted < tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub tag: String,
    pub kind: CheckKind,
    pub predicted: f64,
    pub fitted: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    /// Truncation diagnostic: relative error bound from mode, time or radial
    /// truncation, whichever the estimate is exposed to.
    pub tail: f64,
    /// |Δ fitted| under doubled k_max.
    pub delta_k_max: Option<f64>,
    /// |Δ fitted| under doubled points per decade.
    pub delta_resolution: Option<f64>,
    pub note: String,
}

impl SummaryRow {
    pub fn new(
        tag: impl Into<String>,
        kind: CheckKind,
        predicted: f64,
        fitted: f64,
        tolerance: f64,
    ) -> Self {
        let ok = fitted.is_finite() && kind.passes(predicted, fitted, tolerance);
        SummaryRow {
            tag: tag.into(),
            kind,
            predicted,
            fitted,
            tolerance,
            verdict: Verdict::from_bool(ok),
            tail: 0.0,
            delta_k_max: None,
            delta_resolution: None,
            note: String::new(),
        }
    }

    pub fn with_tail(mut self, tail: f64) -> Self {
        self.tail = tail;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// Row for a fitted slope.
    pub fn slope(
        tag: impl Into<String>,
        kind: CheckKind,
        predicted: f64,
        fit: &SlopeFit,
        tolerance: f64,
    ) -> Self {
        SummaryRow::new(tag, kind, predicted, fit.slope, tolerance)
    }

    /// Row for max/min of positive values.
    pub fn ratio(tag: impl Into<String>, values: &[f64], factor: f64) -> Self {
        SummaryRow::new(tag, CheckKind::Ratio, 1.0, spread(values), factor)
    }
}

/// max/min of positive values; infinite if any is non-positive.
pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Table with free-form text cells, written as `<tag>.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Listing {
    pub tag: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub tables: Vec<ResultTable>,
    pub listings: Vec<Listing>,
    pub summary: Vec<SummaryRow>,
    pub tolerances: Tolerances,
}

impl ScenarioReport {
    pub fn new(scenario: Scenario, tolerances: Tolerances) -> Self {
        ScenarioReport {
            scenario,
            tables: Vec::new(),
            listings: Vec::new(),
            summary: Vec::new(),
            tolerances,
        }
    }

    /// Worst verdict; PASS for an empty summary.
    pub fn verdict(&self) -> Verdict {
        self.summary
            .iter()
            .map(|r| r.verdict)
            .max()
            .unwrap_or(Verdict::Pass)
    }

    pub fn row(&self, tag: &str) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.tag == tag)
    }

    pub fn table(&self, tag: &str) -> Option<&ResultTable> {
        self.tables.iter().find(|t| t.tag == tag)
    }

    /// Compares slope rows with reruns at doubled k_max and doubled
    /// resolution; rows moving by the stability tolerance or more become
    /// UNCONVERGED.
    pub fn mark_stability(&mut self, doubled_k: &ScenarioReport, doubled_res: &ScenarioReport) {
        let tol = self.tolerances.stability;
        for row in &mut self.summary {
            if !row.kind.is_slope() {
                continue;
            }
            let delta = |other: &ScenarioReport| {
                other
                    .row(&row.tag)
                    .map(|o| (o.fitted - row.fitted).abs())
                    .unwrap_or(f64::INFINITY)
            };
            let dk = delta(doubled_k);
            let dr = delta(doubled_res);
            row.delta_k_max = Some(dk);
            row.delta_resolution = Some(dr);
            if row.verdict == Verdict::Pass && !(dk < tol && dr < tol) {
                row.verdict = Verdict::Unconverged;
            }
        }
    }
}

/// Fixed float formatting shared by every output file.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.12e}")
    }
}

fn format_option(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_else(|| "nan".into())
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn table_csv(table: &ResultTable) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![table.key.clone(), table.tag.clone()];
    header.extend(table.columns.iter().cloned());
    w.write_record(&header)?;
    for row in &table.rows {
        let mut rec = vec![format_float(row.key), format_float(row.value)];
        rec.extend(row.extra.iter().map(|x| format_float(*x)));
        w.write_record(&rec)?;
    }
    w.into_inner()
        .map_err(|e| Error::InvalidParameter(format!("csv buffer: {e}")))
}

const SUMMARY_FIELDS: [&str; 10] = [
    "tag",
    "kind",
    "predicted",
    "fitted",
    "tolerance",
    "verdict",
    "tail",
    "delta_k_max",
    "delta_resolution",
    "note",
];

fn summary_record(row: &SummaryRow) -> [String; 10] {
    [
        row.tag.clone(),
        row.kind.as_str().into(),
        format_float(row.predicted),
        format_float(row.fitted),
        format_float(row.tolerance),
        row.verdict.as_str().into(),
        format_float(row.tail),
        format_option(row.delta_k_max),
        format_option(row.delta_resolution),
        row.note.clone(),
    ]
}

fn summary_text(summary: &[SummaryRow], verdict: Verdict) -> String {
    let records: Vec<[String; 10]> = summary.iter().map(summary_record).collect();
    let mut widths: Vec<usize> = SUMMARY_FIELDS.iter().map(|f| f.len()).collect();
    for rec in &records {
        for (w, field) in widths.iter_mut().zip(rec.iter()).take(9) {
            *w = (*w).max(field.chars().count());
        }
    }
    let mut out = String::new();
    let line = |fields: Vec<&str>, out: &mut String| {
        let mut s = String::new();
        for (i, f) in fields.iter().enumerate() {
            if i < 9 {
                let pad = widths[i] - f.chars().count();
                s.push_str(f);
                s.push_str(&" ".repeat(pad + 2));
            } else {
                s.push_str(f);
            }
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(SUMMARY_FIELDS.to_vec(), &mut out);
    for rec in &records {
        line(rec.iter().map(String::as_str).collect(), &mut out);
    }
    let _ = writeln!(out, "overall  {}", verdict.as_str());
    out
}

fn toml_string(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn summary_toml(
    summary: &[SummaryRow],
    tolerances: Option<&Tolerances>,
    verdict: Verdict,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "verdict = {}", toml_string(verdict.as_str()));
    let _ = writeln!(out, "rows = {}", summary.len());
    if let Some(t) = tolerances {
        let _ = writeln!(out, "\n[tolerances]");
        for (k, v) in [
            ("slope_envelope", t.slope_envelope),
            ("slope_saturation", t.slope_saturation),
            ("ratio_factor", t.ratio_factor),
            ("bounded_ratio_factor", t.bounded_ratio_factor),
            ("bounded_slope", t.bounded_slope),
            ("log_fit_residual", t.log_fit_residual),
            ("stability", t.stability),
            ("crossover_octaves", t.crossover_octaves),
        ] {
            let _ = writeln!(out, "{k} = {}", format_float(v));
        }
    }
    for row in summary {
        let rec = summary_record(row);
        let _ = writeln!(out, "\n[[row]]");
        for (i, (k, v)) in SUMMARY_FIELDS.iter().zip(rec.iter()).enumerate() {
            let value = match i {
                0 | 1 | 5 | 9 => toml_string(v),
                _ => v.clone(),
            };
            let _ = writeln!(out, "{k} = {value}");
        }
    }
    out
}

/// Writes `<tag>.csv` per table plus `summary.txt`, `summary.csv` and
/// `summary.toml` into `dir`, creating it if needed. Returns the files written.
pub fn emit_report(
    tables: &[ResultTable],
    summary: &[SummaryRow],
    tolerances: Option<&Tolerances>,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for table in tables {
        let path = dir.join(format!("{}.csv", table.tag));
        write_file(&path, &table_csv(table)?)?;
        written.push(path);
    }
    let verdict = summary
        .iter()
        .map(|r| r.verdict)
        .max()
        .unwrap_or(Verdict::Pass);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_FIELDS)?;
    for row in summary {
        w.write_record(summary_record(row))?;
    }
    let csv_bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidParameter(format!("csv buffer: {e}")))?;
    for (name, bytes) in [
        ("summary.txt", summary_text(summary, verdict).into_bytes()),
        ("summary.csv", csv_bytes),
        (
            "summary.toml",
            summary_toml(summary, tolerances, verdict).into_bytes(),
        ),
    ] {
        let path = dir.join(name);
        write_file(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}

impl ScenarioReport {
    /// The aligned text written to `summary.txt`.
    pub fn summary_text(&self) -> String {
        summary_text(&self.summary, self.verdict())
    }

    pub fn emit(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut written = emit_report(&self.tables, &self.summary, Some(&self.tolerances), dir)?;
        for listing in &self.listings {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&listing.header)?;
            for row in &listing.rows {
                w.write_record(row)?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| Error::InvalidParameter(format!("csv buffer: {e}")))?;
            let path = dir.join(format!("{}.csv", listing.tag));
            write_file(&path, &bytes)?;
            written.push(path);
        }
        Ok(written)
    }
}
