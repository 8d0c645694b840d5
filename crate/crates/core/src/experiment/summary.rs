use std::fmt::Write;

use crate::error::Result;
use crate::filters::FilterKind;

use super::run::RunRecord;

/// One filter's row of the benchmark table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub kind: FilterKind,
    pub tu_seconds: f64,
    pub mu_seconds: f64,
    pub mape_x: Option<f64>,
    pub mape_d: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.3e}"))
}

fn csv_cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:.16e}"))
}

impl Summary {
    pub fn from_record(record: &RunRecord) -> Result<Self> {
        let rows = record
            .runs
            .iter()
            .map(|run| {
                Ok(SummaryRow {
                    kind: run.kind,
                    tu_seconds: run.tu_total(),
                    mu_seconds: run.mu_total(),
                    mape_x: run.mape_x(&record.truth)?,
                    mape_d: run.mape_d(&record.truth)?,
                    error: run.error.as_ref().map(ToString::to_string),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { rows })
    }

    pub fn row(&self, kind: FilterKind) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.kind == kind)
    }

    /// Fixed-width table, one column per filter.
    pub fn to_text(&self) -> String {
        let mut out = format!("{:<14}", "name");
        for r in &self.rows {
            let _ = write!(out, "{:>12}", r.kind.label());
        }
        out.push('\n');
        let lines: [(&str, fn(&SummaryRow) -> Option<f64>); 4] = [
            ("time TU [s]", |r| Some(r.tu_seconds)),
            ("time MU [s]", |r| Some(r.mu_seconds)),
            ("MAPE_x [%]", |r| r.mape_x),
            ("MAPE_d [%]", |r| r.mape_d),
        ];
        for (name, get) in lines {
            let _ = write!(out, "{name:<14}");
            for r in &self.rows {
                let _ = write!(out, "{:>12}", cell(get(r)));
            }
            out.push('\n');
        }
        for r in self.rows.iter().filter(|r| r.error.is_some()) {
            let _ = writeln!(out, "{} failed: {}", r.kind.label(), r.error.as_deref().unwrap_or(""));
        }
        out
    }

    /// One row per filter with full-precision numbers; failed runs leave the
    /// MAPE cells empty and carry the error text.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("filter,tu_seconds,mu_seconds,mape_x,mape_d,error\n");
        for r in &self.rows {
            let error = r.error.as_deref().unwrap_or("").replace(['"', ',', '\n'], " ");
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.kind.name(),
                csv_cell(Some(r.tu_seconds)),
                csv_cell(Some(r.mu_seconds)),
                csv_cell(r.mape_x),
                csv_cell(r.mape_d),
                error
            );
        }
        out
    }
}

/// MAPE statistics of one filter over several seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedStats {
    pub kind: FilterKind,
    pub runs: usize,
    pub failures: usize,
    pub mape_x: [f64; 3],
    pub mape_d: [f64; 3],
    pub mean_tu_seconds: f64,
    pub mean_mu_seconds: f64,
}

fn min_mean_max(v: &[f64]) -> [f64; 3] {
    if v.is_empty() {
        return [f64::NAN; 3];
    }
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    [min, v.iter().sum::<f64>() / v.len() as f64, max]
}

/// Per-filter min/mean/max of MAPE over per-seed summaries.
pub fn seed_statistics(summaries: &[Summary]) -> Vec<SeedStats> {
    let mut kinds: Vec<FilterKind> = summaries.iter().flat_map(|s| s.rows.iter().map(|r| r.kind)).collect();
    kinds.dedup();
    kinds.sort();
    kinds.dedup();
    kinds
        .into_iter()
        .map(|kind| {
            let rows: Vec<&SummaryRow> = summaries.iter().filter_map(|s| s.row(kind)).collect();
            let x: Vec<f64> = rows.iter().filter_map(|r| r.mape_x).collect();
            let d: Vec<f64> = rows.iter().filter_map(|r| r.mape_d).collect();
            let n = rows.len().max(1) as f64;
            SeedStats {
                kind,
                runs: rows.len(),
                failures: rows.iter().filter(|r| r.error.is_some()).count(),
                mape_x: min_mean_max(&x),
                mape_d: min_mean_max(&d),
                mean_tu_seconds: rows.iter().map(|r| r.tu_seconds).sum::<f64>() / n,
                mean_mu_seconds: rows.iter().map(|r| r.mu_seconds).sum::<f64>() / n,
            }
        })
        .collect()
}

pub fn seed_statistics_text(stats: &[SeedStats]) -> String {
    let mut out = format!(
        "{:<6}{:>6}{:>8}{:>30}{:>30}{:>12}{:>12}\n",
        "filter", "runs", "failed", "MAPE_x [%] min/mean/max", "MAPE_d [%] min/mean/max", "TU [s]", "MU [s]"
    );
    for s in stats {
        let triple = |v: [f64; 3]| format!("{:.2}/{:.2}/{:.2}", v[0], v[1], v[2]);
        let _ = writeln!(
            out,
            "{:<6}{:>6}{:>8}{:>30}{:>30}{:>12.3e}{:>12.3e}",
            s.kind.label(),
            s.runs,
            s.failures,
            triple(s.mape_x),
            triple(s.mape_d),
            s.mean_tu_seconds,
            s.mean_mu_seconds
        );
    }
    out
}
