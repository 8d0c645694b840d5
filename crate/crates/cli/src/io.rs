//! CSV traces. Numbers carry 17 significant digits so every `f64` reads
//! back exactly; lines end in LF.

use std::fs::File;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use cdstate::experiment::{FilterRun, RunRecord, Summary};
use cdstate::mfts::NX;
use cdstate::simulator::TruthRecord;
use cdstate::FilterKind;
use nalgebra::DVector;

pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file))
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(csv::ReaderBuilder::new().from_reader(file))
}

fn state_columns(prefix: &str) -> impl Iterator<Item = String> + '_ {
    (1..=NX).map(move |i| format!("{prefix}{i}"))
}

fn measurement_columns(tanks: &[usize]) -> impl Iterator<Item = String> + '_ {
    tanks.iter().map(|t| format!("y{t}"))
}

fn parse_cell(cell: &str, line: usize, column: &str) -> Result<f64> {
    cell.parse().with_context(|| format!("line {line}, column {column}: '{cell}' is not a number"))
}

/// `t, x1..x6, y<tank>…` for `t_0..t_N`; the `t_0` row has empty
/// measurement cells.
pub fn write_truth(path: &Path, truth: &TruthRecord, tanks: &[usize]) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["t".to_string()];
    header.extend(state_columns("x"));
    header.extend(measurement_columns(tanks));
    w.write_record(&header)?;
    for (k, (t, x)) in truth.times.iter().zip(&truth.states).enumerate() {
        let mut row = vec![fmt(*t)];
        row.extend(x.iter().map(|v| fmt(*v)));
        match k.checked_sub(1).map(|j| &truth.measurements[j]) {
            Some(y) => row.extend(y.iter().map(|v| fmt(*v))),
            None => row.extend(tanks.iter().map(|_| String::new())),
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`write_truth`]: the record and the measured tanks.
pub fn read_truth(path: &Path) -> Result<(TruthRecord, Vec<usize>)> {
    let mut r = reader(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let expected: Vec<String> = std::iter::once("t".to_string()).chain(state_columns("x")).collect();
    ensure!(
        header.len() > expected.len() && header[..expected.len()] == expected[..],
        "{}: header must start with {}",
        path.display(),
        expected.join(",")
    );
    let tanks = header[expected.len()..]
        .iter()
        .map(|c| {
            c.strip_prefix('y')
                .and_then(|n| n.parse().ok())
                .with_context(|| format!("{}: unexpected column '{c}'", path.display()))
        })
        .collect::<Result<Vec<usize>>>()?;

    let mut truth = TruthRecord {
        times: Vec::new(),
        states: Vec::new(),
        measurements: Vec::new(),
    };
    for (k, row) in r.records().enumerate() {
        let row = row?;
        let line = k + 2;
        let cells: Vec<f64> = row
            .iter()
            .take(1 + NX)
            .zip(&header)
            .map(|(c, h)| parse_cell(c, line, h))
            .collect::<Result<_>>()?;
        truth.times.push(cells[0]);
        truth.states.push(DVector::from_column_slice(&cells[1..]));
        let y: Vec<&str> = row.iter().skip(1 + NX).collect();
        if k == 0 {
            ensure!(y.iter().all(|c| c.is_empty()), "{}: no measurement is taken at t0", path.display());
        } else {
            let y = y
                .iter()
                .zip(&header[1 + NX..])
                .map(|(c, h)| parse_cell(c, line, h))
                .collect::<Result<Vec<_>>>()?;
            truth.measurements.push(DVector::from_vec(y));
        }
    }
    ensure!(!truth.measurements.is_empty(), "{}: no samples", path.display());
    Ok((truth, tanks))
}

/// `t, x1..x6, var1..var6` for every completed step, plus `ess` for the
/// particle filter.
pub fn write_estimates(path: &Path, run: &FilterRun, times: &[f64]) -> Result<()> {
    let mut w = writer(path)?;
    let with_ess = !run.ess.is_empty();
    let mut header = vec!["t".to_string()];
    header.extend(state_columns("x"));
    header.extend(state_columns("var"));
    if with_ess {
        header.push("ess".into());
    }
    w.write_record(&header)?;
    for (k, (x, var)) in run.estimates.iter().zip(&run.variances).enumerate() {
        let mut row = vec![fmt(times[k + 1])];
        row.extend(x.iter().chain(var.iter()).map(|v| fmt(*v)));
        if with_ess {
            row.push(fmt(run.ess[k]));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Members after every measurement update: `step, t, member, x1..x6`.
pub fn write_particles(path: &Path, run: &FilterRun, times: &[f64]) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["step".to_string(), "t".into(), "member".into()];
    header.extend(state_columns("x"));
    w.write_record(&header)?;
    for (k, members) in run.members.iter().enumerate() {
        for (i, x) in members.iter().enumerate() {
            let mut row = vec![(k + 1).to_string(), fmt(times[k + 1]), i.to_string()];
            row.extend(x.iter().map(|v| fmt(*v)));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One filter's columns of a [`Trace`].
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFilter {
    pub kind: FilterKind,
    /// Completed steps only; a failed run is shorter than the trace.
    pub estimates: Vec<DVector<f64>>,
    pub variances: Vec<DVector<f64>>,
}

/// Everything a run produced at `t_1..t_N` except wall-clock timings.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub tanks: Vec<usize>,
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub measurements: Vec<DVector<f64>>,
    pub filters: Vec<TraceFilter>,
}

impl Trace {
    pub fn from_record(record: &RunRecord, tanks: &[usize]) -> Self {
        Self {
            tanks: tanks.to_vec(),
            times: record.truth.times[1..].to_vec(),
            states: record.truth.states[1..].to_vec(),
            measurements: record.truth.measurements.clone(),
            filters: record
                .runs
                .iter()
                .map(|r| TraceFilter {
                    kind: r.kind,
                    estimates: r.estimates.clone(),
                    variances: r.variances.clone(),
                })
                .collect(),
        }
    }

    pub fn filter(&self, kind: FilterKind) -> Option<&TraceFilter> {
        self.filters.iter().find(|f| f.kind == kind)
    }

    /// Number of columns: `1 + 6 + n_y + 12` per filter.
    pub fn columns(&self) -> usize {
        1 + NX + self.tanks.len() + 2 * NX * self.filters.len()
    }

    /// `t, x1..x6, y<tank>…`, then `<filter>_x1..x6, <filter>_var1..6` per
    /// filter. Steps a failed filter did not reach are empty.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = writer(path)?;
        let mut header = vec!["t".to_string()];
        header.extend(state_columns("x"));
        header.extend(measurement_columns(&self.tanks));
        for f in &self.filters {
            header.extend(state_columns(&format!("{}_x", f.kind)));
            header.extend(state_columns(&format!("{}_var", f.kind)));
        }
        w.write_record(&header)?;
        for k in 0..self.times.len() {
            let mut row = vec![fmt(self.times[k])];
            row.extend(self.states[k].iter().chain(self.measurements[k].iter()).map(|v| fmt(*v)));
            for f in &self.filters {
                match (f.estimates.get(k), f.variances.get(k)) {
                    (Some(x), Some(v)) => row.extend(x.iter().chain(v.iter()).map(|v| fmt(*v))),
                    _ => row.extend(std::iter::repeat_n(String::new(), 2 * NX)),
                }
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = reader(path)?;
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let ny = header.iter().filter(|c| c.starts_with('y')).count();
        ensure!(header.len() >= 1 + NX + ny, "{}: missing state columns", path.display());
        let tanks = header[1 + NX..1 + NX + ny]
            .iter()
            .map(|c| c[1..].parse().with_context(|| format!("bad measurement column '{c}'")))
            .collect::<Result<Vec<usize>>>()?;
        let fixed = 1 + NX + ny;
        ensure!((header.len() - fixed).is_multiple_of(2 * NX), "{}: incomplete filter columns", path.display());
        let kinds = header[fixed..]
            .chunks(2 * NX)
            .map(|c| match c[0].strip_suffix("_x1") {
                Some(name) => Ok(name.parse::<FilterKind>()?),
                None => bail!("unexpected column '{}'", c[0]),
            })
            .collect::<Result<Vec<_>>>()?;
        let mut trace = Trace {
            tanks,
            times: Vec::new(),
            states: Vec::new(),
            measurements: Vec::new(),
            filters: kinds
                .into_iter()
                .map(|kind| TraceFilter {
                    kind,
                    estimates: Vec::new(),
                    variances: Vec::new(),
                })
                .collect(),
        };
        for (k, row) in r.records().enumerate() {
            let row = row?;
            let line = k + 2;
            let cells: Vec<&str> = row.iter().collect();
            let nums = |range: std::ops::Range<usize>| -> Result<Vec<f64>> {
                range.map(|i| parse_cell(cells[i], line, &header[i])).collect()
            };
            trace.times.push(nums(0..1)?[0]);
            trace.states.push(DVector::from_vec(nums(1..1 + NX)?));
            trace.measurements.push(DVector::from_vec(nums(1 + NX..fixed)?));
            for (j, f) in trace.filters.iter_mut().enumerate() {
                let start = fixed + 2 * NX * j;
                if cells[start].is_empty() {
                    continue;
                }
                f.estimates.push(DVector::from_vec(nums(start..start + NX)?));
                f.variances.push(DVector::from_vec(nums(start + NX..start + 2 * NX)?));
            }
        }
        Ok(trace)
    }
}

pub fn write_summary(dir: &Path, summary: &Summary) -> Result<()> {
    let text = dir.join("summary.txt");
    std::fs::write(&text, summary.to_text()).with_context(|| format!("writing {}", text.display()))?;
    let csv = dir.join("summary.csv");
    std::fs::write(&csv, summary.to_csv()).with_context(|| format!("writing {}", csv.display()))?;
    Ok(())
}
