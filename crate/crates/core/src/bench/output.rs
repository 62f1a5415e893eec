use std::path::{Path, PathBuf};

use super::config::ProblemSpec;
use super::run::RunResult;
use crate::error::{Error, Result};
use crate::trace::{Trace, TraceEvent};

/// Column header of every per-run trace file.
pub const TRACE_HEADER: [&str; 8] = ["outer_k", "grad_equiv", "f_value", "gap", "L_k", "A_k", "inner_units", "wall_ms"];

pub const MANIFEST_HEADER: [&str; 20] = [
    "run_id",
    "problem",
    "method",
    "accelerated",
    "dim",
    "seed",
    "run_seed",
    "alpha",
    "beta",
    "gamma",
    "l0",
    "ld",
    "lu",
    "eps",
    "lf",
    "terminal_status",
    "final_gap",
    "total_grad_equiv",
    "events",
    "error",
];

const NA: &str = "NA";

/// 17 significant digits, enough to round-trip any `f64`; `NA` for
/// non-finite values.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        NA.to_string()
    }
}

fn fmt_opt<T>(v: Option<T>, f: impl FnOnce(T) -> String) -> String {
    v.map_or_else(|| NA.to_string(), f)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn event_record(e: &TraceEvent) -> [String; 8] {
    [
        e.outer_k.to_string(),
        fmt_f64(e.grad_equiv),
        fmt_f64(e.f_value),
        fmt_f64(e.gap),
        fmt_opt(e.l_k, fmt_f64),
        fmt_opt(e.a_k, fmt_f64),
        fmt_opt(e.inner_units, |u| u.to_string()),
        fmt_f64(e.wall_ms),
    ]
}

pub fn write_trace<W: std::io::Write>(trace: &Trace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER).map_err(csv_err)?;
    for e in &trace.events {
        w.write_record(event_record(e)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trace file back. Values are exact because they were written
/// with 17 significant digits.
pub fn read_trace<R: std::io::Read>(input: R) -> Result<Vec<TraceEvent>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?;
    if header.iter().ne(TRACE_HEADER) {
        return Err(Error::Parse { line: 1, reason: format!("unexpected header {header:?}") });
    }
    let mut events = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(csv_err)?;
        let bad = |c: &str| Error::Parse { line, reason: format!("bad value in column {c}") };
        let real = |j: usize| -> Result<Option<f64>> {
            match &rec[j] {
                NA => Ok(None),
                s => s.parse().map(Some).map_err(|_| bad(TRACE_HEADER[j])),
            }
        };
        let nan = |v: Option<f64>| v.unwrap_or(f64::NAN);
        events.push(TraceEvent {
            outer_k: rec[0].parse().map_err(|_| bad("outer_k"))?,
            grad_equiv: nan(real(1)?),
            f_value: nan(real(2)?),
            gap: nan(real(3)?),
            l_k: real(4)?,
            a_k: real(5)?,
            inner_units: match &rec[6] {
                NA => None,
                s => Some(s.parse().map_err(|_| bad("inner_units"))?),
            },
            wall_ms: nan(real(7)?),
        });
    }
    Ok(events)
}

/// Writes `<run_id>.csv` for every run plus `manifest.csv`, and returns the
/// paths written (manifest last).
pub fn emit_csv(results: &[RunResult], out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut paths = Vec::with_capacity(results.len() + 1);
    for r in results {
        let path = out_dir.join(format!("{}.csv", r.spec.run_id));
        write_trace(&r.trace, std::fs::File::create(&path)?)?;
        paths.push(path);
    }
    let path = out_dir.join("manifest.csv");
    write_manifest(results, std::fs::File::create(&path)?)?;
    paths.push(path);
    Ok(paths)
}

pub fn write_manifest<W: std::io::Write>(results: &[RunResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(MANIFEST_HEADER).map_err(csv_err)?;
    for r in results {
        let s = &r.spec;
        let acc = |v: f64| if s.accelerated { fmt_f64(v) } else { NA.to_string() };
        let seed = match &s.problem {
            ProblemSpec::Quadratic { seed, file: None, .. } => seed.to_string(),
            _ => NA.to_string(),
        };
        w.write_record([
            s.run_id.clone(),
            s.problem.kind().to_string(),
            s.method.name().to_string(),
            s.accelerated.to_string(),
            r.dim.to_string(),
            seed,
            s.run_seed.to_string(),
            acc(s.alpha),
            acc(s.beta),
            acc(s.gamma),
            acc(s.l0),
            acc(s.ld),
            acc(s.lu),
            fmt_f64(s.eps),
            fmt_opt(r.lf, fmt_f64),
            r.trace.terminal_status.to_string(),
            fmt_f64(r.trace.final_gap()),
            fmt_f64(r.trace.total_grad_equiv()),
            r.trace.events.len().to_string(),
            r.trace.error.clone().unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
