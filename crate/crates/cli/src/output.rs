//! Result files and their readers. Tables are CSV with floats written to 17
//! significant digits; scalar reports are JSON.

use std::fs;
use std::path::Path;

use fracp::geometry::Point;
use fracp::transport::DiscreteMeasure;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const EIG_HEADER: [&str; 7] = ["p", "lambda", "lambda_root", "target", "rel_err", "iterations", "converged"];
pub const PLOT_HEADER: [&str; 3] = ["p", "lambda_root", "target"];
pub const PLAN_HEADER: [&str; 3] = ["i", "j", "mass"];
pub const POTENTIAL_HEADER: [&str; 3] = ["x", "y", "value"];
pub const MEASURE_HEADER: [&str; 3] = ["x", "y", "mass"];

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub shape: String,
    pub h: f64,
    pub n_nodes: usize,
    pub n_interior: usize,
    pub n_closure: usize,
    pub inradius: f64,
    pub incenter: Point,
    /// Inradius of the continuous shape, where known in closed form.
    pub inradius_exact: Option<f64>,
    pub diameter: f64,
    pub diameter_pair: [Point; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub marginal_residual: f64,
    pub holder_violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitsMeta {
    pub variant: String,
    pub s: f64,
    pub h: f64,
    pub geometric: f64,
    pub transport_value: f64,
    pub target: f64,
    pub consistency_residual: f64,
    /// `rel_err` non-increasing for `p >= 8`; absent for sweeps shorter than three rows.
    pub trend_holds: Option<bool>,
    pub all_converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigRow {
    pub p: f64,
    pub lambda: f64,
    pub lambda_root: f64,
    pub target: f64,
    pub rel_err: f64,
    pub iterations: usize,
    pub converged: bool,
    pub holder: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotRow {
    pub p: f64,
    pub lambda_root: f64,
    pub target: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanEntry {
    pub i: usize,
    pub j: usize,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialRow {
    pub point: Point,
    pub value: f64,
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn write_table(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> CliResult<()> {
    let mut text = header.join(",");
    text.push('\n');
    for r in rows {
        text.push_str(&r.join(","));
        text.push('\n');
    }
    write_file(path, &text)
}

struct Record {
    line: u64,
    fields: csv::StringRecord,
}

impl Record {
    fn err(&self, file: &Path, msg: impl Into<String>) -> CliError {
        CliError::Input { file: file.to_path_buf(), line: self.line, msg: msg.into() }
    }

    fn float(&self, file: &Path, k: usize, name: &str) -> CliResult<f64> {
        let raw = self.fields.get(k).unwrap_or("").trim();
        raw.parse().map_err(|_| self.err(file, format!("column `{name}`: cannot parse {raw:?} as a number")))
    }

    fn uint(&self, file: &Path, k: usize, name: &str) -> CliResult<usize> {
        let raw = self.fields.get(k).unwrap_or("").trim();
        raw.parse().map_err(|_| self.err(file, format!("column `{name}`: cannot parse {raw:?} as an integer")))
    }

    fn boolean(&self, file: &Path, k: usize, name: &str) -> CliResult<bool> {
        let raw = self.fields.get(k).unwrap_or("").trim();
        raw.parse().map_err(|_| self.err(file, format!("column `{name}`: expected true or false, got {raw:?}")))
    }
}

/// Reads a CSV whose header must be one of `headers`; returns the matched
/// header index and the data records.
fn read_table(path: &Path, headers: &[&[&str]]) -> CliResult<(usize, Vec<Record>)> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
    let mut records = rdr.records();
    let input = |line: u64, msg: String| CliError::Input { file: path.to_path_buf(), line, msg };
    let head = match records.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => return Err(input(1, e.to_string())),
        None => return Err(input(1, "empty file".into())),
    };
    let got: Vec<&str> = head.iter().map(str::trim).collect();
    let which = headers.iter().position(|h| *h == got.as_slice()).ok_or_else(|| {
        input(1, format!("unexpected header {:?}, expected {:?}", got.join(","), headers[0].join(",")))
    })?;
    let width = headers[which].len();
    let mut out = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            input(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != width {
            return Err(input(line, format!("expected {width} fields, found {}", rec.len())));
        }
        out.push(Record { line, fields: rec });
    }
    Ok((which, out))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    write_file(path, &text)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input {
        file: path.to_path_buf(),
        line: e.line() as u64,
        msg: e.to_string(),
    })
}

/// Writes the sweep table; the `holder` column is present only when every
/// row carries it.
pub fn write_eig_csv(path: &Path, rows: &[EigRow]) -> CliResult<()> {
    let with_holder = !rows.is_empty() && rows.iter().all(|r| r.holder.is_some());
    let mut header = EIG_HEADER.to_vec();
    if with_holder {
        header.push("holder");
    }
    write_table(
        path,
        &header,
        rows.iter().map(|r| {
            let mut v = vec![
                fmt_float(r.p),
                fmt_float(r.lambda),
                fmt_float(r.lambda_root),
                fmt_float(r.target),
                fmt_float(r.rel_err),
                r.iterations.to_string(),
                r.converged.to_string(),
            ];
            if let (true, Some(hc)) = (with_holder, r.holder) {
                v.push(fmt_float(hc));
            }
            v
        }),
    )
}

pub fn read_eig_csv(path: &Path) -> CliResult<Vec<EigRow>> {
    let mut long = EIG_HEADER.to_vec();
    long.push("holder");
    let (which, recs) = read_table(path, &[&EIG_HEADER, &long])?;
    recs.iter()
        .map(|r| {
            Ok(EigRow {
                p: r.float(path, 0, "p")?,
                lambda: r.float(path, 1, "lambda")?,
                lambda_root: r.float(path, 2, "lambda_root")?,
                target: r.float(path, 3, "target")?,
                rel_err: r.float(path, 4, "rel_err")?,
                iterations: r.uint(path, 5, "iterations")?,
                converged: r.boolean(path, 6, "converged")?,
                holder: if which == 1 { Some(r.float(path, 7, "holder")?) } else { None },
            })
        })
        .collect()
}

pub fn write_plot_csv(path: &Path, rows: &[PlotRow]) -> CliResult<()> {
    write_table(
        path,
        &PLOT_HEADER,
        rows.iter().map(|r| vec![fmt_float(r.p), fmt_float(r.lambda_root), fmt_float(r.target)]),
    )
}

pub fn read_plot_csv(path: &Path) -> CliResult<Vec<PlotRow>> {
    let (_, recs) = read_table(path, &[&PLOT_HEADER])?;
    recs.iter()
        .map(|r| {
            Ok(PlotRow {
                p: r.float(path, 0, "p")?,
                lambda_root: r.float(path, 1, "lambda_root")?,
                target: r.float(path, 2, "target")?,
            })
        })
        .collect()
}

pub fn write_plan_csv(path: &Path, entries: &[PlanEntry]) -> CliResult<()> {
    write_table(
        path,
        &PLAN_HEADER,
        entries.iter().map(|e| vec![e.i.to_string(), e.j.to_string(), fmt_float(e.mass)]),
    )
}

pub fn read_plan_csv(path: &Path) -> CliResult<Vec<PlanEntry>> {
    let (_, recs) = read_table(path, &[&PLAN_HEADER])?;
    recs.iter()
        .map(|r| Ok(PlanEntry { i: r.uint(path, 0, "i")?, j: r.uint(path, 1, "j")?, mass: r.float(path, 2, "mass")? }))
        .collect()
}

pub fn write_potential_csv(path: &Path, rows: &[PotentialRow]) -> CliResult<()> {
    write_table(
        path,
        &POTENTIAL_HEADER,
        rows.iter().map(|r| vec![fmt_float(r.point[0]), fmt_float(r.point[1]), fmt_float(r.value)]),
    )
}

pub fn read_potential_csv(path: &Path) -> CliResult<Vec<PotentialRow>> {
    let (_, recs) = read_table(path, &[&POTENTIAL_HEADER])?;
    recs.iter()
        .map(|r| {
            Ok(PotentialRow {
                point: [r.float(path, 0, "x")?, r.float(path, 1, "y")?],
                value: r.float(path, 2, "value")?,
            })
        })
        .collect()
}

pub fn write_measure_csv(path: &Path, mu: &DiscreteMeasure) -> CliResult<()> {
    write_table(
        path,
        &MEASURE_HEADER,
        mu.support().iter().zip(mu.weights()).map(|(x, w)| vec![fmt_float(x[0]), fmt_float(x[1]), fmt_float(*w)]),
    )
}

/// Reads atoms from `x,y,mass` (or `x,mass` on a line) rows.
pub fn read_measure_csv(path: &Path) -> CliResult<DiscreteMeasure> {
    let (which, recs) = read_table(path, &[&MEASURE_HEADER, &["x", "mass"]])?;
    let mut support = Vec::with_capacity(recs.len());
    let mut weights = Vec::with_capacity(recs.len());
    for r in &recs {
        let x = r.float(path, 0, "x")?;
        let (y, w) = if which == 0 {
            (r.float(path, 1, "y")?, r.float(path, 2, "mass")?)
        } else {
            (0.0, r.float(path, 1, "mass")?)
        };
        if !(x.is_finite() && y.is_finite()) {
            return Err(r.err(path, "atom coordinates must be finite"));
        }
        if !(w >= 0.0 && w.is_finite()) {
            return Err(r.err(path, format!("column `mass`: must be a non-negative number, got {w}")));
        }
        support.push([x, y]);
        weights.push(w);
    }
    DiscreteMeasure::new(support, weights).map_err(|e| CliError::Input {
        file: path.to_path_buf(),
        line: 0,
        msg: e.to_string(),
    })
}
