//! CSV and JSON artifacts.
//!
//! Every CSV starts with `# memevo-csv v1`, followed by `# key = value`
//! lines echoing the run parameters, a column header and the data. Floats
//! are written in shortest round-trip form, so reading a file back yields the
//! exact values that were written.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps::{Integrability, PastHistory, StateFunction};
use crate::quad::Grid;
use crate::spectral::WeightedField;
use crate::stability::MarginReport;
use crate::volterra::Trajectory;

pub const CSV_VERSION: &str = "# memevo-csv v1";

/// Parameters echoed into file headers, in insertion order.
pub type Echo = Vec<(String, String)>;

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn csv_writer(path: &Path, echo: &Echo, columns: &[&str]) -> Result<csv::Writer<BufWriter<File>>> {
    let mut f = create(path)?;
    writeln!(f, "{CSV_VERSION}")?;
    for (k, v) in echo {
        writeln!(f, "# {k} = {v}")?;
    }
    let mut w = csv::Writer::from_writer(f);
    w.write_record(columns).map_err(csv_err)?;
    Ok(w)
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::Input(format!("csv: {other:?}")),
    }
}

fn finish(w: csv::Writer<BufWriter<File>>) -> Result<()> {
    w.into_inner().map_err(|e| Error::Io(e.into_error()))?.flush()?;
    Ok(())
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

/// t, mode, u, v for every `stride`-th step; modes are numbered from 1.
pub fn write_trajectory(path: &Path, traj: &Trajectory, stride: usize, echo: &Echo) -> Result<()> {
    let mut w = csv_writer(path, echo, &["t", "mode", "u", "v"])?;
    for n in (0..traj.steps()).step_by(stride.max(1)) {
        for m in 0..traj.modes() {
            w.write_record([fmt(traj.times[n]), (m + 1).to_string(), fmt(traj.u[n][m]), fmt(traj.v[n][m])]).map_err(csv_err)?;
        }
    }
    finish(w)
}

/// t, E, rate_quadrature, rate_fd.
///
/// Both rates are d/dt of 2E: the quadrature column comes from the solver
/// (NaN when it has none), the other from centered differences of E
/// (NaN at the two ends).
pub fn write_energy(path: &Path, times: &[f64], energy: &[f64], rate: Option<&[f64]>, stride: usize, echo: &Echo) -> Result<()> {
    let mut w = csv_writer(path, echo, &["t", "E", "rate_quadrature", "rate_fd"])?;
    let n = energy.len();
    for j in (0..n).step_by(stride.max(1)) {
        let fd = if j == 0 || j + 1 == n { f64::NAN } else { (energy[j + 1] - energy[j - 1]) / (times[j + 1] - times[j - 1]) * 2.0 };
        let q = rate.map_or(f64::NAN, |r| r[j]);
        w.write_record([fmt(times[j]), fmt(energy[j]), fmt(q), fmt(fd)]).map_err(csv_err)?;
    }
    finish(w)
}

/// t, mode, value.
pub fn write_state_function(path: &Path, f: &StateFunction, echo: &Echo) -> Result<()> {
    let mut w = csv_writer(path, echo, &["t", "mode", "value"])?;
    for (j, t) in f.times.iter().enumerate() {
        for (m, row) in f.values.iter().enumerate() {
            w.write_record([fmt(*t), (m + 1).to_string(), fmt(row[j])]).map_err(csv_err)?;
        }
    }
    finish(w)
}

/// t, s, mode, value at cell midpoints, one block per snapshot.
pub fn write_fields(path: &Path, fields: &[(f64, &WeightedField)], echo: &Echo) -> Result<()> {
    let mut w = csv_writer(path, echo, &["t", "s", "mode", "value"])?;
    for (t, f) in fields {
        for (m, row) in f.values.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                w.write_record([fmt(*t), fmt(f.grid.mid(j)), (m + 1).to_string(), fmt(*x)]).map_err(csv_err)?;
            }
        }
    }
    finish(w)
}

/// t, then one margin column per inequality, then a final row of tolerances
/// marked by t = NaN.
pub fn write_margins(path: &Path, rep: &MarginReport, echo: &Echo) -> Result<()> {
    let mut cols = vec!["t"];
    cols.extend(rep.margins.iter().map(|m| m.name));
    let mut w = csv_writer(path, echo, &cols)?;
    let len = rep.margins.first().map_or(0, |m| m.values.len());
    for i in 0..len {
        let mut row = vec![fmt((rep.first_step + i) as f64 * rep.dt)];
        row.extend(rep.margins.iter().map(|m| fmt(m.values[i])));
        w.write_record(&row).map_err(csv_err)?;
    }
    let mut row = vec![fmt(f64::NAN)];
    row.extend(rep.margins.iter().map(|m| fmt(m.tol)));
    w.write_record(&row).map_err(csv_err)?;
    finish(w)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, value).map_err(|e| Error::Input(e.to_string()))?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

/// Numeric rows of a CSV, skipping `#` lines and a non-numeric header.
fn read_rows(path: &Path, width: usize) -> Result<Vec<Vec<f64>>> {
    let file = File::open(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    let mut r = csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).trim(csv::Trim::All).from_reader(file);
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) if v.len() == width => rows.push(v),
            Ok(v) => return Err(Error::Input(format!("{}: row {} has {} columns, expected {width}", path.display(), i + 1, v.len()))),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(Error::Input(format!("{}: row {}: {e}", path.display(), i + 1))),
        }
    }
    if rows.is_empty() {
        return Err(Error::Input(format!("{}: no data rows", path.display())));
    }
    Ok(rows)
}

fn mode_index(x: f64, path: &Path) -> Result<usize> {
    if x >= 1.0 && x.fract() == 0.0 {
        Ok(x as usize - 1)
    } else {
        Err(Error::Input(format!("{}: mode {x} is not a positive integer", path.display())))
    }
}

/// Rows (x, mode, value) grouped into per-mode series over shared abscissae.
fn read_modal(path: &Path) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let rows = read_rows(path, 3)?;
    let modes = rows.iter().map(|r| mode_index(r[1], path)).collect::<Result<Vec<_>>>()?;
    let n = modes.iter().max().unwrap() + 1;
    if rows.len() % n != 0 {
        return Err(Error::Input(format!("{}: {} rows do not split into {n} modes", path.display(), rows.len())));
    }
    let mut xs = Vec::with_capacity(rows.len() / n);
    let mut values = vec![Vec::with_capacity(rows.len() / n); n];
    for (i, (r, m)) in rows.iter().zip(&modes).enumerate() {
        if *m != i % n {
            return Err(Error::Input(format!("{}: row {} has mode {}, expected {}", path.display(), i + 1, m + 1, i % n + 1)));
        }
        if i % n == 0 {
            xs.push(r[0]);
        } else if r[0] != xs[xs.len() - 1] {
            return Err(Error::Input(format!("{}: row {} changes the abscissa within a block", path.display(), i + 1)));
        }
        values[*m].push(r[2]);
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input(format!("{}: abscissae must increase", path.display())));
    }
    Ok((xs, values))
}

/// F₀ from a (t, mode, value) CSV.
pub fn read_state_function(path: &Path) -> Result<StateFunction> {
    let (t, values) = read_modal(path)?;
    if values.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Input(format!("{}: non-finite F0 sample", path.display())));
    }
    Ok(StateFunction::new(t, values))
}

/// φ₀ from a (s, mode, value) CSV sampled at the midpoints of `grid`.
/// Missing cells beyond the last row are taken as zero.
pub fn read_history(path: &Path, grid: Grid) -> Result<PastHistory> {
    let (s, rows) = read_modal(path)?;
    if s.len() > grid.cells {
        return Err(Error::Input(format!("{}: {} samples exceed the {} history cells", path.display(), s.len(), grid.cells)));
    }
    for (j, x) in s.iter().enumerate() {
        if (x - grid.mid(j)).abs() > 1e-9 * grid.width {
            return Err(Error::Grid(format!("{}: sample {} at s = {x}, expected the midpoint {}", path.display(), j + 1, grid.mid(j))));
        }
    }
    let values = rows
        .into_iter()
        .map(|mut r| {
            r.resize(grid.cells, 0.0);
            r
        })
        .collect();
    Ok(PastHistory { values, grid, integrability: Integrability::General })
}

/// (s, μ) table for a tabulated kernel.
pub fn read_kernel_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let rows = read_rows(path, 2)?;
    Ok(rows.into_iter().map(|r| (r[0], r[1])).unzip())
}
