//! File formats: panels, traces, study tables, mean curves and SVG plots.
//!
//! Panels come in two CSV layouts:
//!
//! * wide: header `t,path_1,...,path_d`, one row per time on a shared grid;
//! * long: header `path_id,t,value`, one row per observation.
//!
//! Floats are written in their shortest round-trip form, so a wide panel read
//! back from its own output is bit-identical. Every writer goes through a
//! temporary file in the destination directory followed by a rename.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{H1Error, Result};
use crate::estimator::{Cell, StudyReport, TABLE_PAIRS};
use crate::firefly::GenerationRecord;
use crate::process::{PathPanel, SamplePath};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PanelFormat {
    Wide,
    Long,
}

impl FromStr for PanelFormat {
    type Err = H1Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wide" | "wide-csv" => Ok(PanelFormat::Wide),
            "long" | "long-csv" => Ok(PanelFormat::Long),
            other => Err(H1Error::Config(format!("unknown panel format {other:?}; use wide or long"))),
        }
    }
}

/// Write `bytes` to `path` atomically.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| H1Error::Io(e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

fn csv_bytes<F>(header: &[String], fill: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    fill(&mut w)?;
    w.into_inner().map_err(|e| H1Error::Io(e.into_error()))
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn parse_f64(field: &str, row: usize, what: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| H1Error::Data { row, msg: format!("{what} {field:?} is not a number") })?;
    if !v.is_finite() {
        return Err(H1Error::Data { row, msg: format!("{what} {field:?} is not finite") });
    }
    Ok(v)
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(input)
}

/// Parse a wide CSV panel.
pub fn read_wide<R: Read>(input: R) -> Result<PathPanel> {
    let mut rdr = reader(input);
    let header = rdr.headers()?.clone();
    if header.len() < 2 || header.get(0).map(str::trim) != Some("t") {
        return Err(H1Error::Data { row: 1, msg: "wide header must be t,path_1,...,path_d".into() });
    }
    let d = header.len() - 1;
    let mut times = Vec::new();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); d];
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != header.len() {
            return Err(H1Error::Data {
                row,
                msg: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        let t = parse_f64(&rec[0], row, "time")?;
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(H1Error::Data { row, msg: format!("time {t} does not exceed previous time {prev}") });
            }
        }
        times.push(t);
        for (k, col) in values.iter_mut().enumerate() {
            let field = &rec[k + 1];
            if field.trim().is_empty() {
                return Err(H1Error::Data { row, msg: format!("missing value for {}", &header[k + 1]) });
            }
            let x = parse_f64(field, row, "value")?;
            if x <= 0.0 {
                return Err(H1Error::Data { row, msg: format!("value {x} for {} is not positive", &header[k + 1]) });
            }
            col.push(x);
        }
    }
    let paths = values
        .into_iter()
        .map(|v| SamplePath { times: times.clone(), values: v })
        .collect();
    PathPanel::new(paths)
}

/// Parse a long CSV panel. Paths keep their order of first appearance.
pub fn read_long<R: Read>(input: R) -> Result<PathPanel> {
    let mut rdr = reader(input);
    let header = rdr.headers()?.clone();
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != ["path_id", "t", "value"] {
        return Err(H1Error::Data { row: 1, msg: "long header must be path_id,t,value".into() });
    }
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut paths: Vec<SamplePath> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != 3 {
            return Err(H1Error::Data { row, msg: format!("expected 3 fields, found {}", rec.len()) });
        }
        let id = rec[0].trim().to_string();
        let t = parse_f64(&rec[1], row, "time")?;
        let x = parse_f64(&rec[2], row, "value")?;
        if x <= 0.0 {
            return Err(H1Error::Data { row, msg: format!("value {x} for path {id} is not positive") });
        }
        let k = *index.entry(id.clone()).or_insert_with(|| {
            paths.push(SamplePath { times: Vec::new(), values: Vec::new() });
            paths.len() - 1
        });
        let p = &mut paths[k];
        if p.times.contains(&t) {
            return Err(H1Error::Data { row, msg: format!("duplicate observation for path {id} at t = {t}") });
        }
        if let Some(&prev) = p.times.last() {
            if t < prev {
                return Err(H1Error::Data {
                    row,
                    msg: format!("time {t} for path {id} precedes previous time {prev}"),
                });
            }
        }
        p.times.push(t);
        p.values.push(x);
    }
    PathPanel::new(paths)
}

pub fn read_panel(path: &Path, format: PanelFormat) -> Result<PathPanel> {
    let file = fs::File::open(path)?;
    match format {
        PanelFormat::Wide => read_wide(file),
        PanelFormat::Long => read_long(file),
    }
}

/// Wide CSV text of a panel on a shared grid.
pub fn wide_csv(panel: &PathPanel) -> Result<Vec<u8>> {
    let grid = panel
        .shared_grid()
        .ok_or_else(|| H1Error::Panel("wide output needs every path on the same grid".into()))?;
    let mut header = vec!["t".to_string()];
    header.extend((1..=panel.n_paths()).map(|k| format!("path_{k}")));
    csv_bytes(&header, |w| {
        for (j, &t) in grid.iter().enumerate() {
            let mut row = vec![fmt(t)];
            row.extend(panel.paths().iter().map(|p| fmt(p.values[j])));
            w.write_record(&row)?;
        }
        Ok(())
    })
}

/// Long CSV text of any panel, with path ids `1..=d`.
pub fn long_csv(panel: &PathPanel) -> Result<Vec<u8>> {
    let header = ["path_id", "t", "value"].map(String::from);
    csv_bytes(&header, |w| {
        for (k, p) in panel.paths().iter().enumerate() {
            for (&t, &x) in p.times.iter().zip(&p.values) {
                w.write_record([(k + 1).to_string(), fmt(t), fmt(x)])?;
            }
        }
        Ok(())
    })
}

pub fn write_panel(path: &Path, panel: &PathPanel, format: PanelFormat) -> Result<()> {
    let bytes = match format {
        PanelFormat::Wide => wide_csv(panel)?,
        PanelFormat::Long => long_csv(panel)?,
    };
    write_atomic(path, &bytes)
}

/// One row per firefly per generation, in `(lambda, mu, eta, sigma)` coordinates.
pub fn trace_csv(trace: &[GenerationRecord]) -> Result<Vec<u8>> {
    let header = ["generation", "firefly", "lambda", "mu", "eta", "sigma", "intensity", "alpha", "best_so_far"]
        .map(String::from);
    csv_bytes(&header, |w| {
        for rec in trace {
            for (k, (p, &v)) in rec.positions.iter().zip(&rec.intensities).enumerate() {
                let mut row = vec![rec.generation.to_string(), k.to_string()];
                row.extend(p.iter().map(|&x| fmt(x)));
                row.extend([fmt(v), fmt(rec.alpha), fmt(rec.best_so_far)]);
                w.write_record(&row)?;
            }
        }
        Ok(())
    })
}

fn cell_fields(c: &Cell) -> [String; 4] {
    [fmt(c.alpha), fmt(c.gamma), fmt(c.delta), c.n.to_string()]
}

/// Per-cell summary: mean estimates, per-parameter errors and `f_o` error.
pub fn cells_csv(report: &StudyReport) -> Result<Vec<u8>> {
    let header = [
        "alpha", "gamma", "delta", "n", "replications",
        "lambda_hat", "mu_hat", "eta_hat", "sigma_hat",
        "err_lambda", "err_mu", "err_eta", "err_sigma",
        "fo_hat", "fo_true", "fo_error",
    ]
    .map(String::from);
    csv_bytes(&header, |w| {
        for s in &report.cells {
            let mut row = cell_fields(&s.cell).to_vec();
            row.push(s.replications.to_string());
            row.extend(s.mean_estimate.iter().chain(&s.mean_param_errors).map(|&x| fmt(x)));
            row.extend([fmt(s.mean_fo_hat), fmt(s.mean_fo_true), fmt(s.mean_fo_error)]);
            w.write_record(&row)?;
        }
        Ok(())
    })
}

/// Every fit of a study.
pub fn records_csv(report: &StudyReport) -> Result<Vec<u8>> {
    let header = [
        "alpha", "gamma", "delta", "n", "replication",
        "lambda_hat", "mu_hat", "eta_hat", "sigma_hat",
        "err_lambda", "err_mu", "err_eta", "err_sigma",
        "fo_hat", "fo_true", "fo_error", "eta_in_box",
    ]
    .map(String::from);
    csv_bytes(&header, |w| {
        for r in &report.records {
            let mut row = cell_fields(&r.cell).to_vec();
            row.push(r.replication.to_string());
            row.extend(r.estimate.iter().chain(&r.param_errors).map(|&x| fmt(x)));
            row.extend([fmt(r.fo_hat), fmt(r.fo_true), fmt(r.fo_error), r.truth_in_eta_box.to_string()]);
            w.write_record(&row)?;
        }
        Ok(())
    })
}

/// Table file name for an axis pair, e.g. `table_alpha_gamma.csv`.
pub fn table_file_name(rows: crate::estimator::Axis, cols: crate::estimator::Axis) -> String {
    format!("table_{}_{}.csv", rows.name(), cols.name())
}

/// Write `cells.csv`, `records.csv` and one CSV per axis pair into `dir`;
/// returns the file names written.
pub fn write_study_tables(dir: &Path, report: &StudyReport) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, bytes: Vec<u8>| -> Result<()> {
        write_atomic(&dir.join(&name), &bytes)?;
        written.push(name);
        Ok(())
    };
    put("cells.csv".into(), cells_csv(report)?)?;
    put("records.csv".into(), records_csv(report)?)?;
    for &(rows, cols) in TABLE_PAIRS.iter() {
        let t = report.table(rows, cols).ok_or_else(|| H1Error::Numerical("missing error table".into()))?;
        let mut header = vec![rows.name().to_string()];
        header.extend(t.col_values.iter().map(|v| format!("{}={}", cols.name(), fmt(*v))));
        let bytes = csv_bytes(&header, |w| {
            for (rv, vals) in t.row_values.iter().zip(&t.values) {
                let mut row = vec![fmt(*rv)];
                row.extend(vals.iter().map(|&x| fmt(x)));
                w.write_record(&row)?;
            }
            Ok(())
        })?;
        put(table_file_name(rows, cols), bytes)?;
    }
    Ok(written)
}

/// Two-column CSV `t,<name>`.
pub fn series_csv(name: &str, times: &[f64], values: &[f64]) -> Result<Vec<u8>> {
    let header = ["t".to_string(), name.to_string()];
    csv_bytes(&header, |w| {
        for (&t, &v) in times.iter().zip(values) {
            w.write_record([fmt(t), fmt(v)])?;
        }
        Ok(())
    })
}

/// Minimal single-series line plot.
pub fn line_svg(title: &str, xs: &[f64], ys: &[f64]) -> Result<String> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(H1Error::Domain("a line plot needs at least two points".into()));
    }
    let (w, h, m) = (640.0, 400.0, 48.0);
    let range = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) }
    };
    let (x0, x1) = range(xs);
    let (y0, y1) = range(ys);
    let px = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let py = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut pts = String::new();
    for (&x, &y) in xs.iter().zip(ys) {
        write!(pts, "{:.2},{:.2} ", px(x), py(y)).expect("writing to a String");
    }
    let title = title.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
    Ok(format!(
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">
<rect width="100%" height="100%" fill="white"/>
<text x="{tx}" y="24" text-anchor="middle" font-family="sans-serif" font-size="14">{title}</text>
<line x1="{m}" y1="{yb}" x2="{xr}" y2="{yb}" stroke="black"/>
<line x1="{m}" y1="{m}" x2="{m}" y2="{yb}" stroke="black"/>
<text x="{m}" y="{lx}" font-family="sans-serif" font-size="11">{x0}</text>
<text x="{xr}" y="{lx}" text-anchor="end" font-family="sans-serif" font-size="11">{x1}</text>
<text x="4" y="{yb}" font-family="sans-serif" font-size="11">{y0:.3e}</text>
<text x="4" y="{m}" font-family="sans-serif" font-size="11">{y1:.3e}</text>
<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{pts}"/>
</svg>
"##,
        tx = w / 2.0,
        yb = h - m,
        xr = w - m,
        lx = h - m + 16.0,
        pts = pts.trim_end(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err_row(r: Result<PathPanel>) -> usize {
        match r {
            Err(H1Error::Data { row, .. }) => row,
            other => panic!("expected a data error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_wide_file() {
        let p = read_wide("t,path_1,path_2\n0,1,2\n1,1.5,2.5\n2,2,3\n".as_bytes()).unwrap();
        assert_eq!(p.n_paths(), 2);
        assert!(p.paths().iter().all(|q| q.len() == 3));
        assert_eq!(p.paths()[1].values, vec![2.0, 2.5, 3.0]);
    }

    #[test]
    fn wide_diagnostics_carry_rows() {
        assert_eq!(err_row(read_wide("t,path_1\n0,1\n1,0\n".as_bytes())), 3);
        assert_eq!(err_row(read_wide("t,path_1\n0,1\n0,2\n".as_bytes())), 3);
        assert_eq!(err_row(read_wide("t,path_1,path_2\n0,1,2\n1,2\n".as_bytes())), 3);
        assert_eq!(err_row(read_wide("t,path_1,path_2\n0,1,\n".as_bytes())), 2);
        assert_eq!(err_row(read_wide("t,path_1\n0,abc\n".as_bytes())), 2);
        assert_eq!(err_row(read_wide("time,path_1\n0,1\n".as_bytes())), 1);
    }

    #[test]
    fn long_format_allows_ragged_grids() {
        let p = read_long("path_id,t,value\na,0,1\nb,0,2\na,1,1.5\nb,0.5,2.2\nb,2,3\n".as_bytes()).unwrap();
        assert_eq!(p.n_paths(), 2);
        assert_eq!(p.paths()[0].times, vec![0.0, 1.0]);
        assert_eq!(p.paths()[1].times, vec![0.0, 0.5, 2.0]);
        assert!(p.shared_grid().is_none());
        assert!(wide_csv(&p).is_err());
    }

    #[test]
    fn long_diagnostics_carry_rows() {
        assert_eq!(err_row(read_long("path_id,t,value\na,0,1\na,0,2\n".as_bytes())), 3);
        assert_eq!(err_row(read_long("path_id,t,value\na,1,1\nb,0,1\na,0,2\n".as_bytes())), 4);
        assert_eq!(err_row(read_long("path_id,t,value\na,0,-1\n".as_bytes())), 2);
        assert_eq!(err_row(read_long("path_id,t,value\na,0\n".as_bytes())), 2);
    }

    #[test]
    fn wide_round_trip_is_bit_identical() {
        let vals = [0.1, 1.0 / 3.0, 2.0f64.sqrt(), 1e-300, 123456789.12345679, 5e-324];
        let times = vec![0.0, 0.1, 0.30000000000000004, 1e-7, 2.5, 3.0];
        let mut ts = times.clone();
        ts.sort_by(f64::total_cmp);
        let panel = PathPanel::new(vec![
            SamplePath { times: ts.clone(), values: vals.to_vec() },
            SamplePath { times: ts.clone(), values: vals.iter().rev().copied().collect() },
        ])
        .unwrap();
        let bytes = wide_csv(&panel).unwrap();
        let back = read_wide(bytes.as_slice()).unwrap();
        for (a, b) in panel.paths().iter().zip(back.paths()) {
            assert!(a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits()));
            assert!(a.times.iter().zip(&b.times).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
        assert_eq!(wide_csv(&back).unwrap(), bytes);
        let long = read_long(long_csv(&panel).unwrap().as_slice()).unwrap();
        assert_eq!(long, panel);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("x.txt");
        write_atomic(&f, b"one").unwrap();
        write_atomic(&f, b"two").unwrap();
        assert_eq!(fs::read(&f).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn svg_contains_every_point() {
        let s = line_svg("m<t>", &[0.0, 1.0, 2.0], &[1.0, 2.0, 1.5]).unwrap();
        assert!(s.starts_with("<svg"));
        assert!(s.contains("m&lt;t&gt;"));
        let pts = s.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(pts.split_whitespace().count(), 3);
        assert!(line_svg("", &[0.0], &[1.0]).is_err());
    }
}
