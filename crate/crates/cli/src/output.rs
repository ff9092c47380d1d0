//! CSV and JSON emission.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{bail, Context};
use serde::Serialize;

pub const VERSION_HEADER: &str = concat!("# acc-specgram ", env!("CARGO_PKG_VERSION"));

pub const SUMMARY_COLUMNS: [&str; 10] =
    ["R", "trace", "N", "E_count", "var_spectral", "var_radial", "ratio", "err_raw", "err_normalized", "tail_mass"];

pub const SCHEMA: &str = "\
summary columns (CSV, one row per R; empty field = not computed):
  R               dilation factor applied to the region
  trace           quadrature trace sum_i w_i K(x_i,x_i) of the discretized operator
  N               floor(trace) + 1, number of spectrogram terms
  E_count         expected count K(x,x) * volume(R * region)
  var_spectral    sum_j mu_j (1 - mu_j) over the discretized spectrum
  var_radial      number variance from the radial lens-volume integral (balls only)
  ratio           variance / E_count, using var_radial when present, else var_spectral
  err_raw         L1 distance between rho and K(x,x) 1_region, window plus tail mass
  err_normalized  err_raw / N
  tail_mass       N minus the mass of rho on the evaluation window
field columns (spectrogram --fields, one row per evaluation node):
  R, x0..x{d-1}, rho, target
floats are written with 17 significant digits; the first line is a version header
";

/// One summary row. Absent values stay `None` and are written as empty fields.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SummaryRow {
    #[serde(rename = "R")]
    pub r: f64,
    pub trace: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "E_count")]
    pub e_count: f64,
    pub var_spectral: Option<f64>,
    pub var_radial: Option<f64>,
    pub ratio: Option<f64>,
    pub err_raw: Option<f64>,
    pub err_normalized: Option<f64>,
    pub tail_mass: Option<f64>,
}

impl SummaryRow {
    fn floats(&self) -> [Option<f64>; 9] {
        [
            Some(self.r),
            self.trace,
            Some(self.e_count),
            self.var_spectral,
            self.var_radial,
            self.ratio,
            self.err_raw,
            self.err_normalized,
            self.tail_mass,
        ]
    }

    pub fn ensure_finite(&self) -> anyhow::Result<()> {
        if self.floats().iter().flatten().any(|v| !v.is_finite()) {
            bail!("non-finite value in summary row for R = {}", self.r);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldRow {
    #[serde(rename = "R")]
    pub r: f64,
    pub x: Vec<f64>,
    pub rho: f64,
    pub target: f64,
}

pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

fn open(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p).with_context(|| format!("output: cannot create {}", p.display()))?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_summary_csv(path: Option<&Path>, rows: &[SummaryRow]) -> anyhow::Result<()> {
    let mut out = open(path)?;
    writeln!(out, "{VERSION_HEADER}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_COLUMNS)?;
    for row in rows {
        row.ensure_finite()?;
        w.write_record([
            fmt_float(row.r),
            fmt_opt(row.trace),
            row.n.map(|n| n.to_string()).unwrap_or_default(),
            fmt_float(row.e_count),
            fmt_opt(row.var_spectral),
            fmt_opt(row.var_radial),
            fmt_opt(row.ratio),
            fmt_opt(row.err_raw),
            fmt_opt(row.err_normalized),
            fmt_opt(row.tail_mass),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_fields_csv(path: &Path, dim: usize, rows: &[FieldRow]) -> anyhow::Result<()> {
    let mut out = open(Some(path))?;
    writeln!(out, "{VERSION_HEADER}")?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["R".to_string()];
    header.extend((0..dim).map(|k| format!("x{k}")));
    header.extend(["rho".to_string(), "target".to_string()]);
    w.write_record(&header)?;
    for row in rows {
        if !row.rho.is_finite() {
            bail!("non-finite spectrogram value at R = {}", row.r);
        }
        let mut rec = vec![fmt_float(row.r)];
        rec.extend(row.x.iter().map(|&v| fmt_float(v)));
        rec.extend([fmt_float(row.rho), fmt_float(row.target)]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: Option<&Path>, doc: &T) -> anyhow::Result<()> {
    let mut out = open(path)?;
    serde_json::to_writer_pretty(&mut out, doc)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_float(2.0), "2.0000000000000000e0");
        let v = 1.0 / 3.0;
        assert_eq!(fmt_float(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn absent_fields_are_empty() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let row = SummaryRow { r: 1.0, e_count: 2.0, ..Default::default() };
        write_summary_csv(Some(&p), &[row]).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], VERSION_HEADER);
        assert_eq!(lines[1], SUMMARY_COLUMNS.join(","));
        assert_eq!(lines[2], "1.0000000000000000e0,,,2.0000000000000000e0,,,,,,");
    }

    #[test]
    fn non_finite_rejected() {
        let row = SummaryRow { r: 1.0, e_count: 2.0, ratio: Some(f64::NAN), ..Default::default() };
        assert!(row.ensure_finite().is_err());
    }
}
