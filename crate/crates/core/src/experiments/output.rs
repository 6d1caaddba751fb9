//! CSV and manifest writers. Number formatting is fixed so identical runs
//! give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::params::ModelParams;
use crate::spectra::SpectrumSeries;

use super::ExperimentError;

fn write(path: &Path, text: &str) -> Result<PathBuf, ExperimentError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| ExperimentError::io(path, e))?;
    Ok(path.to_path_buf())
}

pub fn fmt_omega(w: f64) -> String {
    format!("{w:.6}")
}

pub fn fmt_value(v: f64) -> String {
    format!("{v:.9e}")
}

/// `omega_ueV,lambda_nm,intensity` for one channel.
pub fn write_spectrum_csv(path: &Path, params: &ModelParams, series: &SpectrumSeries) -> Result<PathBuf, ExperimentError> {
    let mut out = String::from("omega_ueV,lambda_nm,intensity\n");
    for (i, v) in series.values.iter().enumerate() {
        let w = series.grid.value(i);
        let _ = writeln!(out, "{},{:.6},{}", fmt_omega(w), params.wavelength_nm(w), fmt_value(*v));
    }
    write(path, &out)
}

/// One row of a 2-D map: the sweep value and its spectrum, with an optional
/// per-point standard error.
pub struct MapRow<'a> {
    pub sweep_value: f64,
    pub series: &'a SpectrumSeries,
    pub stderr: Option<&'a [f64]>,
}

/// `sweep_value,omega_ueV,intensity[,stderr]`, rows in the given order.
pub fn write_map_csv(path: &Path, rows: &[MapRow<'_>]) -> Result<PathBuf, ExperimentError> {
    let with_err = rows.iter().any(|r| r.stderr.is_some());
    let mut out = String::from("sweep_value,omega_ueV,intensity");
    out.push_str(if with_err { ",stderr\n" } else { "\n" });
    for row in rows {
        for (i, v) in row.series.values.iter().enumerate() {
            let _ = write!(out, "{},{},{}", fmt_omega(row.sweep_value), fmt_omega(row.series.grid.value(i)), fmt_value(*v));
            if with_err {
                let e = row.stderr.map_or(0.0, |s| s[i]);
                let _ = write!(out, ",{}", fmt_value(e));
            }
            out.push('\n');
        }
    }
    write(path, &out)
}

/// Generic table with a header and preformatted cells.
pub fn write_table_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, ExperimentError> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write(path, &out)
}

/// Plain-text `key = value` run record.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn write(&self, path: &Path) -> Result<PathBuf, ExperimentError> {
        write(path, &self.render())
    }
}
