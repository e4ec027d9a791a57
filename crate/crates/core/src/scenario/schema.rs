//! Documented layouts of every emitted file, checked by a self-test.

use std::path::{Path, PathBuf};

use crate::counting::COUNT_COLUMNS;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FileSchema {
    /// Exact header; every cell numeric, except optional ones which may be empty.
    Csv { header: &'static [&'static str], optional: &'static [&'static str], rows: Option<usize> },
    /// JSON object with at least these top-level keys.
    Json { keys: &'static [&'static str] },
}

const RHO_HEADER: [&str; 5] = ["basis", "HH", "HV", "VH", "VV"];

/// File-name suffix and its schema, most specific first.
pub const SCHEMAS: &[(&str, FileSchema)] = &[
    (
        "_counts.csv",
        FileSchema::Csv {
            header: &COUNT_COLUMNS,
            optional: &[
                "signal_qwp_deg",
                "signal_hwp_deg",
                "signal_polarizer_deg",
                "idler_qwp_deg",
                "idler_hwp_deg",
                "idler_polarizer_deg",
            ],
            rows: Some(17),
        },
    ),
    ("_rho_real.csv", FileSchema::Csv { header: &RHO_HEADER, optional: &[], rows: Some(4) }),
    ("_rho_imag.csv", FileSchema::Csv { header: &RHO_HEADER, optional: &[], rows: Some(4) }),
    (
        "_metrics.json",
        FileSchema::Json {
            keys: &[
                "fidelity",
                "purity",
                "visibility_hv",
                "visibility_ad",
                "chsh_s",
                "chsh_violation",
                "log_likelihood",
                "iterations",
                "converged",
                "rho_real",
                "rho_imag",
            ],
        },
    ),
    (
        "_brightness.json",
        FileSchema::Json {
            keys: &[
                "label",
                "pump_power_mw",
                "singles_signal_hz",
                "singles_idler_hz",
                "coincidences_hz",
                "accidentals_measured_hz",
                "accidentals_estimated_hz",
                "brightness_pairs_per_s_per_nm_per_mw",
                "pgr_pairs_per_s_per_mw",
                "filter_bandwidth_nm",
                "source_bandwidth_nm",
            ],
        },
    ),
    (
        ".meta.json",
        FileSchema::Json { keys: &["value_kind", "wavelength_min_nm", "wavelength_max_nm", "points", "config_hash"] },
    ),
    (
        "spdc_spectrum.csv",
        FileSchema::Csv { header: &["wavelength_nm", "normalized_intensity"], optional: &[], rows: None },
    ),
    ("shg_upper.csv", FileSchema::Csv { header: &["wavelength_nm", "normalized_intensity"], optional: &[], rows: None }),
    ("shg_lower.csv", FileSchema::Csv { header: &["wavelength_nm", "normalized_intensity"], optional: &[], rows: None }),
    ("gvd.csv", FileSchema::Csv { header: &["wavelength_nm", "gvd_ps2_per_km"], optional: &[], rows: None }),
    (
        "spectra.json",
        FileSchema::Json { keys: &["pump_nm", "spdc", "spdc_clipped_fwhm_nm", "shg_upper", "shg_lower", "gvd", "gvd_min_abs_nm", "gvd_zero_crossings_nm"] },
    ),
    ("mmi_fit.json", FileSchema::Json { keys: &["input", "per_splitter_loss_db", "intercept_dbm", "residuals_db"] }),
    (
        "report.json",
        FileSchema::Json {
            keys: &["scenario", "config_hash", "seed", "tool_version", "wall_time_s", "subtract_accidentals", "channels"],
        },
    ),
];

fn schema_for(path: &Path) -> Option<FileSchema> {
    let name = path.file_name()?.to_str()?;
    SCHEMAS.iter().find(|(suffix, _)| name.ends_with(suffix)).map(|(_, s)| *s)
}

fn bad(path: &Path, message: impl Into<String>) -> Error {
    Error::parse(path.display().to_string(), message)
}

/// Checks one emitted file against its schema.
pub fn validate_file(path: &Path) -> Result<()> {
    let schema = schema_for(path).ok_or_else(|| bad(path, "no documented schema for this file name"))?;
    match schema {
        FileSchema::Csv { header, optional, rows } => {
            let mut rdr = csv::Reader::from_path(path)?;
            let got: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
            if got != header {
                return Err(bad(path, format!("header {got:?}, expected {header:?}")));
            }
            let mut n = 0;
            for (row, rec) in rdr.records().enumerate() {
                let rec = rec?;
                for (cell, col) in rec.iter().zip(header) {
                    if *col == "basis" || (cell.is_empty() && optional.contains(col)) {
                        continue;
                    }
                    if !cell.parse::<f64>().is_ok_and(f64::is_finite) {
                        return Err(bad(path, format!("row {}, column {col}: `{cell}` is not a finite number", row + 1)));
                    }
                }
                n += 1;
            }
            match rows {
                Some(r) if r != n => Err(bad(path, format!("{n} data rows, expected {r}"))),
                _ if n == 0 => Err(bad(path, "no data rows")),
                _ => Ok(()),
            }
        }
        FileSchema::Json { keys } => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let value: serde_json::Value = serde_json::from_str(&text)?;
            let obj = value.as_object().ok_or_else(|| bad(path, "top level is not an object"))?;
            match keys.iter().find(|k| !obj.contains_key(**k)) {
                Some(k) => Err(bad(path, format!("missing key `{k}`"))),
                None => Ok(()),
            }
        }
    }
}

/// Validates every file in `dir`; returns the files checked.
pub fn validate_outputs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|e| Error::io(dir, e)))
        .collect::<Result<_>>()?;
    files.retain(|p| p.is_file());
    files.sort();
    for f in &files {
        validate_file(f)?;
    }
    Ok(files)
}
