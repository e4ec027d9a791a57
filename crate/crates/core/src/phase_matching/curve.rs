//! Sampled spectra and their widths.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    TransmissionDb,
    NormalizedIntensity,
    GvdPs2PerKm,
}

impl ValueKind {
    /// CSV column header for the value column, unit included.
    pub fn column(self) -> &'static str {
        match self {
            ValueKind::TransmissionDb => "transmission_db",
            ValueKind::NormalizedIntensity => "normalized_intensity",
            ValueKind::GvdPs2PerKm => "gvd_ps2_per_km",
        }
    }
}

/// Real values on a strictly increasing wavelength grid (nm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCurve {
    wavelengths: Vec<f64>,
    values: Vec<f64>,
    kind: ValueKind,
}

impl SpectralCurve {
    pub fn new(wavelengths: Vec<f64>, values: Vec<f64>, kind: ValueKind) -> Result<Self> {
        if wavelengths.len() != values.len() {
            return Err(Error::param(
                "values",
                format!("{} values for {} wavelengths", values.len(), wavelengths.len()),
            ));
        }
        if wavelengths.is_empty() {
            return Err(Error::InsufficientData("empty spectral curve".into()));
        }
        check_increasing(&wavelengths)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("values", "non-finite value"));
        }
        if kind == ValueKind::NormalizedIntensity && values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::param("values", "normalized intensity outside [0, 1]"));
        }
        Ok(SpectralCurve {
            wavelengths,
            values,
            kind,
        })
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.wavelengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavelengths.is_empty()
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.wavelengths[0], self.wavelengths[self.len() - 1])
    }

    /// Index and value of the first global maximum.
    pub fn argmax(&self) -> (usize, f64) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, v)| if v > best.1 { (k, v) } else { best })
    }

    /// Wavelength of the first global maximum.
    pub fn peak_wavelength(&self) -> f64 {
        self.wavelengths[self.argmax().0]
    }

    /// Linear interpolation; `None` outside the grid.
    pub fn interpolate(&self, wavelength: f64) -> Option<f64> {
        let (lo, hi) = self.bounds();
        if !(lo..=hi).contains(&wavelength) {
            return None;
        }
        let k = self.wavelengths.partition_point(|&w| w <= wavelength);
        if k == self.len() {
            return Some(self.values[k - 1]);
        }
        let (x0, x1) = (self.wavelengths[k - 1], self.wavelengths[k]);
        let (y0, y1) = (self.values[k - 1], self.values[k]);
        Some(y0 + (y1 - y0) * (wavelength - x0) / (x1 - x0))
    }

    /// Writes `wavelength_nm,<value column>` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["wavelength_nm", self.kind.column()])?;
        for (l, v) in self.wavelengths.iter().zip(&self.values) {
            w.write_record([l.to_string(), v.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Writes the CSV plus a `<stem>.meta.json` sidecar and returns the sidecar path.
    pub fn write_with_metadata(&self, path: &Path, config_hash: &str) -> Result<PathBuf> {
        self.write_csv(path)?;
        let meta = CurveMetadata {
            value_kind: self.kind,
            wavelength_min_nm: self.bounds().0,
            wavelength_max_nm: self.bounds().1,
            points: self.len(),
            config_hash: config_hash.to_string(),
        };
        let meta_path = sidecar_path(path);
        let mut f = std::fs::File::create(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        serde_json::to_writer_pretty(&mut f, &meta)?;
        writeln!(f).map_err(|e| Error::io(&meta_path, e))?;
        Ok(meta_path)
    }

    /// Reads a two-column CSV (header row required).
    pub fn read_csv(path: &Path, kind: ValueKind) -> Result<Self> {
        let (w, v) = read_two_columns(path)?;
        SpectralCurve::new(w, v, kind)
    }
}

/// Sidecar written next to every exported curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMetadata {
    pub value_kind: ValueKind,
    pub wavelength_min_nm: f64,
    pub wavelength_max_nm: f64,
    pub points: usize,
    pub config_hash: String,
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

pub(crate) fn check_increasing(xs: &[f64]) -> Result<()> {
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::param("wavelengths", "non-finite wavelength"));
    }
    if let Some(k) = xs.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::param(
            "wavelengths",
            format!("grid not strictly increasing at index {}", k + 1),
        ));
    }
    Ok(())
}

pub(crate) fn read_two_columns(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(file);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::parse(path.display().to_string(), format!("row {} has {} columns", row + 1, rec.len())));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::parse(path.display().to_string(), format!("`{s}` is not a number")))
        };
        xs.push(num(&rec[0])?);
        ys.push(num(&rec[1])?);
    }
    Ok((xs, ys))
}

/// Half-maximum crossings bounding the contiguous region around the global
/// maximum, linearly interpolated between grid points.
pub fn half_max_crossings(curve: &SpectralCurve) -> Result<(f64, f64)> {
    let (peak, max) = curve.argmax();
    if !(max > 0.0) {
        return Err(Error::NoSignal("curve has no positive maximum".into()));
    }
    let half = max / 2.0;
    let w = curve.wavelengths();
    let v = curve.values();
    let cross = |inside: usize, outside: usize| {
        let t = (v[inside] - half) / (v[inside] - v[outside]);
        w[inside] + t * (w[outside] - w[inside])
    };

    let mut k = peak;
    while k > 0 && v[k - 1] >= half {
        k -= 1;
    }
    if k == 0 {
        return Err(Error::IncompleteSupport);
    }
    let left = cross(k, k - 1);

    let mut k = peak;
    while k + 1 < v.len() && v[k + 1] >= half {
        k += 1;
    }
    if k + 1 == v.len() {
        return Err(Error::IncompleteSupport);
    }
    let right = cross(k, k + 1);
    Ok((left, right))
}

/// Full width at half maximum of the main lobe.
pub fn fwhm(curve: &SpectralCurve) -> Result<f64> {
    let (l, r) = half_max_crossings(curve)?;
    Ok(r - l)
}

/// Uniform grid from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        n => (0..n)
            .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}
