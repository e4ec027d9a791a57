//! Refractive-index models: an analytic Sellmeier set for bulk lithium
//! niobate and piecewise-cubic interpolation of sampled effective indices.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::curve::{check_increasing, read_two_columns};
use crate::error::{Error, Result};

/// Temperature-dependent extraordinary-index Sellmeier equation for
/// congruent lithium niobate,
///
/// `n² = a1 + b1·f + (a2 + b2·f)/(λ² − (a3 + b3·f)²) + (a4 + b4·f)/(λ² − a5²) − a6·λ²`
///
/// with `λ` in µm and `f = (T − T0)(T + T1)` for `T` in °C.
///
/// The default coefficients are those of D. H. Jundt, "Temperature-dependent
/// Sellmeier equation for the index of refraction, n_e, in congruent lithium
/// niobate", Opt. Lett. 22, 1553 (1997).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LithiumNiobateSellmeier {
    pub a: [f64; 6],
    pub b: [f64; 4],
    /// T0, °C
    pub reference_temperature: f64,
    /// T1, °C
    pub temperature_offset: f64,
    pub window_nm: [f64; 2],
}

impl Default for LithiumNiobateSellmeier {
    fn default() -> Self {
        LithiumNiobateSellmeier {
            a: [5.35583, 0.100473, 0.20692, 100.0, 11.34927, 1.5334e-2],
            b: [4.629e-7, 3.862e-8, -0.89e-8, 2.657e-5],
            reference_temperature: 24.5,
            temperature_offset: 570.82,
            window_nm: [400.0, 5000.0],
        }
    }
}

impl LithiumNiobateSellmeier {
    fn f(&self, temperature: f64) -> f64 {
        (temperature - self.reference_temperature) * (temperature + self.temperature_offset)
    }

    /// `n²` and its first two derivatives with respect to λ in µm.
    fn n_squared(&self, lambda_um: f64, temperature: f64) -> (f64, f64, f64) {
        let [a1, a2, a3, a4, a5, a6] = self.a;
        let [b1, b2, b3, b4] = self.b;
        let f = self.f(temperature);
        let x = lambda_um;
        let x2 = x * x;
        // pole term p / (x² − q²) and its derivatives
        let pole = |p: f64, q: f64| {
            let d = x2 - q * q;
            let v = p / d;
            let d1 = -2.0 * p * x / (d * d);
            let d2 = -2.0 * p / (d * d) + 8.0 * p * x2 / (d * d * d);
            (v, d1, d2)
        };
        let (u0, u1, u2) = pole(a2 + b2 * f, a3 + b3 * f);
        let (v0, v1, v2) = pole(a4 + b4 * f, a5);
        (
            a1 + b1 * f + u0 + v0 - a6 * x2,
            u1 + v1 - 2.0 * a6 * x,
            u2 + v2 - 2.0 * a6,
        )
    }

    pub fn index(&self, wavelength_nm: f64, temperature: f64) -> f64 {
        self.n_squared(wavelength_nm * 1e-3, temperature).0.sqrt()
    }

    /// Analytic `d²n/dλ²` in nm⁻².
    pub fn second_derivative(&self, wavelength_nm: f64, temperature: f64) -> f64 {
        let (s, s1, s2) = self.n_squared(wavelength_nm * 1e-3, temperature);
        let n = s.sqrt();
        let per_um2 = s2 / (2.0 * n) - s1 * s1 / (4.0 * n * n * n);
        per_um2 * 1e-6
    }
}

/// Effective index sampled on a strictly increasing wavelength grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledIndex {
    wavelengths_nm: Vec<f64>,
    index: Vec<f64>,
}

/// Fewest samples the cubic interpolant accepts.
pub const MIN_INTERPOLATION_SAMPLES: usize = 4;
/// Fewest samples for finite-difference derivatives.
pub const MIN_DERIVATIVE_SAMPLES: usize = 5;

impl SampledIndex {
    pub fn new(wavelengths_nm: Vec<f64>, index: Vec<f64>) -> Result<Self> {
        if wavelengths_nm.len() != index.len() {
            return Err(Error::param("index", "wavelength and index columns differ in length"));
        }
        if wavelengths_nm.len() < MIN_INTERPOLATION_SAMPLES {
            return Err(Error::InsufficientData(format!(
                "{} index samples, cubic interpolation needs {MIN_INTERPOLATION_SAMPLES}",
                wavelengths_nm.len()
            )));
        }
        check_increasing(&wavelengths_nm)?;
        if index.iter().any(|n| !n.is_finite() || *n <= 0.0) {
            return Err(Error::param("index", "index samples must be finite and positive"));
        }
        Ok(SampledIndex {
            wavelengths_nm,
            index,
        })
    }

    /// Two-column CSV: `wavelength_nm,index`.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let (w, n) = read_two_columns(path)?;
        SampledIndex::new(w, n)
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut w = Vec::new();
        let mut n = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let num = |k: usize| {
                rec.get(k)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| Error::parse("index csv", format!("bad row {rec:?}")))
            };
            w.push(num(0)?);
            n.push(num(1)?);
        }
        SampledIndex::new(w, n)
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelengths_nm
    }

    pub fn samples(&self) -> &[f64] {
        &self.index
    }

    pub fn window(&self) -> (f64, f64) {
        (self.wavelengths_nm[0], self.wavelengths_nm[self.len() - 1])
    }

    /// Smallest sample spacing, used as the finite-difference step.
    pub fn min_spacing(&self) -> f64 {
        self.wavelengths_nm
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Four-point Lagrange interpolation on the stencil surrounding `x`.
    /// Exact at the nodes and for cubic data; continuous everywhere.
    pub fn interpolate(&self, x: f64) -> f64 {
        self.lagrange(x, |j| self.index[j])
    }

    fn lagrange(&self, x: f64, value: impl Fn(usize) -> f64) -> f64 {
        let xs = &self.wavelengths_nm;
        let n = xs.len();
        let k = xs.partition_point(|&w| w <= x).clamp(1, n - 1) - 1;
        let start = k.saturating_sub(1).min(n - 4);
        let nodes = &xs[start..start + 4];
        let mut sum = 0.0;
        for j in 0..4 {
            let mut basis = 1.0;
            for m in 0..4 {
                if m != j {
                    basis *= (x - nodes[m]) / (nodes[j] - nodes[m]);
                }
            }
            sum += value(start + j) * basis;
        }
        sum
    }

    /// Central second difference of the interpolant on a uniform stencil of
    /// the smallest sample spacing, in nm⁻². The stencil is shifted inward at
    /// the window edges.
    pub fn second_derivative(&self, x: f64) -> Result<f64> {
        if self.len() < MIN_DERIVATIVE_SAMPLES {
            return Err(Error::InsufficientData(format!(
                "{} index samples, derivatives need {MIN_DERIVATIVE_SAMPLES}",
                self.len()
            )));
        }
        let h = self.min_spacing();
        let (lo, hi) = self.window();
        let x = x.clamp(lo + h, hi - h);
        // differencing the residual from the end-to-end chord keeps the
        // large linear part of n(λ) out of the cancellation
        let n = self.len();
        let (x0, y0) = (self.wavelengths_nm[0], self.index[0]);
        let slope = (self.index[n - 1] - y0) / (self.wavelengths_nm[n - 1] - x0);
        let residual = |j: usize| (self.index[j] - y0) - (self.wavelengths_nm[j] - x0) * slope;
        let f = |t| self.lagrange(t, residual);
        Ok((f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h))
    }
}

/// The index model used for every phase-mismatch evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DispersionModel {
    Sellmeier(LithiumNiobateSellmeier),
    Sampled(SampledIndex),
}

impl Default for DispersionModel {
    fn default() -> Self {
        DispersionModel::Sellmeier(LithiumNiobateSellmeier::default())
    }
}

const BUNDLED_WAVEGUIDE_INDEX: &str = include_str!("../../data/tfln_waveguide_index.csv");

impl DispersionModel {
    /// Synthetic thin-film waveguide effective index shipped with the crate:
    /// zero GVD at 1559 nm and a pump/fundamental group-index mismatch that
    /// gives a 3.85 nm SHG bandwidth for a 6 mm grating. See
    /// `examples/waveguide_index.rs` for its construction.
    pub fn bundled_waveguide() -> Self {
        DispersionModel::Sampled(
            SampledIndex::parse_csv(BUNDLED_WAVEGUIDE_INDEX).expect("bundled index data is valid"),
        )
    }

    pub fn window(&self) -> (f64, f64) {
        match self {
            DispersionModel::Sellmeier(s) => (s.window_nm[0], s.window_nm[1]),
            DispersionModel::Sampled(s) => s.window(),
        }
    }

    pub fn check_window(&self, quantity: &'static str, wavelength_nm: f64) -> Result<()> {
        let (min, max) = self.window();
        if (min..=max).contains(&wavelength_nm) {
            Ok(())
        } else {
            Err(Error::Range {
                quantity,
                value: wavelength_nm,
                min,
                max,
            })
        }
    }

    /// Refractive index at `wavelength_nm`. Sampled data carry no
    /// temperature dependence and ignore `temperature`.
    pub fn refractive_index(&self, wavelength_nm: f64, temperature: f64) -> Result<f64> {
        self.check_window("wavelength_nm", wavelength_nm)?;
        Ok(match self {
            DispersionModel::Sellmeier(s) => s.index(wavelength_nm, temperature),
            DispersionModel::Sampled(s) => s.interpolate(wavelength_nm),
        })
    }

    /// `d²n/dλ²` in nm⁻²: analytic for Sellmeier, finite differences for
    /// sampled data.
    pub fn second_derivative(&self, wavelength_nm: f64, temperature: f64) -> Result<f64> {
        self.check_window("wavelength_nm", wavelength_nm)?;
        match self {
            DispersionModel::Sellmeier(s) => Ok(s.second_derivative(wavelength_nm, temperature)),
            DispersionModel::Sampled(s) => s.second_derivative(wavelength_nm),
        }
    }

    /// Samples this model on a grid, producing a `Sampled` model.
    pub fn resample(&self, grid_nm: &[f64], temperature: f64) -> Result<DispersionModel> {
        let n = grid_nm
            .iter()
            .map(|&w| self.refractive_index(w, temperature))
            .collect::<Result<Vec<_>>>()?;
        Ok(DispersionModel::Sampled(SampledIndex::new(grid_nm.to_vec(), n)?))
    }
}
