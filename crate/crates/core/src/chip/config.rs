//! Component parameters for the pump laser, splitter, poled waveguides and
//! polarization rotator-combiner.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, FieldError, Result};
use crate::phase_matching::SpectralCurve;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpConfig {
    pub reference_wavelength_nm: f64,
    pub reference_temperature_c: f64,
    pub tuning_slope_nm_per_c: f64,
    /// Temperature the laser is held at during a run.
    pub operating_temperature_c: f64,
    pub emitted_power_mw: f64,
    pub coupling_efficiency: f64,
    pub polarization_extinction_db: f64,
    pub side_mode_suppression_db: f64,
}

impl PumpConfig {
    pub fn wavelength_nm(&self) -> f64 {
        super::pump_wavelength(self, self.operating_temperature_c)
    }

    /// Maximum pump power delivered into the chip.
    pub fn on_chip_power_mw(&self) -> f64 {
        self.emitted_power_mw * self.coupling_efficiency
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmiConfig {
    pub split_fraction_upper: f64,
    pub insertion_loss_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PplnConfig {
    pub length_mm: f64,
    pub poling_period_um: f64,
    /// SHG phase-matching peak (fundamental wavelength) at `reference_temperature_c`.
    pub peak_wavelength_nm: f64,
    pub reference_temperature_c: f64,
    /// Measured SHG bandwidth; informational, the model predicts its own.
    pub shg_fwhm_nm: f64,
    pub temperature_slope_nm_per_c: f64,
    pub normalized_shg_efficiency_pct_per_w_cm2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theoretical_shg_efficiency_pct_per_w_cm2: Option<f64>,
}

impl PplnConfig {
    pub fn length_m(&self) -> f64 {
        self.length_mm * 1e-3
    }

    /// Ratio of measured to theoretical normalized efficiency, if both are set.
    pub fn efficiency_ratio(&self) -> Option<f64> {
        self.theoretical_shg_efficiency_pct_per_w_cm2
            .map(|t| self.normalized_shg_efficiency_pct_per_w_cm2 / t)
    }
}

pub const DEFAULT_PRC_WINDOW_NM: [f64; 2] = [1400.0, 1700.0];

fn default_prc_window() -> [f64; 2] {
    DEFAULT_PRC_WINDOW_NM
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrcConfig {
    pub cross_center_wavelength_nm: f64,
    pub cross_fwhm_nm: f64,
    /// Upper-waveguide (H) path loss.
    pub through_insertion_loss_db: f64,
    /// Peak loss of the converted (V) path.
    pub cross_insertion_loss_db: f64,
    pub extinction_h_db: f64,
    pub extinction_v_db: f64,
    #[serde(default = "default_prc_window")]
    pub validity_window_nm: [f64; 2],
    /// Two-column CSV (wavelength nm, transmission dB) replacing the
    /// Gaussian cross-conversion shape. Relative paths resolve against the
    /// config file's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measured_curve_csv: Option<PathBuf>,
    #[serde(skip)]
    pub measured_curve: Option<SpectralCurve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChipConfig {
    pub pump: PumpConfig,
    pub mmi: MmiConfig,
    pub ppln_upper: PplnConfig,
    pub ppln_lower: PplnConfig,
    pub prc: PrcConfig,
    /// Relative phase φ between the HH and VV branches.
    pub path_phase_rad: f64,
    pub noise_admixture: f64,
    /// Layout dimensions kept for reference only (µm); no model reads them.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub geometry_um: BTreeMap<String, f64>,
}

pub(crate) struct Checker<'a> {
    prefix: &'a str,
    errors: &'a mut Vec<FieldError>,
}

impl<'a> Checker<'a> {
    pub(crate) fn new(prefix: &'a str, errors: &'a mut Vec<FieldError>) -> Self {
        Checker { prefix, errors }
    }

    pub(crate) fn check(&mut self, ok: bool, field: &str, message: impl Into<String>) {
        if !ok {
            let field = if self.prefix.is_empty() {
                field.to_string()
            } else {
                format!("{}.{field}", self.prefix)
            };
            self.errors.push(FieldError {
                field,
                message: message.into(),
            });
        }
    }

    pub(crate) fn finite(&mut self, v: f64, field: &str) {
        self.check(v.is_finite(), field, format!("must be finite, got {v}"));
    }

    pub(crate) fn positive(&mut self, v: f64, field: &str) {
        self.check(v.is_finite() && v > 0.0, field, format!("must be > 0, got {v}"));
    }

    pub(crate) fn non_negative(&mut self, v: f64, field: &str) {
        self.check(v.is_finite() && v >= 0.0, field, format!("must be ≥ 0, got {v}"));
    }

    pub(crate) fn fraction(&mut self, v: f64, field: &str) {
        self.check((0.0..=1.0).contains(&v), field, format!("must lie in [0, 1], got {v}"));
    }
}

impl PumpConfig {
    pub(crate) fn collect_errors(&self, c: &mut Checker) {
        c.positive(self.reference_wavelength_nm, "reference_wavelength_nm");
        c.finite(self.reference_temperature_c, "reference_temperature_c");
        c.finite(self.tuning_slope_nm_per_c, "tuning_slope_nm_per_c");
        c.finite(self.operating_temperature_c, "operating_temperature_c");
        c.non_negative(self.emitted_power_mw, "emitted_power_mw");
        c.check(
            self.coupling_efficiency > 0.0 && self.coupling_efficiency <= 1.0,
            "coupling_efficiency",
            format!("must lie in (0, 1], got {}", self.coupling_efficiency),
        );
        c.non_negative(self.polarization_extinction_db, "polarization_extinction_db");
        c.non_negative(self.side_mode_suppression_db, "side_mode_suppression_db");
    }
}

impl MmiConfig {
    pub(crate) fn collect_errors(&self, c: &mut Checker) {
        c.fraction(self.split_fraction_upper, "split_fraction_upper");
        c.non_negative(self.insertion_loss_db, "insertion_loss_db");
    }
}

impl PplnConfig {
    pub(crate) fn collect_errors(&self, c: &mut Checker) {
        c.positive(self.length_mm, "length_mm");
        c.positive(self.poling_period_um, "poling_period_um");
        c.positive(self.peak_wavelength_nm, "peak_wavelength_nm");
        c.finite(self.reference_temperature_c, "reference_temperature_c");
        c.positive(self.shg_fwhm_nm, "shg_fwhm_nm");
        c.finite(self.temperature_slope_nm_per_c, "temperature_slope_nm_per_c");
        c.non_negative(self.normalized_shg_efficiency_pct_per_w_cm2, "normalized_shg_efficiency_pct_per_w_cm2");
    }
}

impl PrcConfig {
    pub(crate) fn collect_errors(&self, c: &mut Checker) {
        c.positive(self.cross_center_wavelength_nm, "cross_center_wavelength_nm");
        // infinite width is a wavelength-flat converter
        c.check(self.cross_fwhm_nm > 0.0, "cross_fwhm_nm", format!("must be > 0, got {}", self.cross_fwhm_nm));
        c.check(
            self.through_insertion_loss_db >= 0.0,
            "through_insertion_loss_db",
            format!("must be ≥ 0, got {}", self.through_insertion_loss_db),
        );
        c.check(
            self.cross_insertion_loss_db >= 0.0,
            "cross_insertion_loss_db",
            format!("must be ≥ 0, got {}", self.cross_insertion_loss_db),
        );
        // infinite extinction is the ideal-device limit
        c.check(self.extinction_h_db > 0.0, "extinction_h_db", format!("must be > 0 dB, got {}", self.extinction_h_db));
        c.check(self.extinction_v_db > 0.0, "extinction_v_db", format!("must be > 0 dB, got {}", self.extinction_v_db));
        let [lo, hi] = self.validity_window_nm;
        c.check(lo.is_finite() && hi.is_finite() && lo < hi, "validity_window_nm", format!("[{lo}, {hi}] is not an interval"));
    }
}

impl ChipConfig {
    pub(crate) fn collect_errors(&self, errors: &mut Vec<FieldError>, prefix: &str) {
        let p = |s: &str| if prefix.is_empty() { s.to_string() } else { format!("{prefix}.{s}") };
        self.pump.collect_errors(&mut Checker::new(&p("pump"), errors));
        self.mmi.collect_errors(&mut Checker::new(&p("mmi"), errors));
        self.ppln_upper.collect_errors(&mut Checker::new(&p("ppln_upper"), errors));
        self.ppln_lower.collect_errors(&mut Checker::new(&p("ppln_lower"), errors));
        self.prc.collect_errors(&mut Checker::new(&p("prc"), errors));
        let mut c = Checker::new(prefix, errors);
        c.finite(self.path_phase_rad, "path_phase_rad");
        c.fraction(self.noise_admixture, "noise_admixture");
    }

    /// Validates every field, reporting all failures at once.
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        self.collect_errors(&mut errors, "");
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errors))
        }
    }

    /// A loss-free, perfectly balanced chip with infinite extinction and a
    /// wavelength-flat rotator.
    pub fn ideal() -> Self {
        let ppln = PplnConfig {
            length_mm: 6.0,
            poling_period_um: 4.13,
            peak_wavelength_nm: 1559.0,
            reference_temperature_c: 67.0,
            shg_fwhm_nm: 3.85,
            temperature_slope_nm_per_c: 0.269,
            normalized_shg_efficiency_pct_per_w_cm2: 3300.0,
            theoretical_shg_efficiency_pct_per_w_cm2: None,
        };
        ChipConfig {
            pump: PumpConfig {
                reference_wavelength_nm: 779.5,
                reference_temperature_c: 21.0,
                tuning_slope_nm_per_c: 0.067,
                operating_temperature_c: 21.0,
                emitted_power_mw: 7.5,
                coupling_efficiency: 0.1,
                polarization_extinction_db: 20.0,
                side_mode_suppression_db: 40.0,
            },
            mmi: MmiConfig {
                split_fraction_upper: 0.5,
                insertion_loss_db: 0.0,
            },
            ppln_upper: ppln.clone(),
            ppln_lower: ppln,
            prc: PrcConfig {
                cross_center_wavelength_nm: 1559.0,
                cross_fwhm_nm: f64::INFINITY,
                through_insertion_loss_db: 0.0,
                cross_insertion_loss_db: 0.0,
                extinction_h_db: f64::INFINITY,
                extinction_v_db: f64::INFINITY,
                validity_window_nm: DEFAULT_PRC_WINDOW_NM,
                measured_curve_csv: None,
                measured_curve: None,
            },
            path_phase_rad: 0.0,
            noise_admixture: 0.0,
            geometry_um: BTreeMap::new(),
        }
    }
}
