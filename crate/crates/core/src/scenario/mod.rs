//! Scenario files and the pipelines that turn them into count tables,
//! reconstructions, spectra and a run report.

mod pipeline;
mod schema;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use pipeline::{
    brightness_from_records, mmifit, phasematch, report, run, simulate, simulate_channel, tomo, BrightnessFile,
    ChannelFiles, ChannelReport, CurveReport, MmiFitReport, RunReport, SpectraReport, TOOL_VERSION,
};
pub use schema::{validate_file, validate_outputs, FileSchema, SCHEMAS};

use crate::chip::{ChipConfig, Checker};
use crate::counting::DetectorConfig;
use crate::error::{Error, FieldError, Result};
use crate::phase_matching::{idler_wavelength, DispersionModel, LithiumNiobateSellmeier, SampledIndex, SpectralCurve, ValueKind};
use crate::tomography::MleOptions;

/// Largest allowed mismatch, in signal wavelength, between a channel pair
/// and the energy-conserving partner of its idler.
pub const ENERGY_TOLERANCE_NM: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub label: String,
    pub signal_nm: f64,
    pub idler_nm: f64,
}

impl Channel {
    /// Signal-wavelength residual `λs − λs(λp, λi)`.
    pub fn energy_residual_nm(&self, pump_nm: f64) -> Result<f64> {
        Ok(self.signal_nm - idler_wavelength(pump_nm, self.idler_nm)?)
    }
}

/// Where the refractive-index model comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DispersionSource {
    /// The synthetic thin-film waveguide data shipped with the crate.
    #[default]
    Bundled,
    Sellmeier(LithiumNiobateSellmeier),
    /// Two-column CSV of wavelength (nm) and effective index.
    SampledCsv { path: PathBuf },
}

impl DispersionSource {
    pub fn load(&self, base_dir: &Path) -> Result<DispersionModel> {
        Ok(match self {
            DispersionSource::Bundled => DispersionModel::bundled_waveguide(),
            DispersionSource::Sellmeier(s) => DispersionModel::Sellmeier(s.clone()),
            DispersionSource::SampledCsv { path } => DispersionModel::Sampled(SampledIndex::read_csv(&base_dir.join(path))?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceConfig {
    /// Pump power reaching the two waveguides during the run.
    pub on_chip_pump_power_mw: f64,
    /// Pairs generated per second per mW of pump inside one DWDM channel
    /// pair, before any collection loss.
    pub pair_rate_per_mw_hz: f64,
    /// Spectral width the pair-generation rate integrates over.
    pub source_bandwidth_nm: f64,
}

fn default_total_coincidences() -> f64 {
    1e5
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyConfig {
    /// Expected coincidences summed over the 16 settings; sets the
    /// per-setting integration time.
    #[serde(default = "default_total_coincidences")]
    pub total_coincidences: f64,
    #[serde(default = "default_true")]
    pub subtract_accidentals: bool,
    #[serde(default)]
    pub mle: MleOptions,
}

impl Default for TomographyConfig {
    fn default() -> Self {
        TomographyConfig {
            total_coincidences: default_total_coincidences(),
            subtract_accidentals: true,
            mle: MleOptions::default(),
        }
    }
}

/// Uniform grid `[start_nm, stop_nm]` with `points` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start_nm: f64,
    pub stop_nm: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        crate::phase_matching::linspace(self.start_nm, self.stop_nm, self.points)
    }

    fn collect_errors(&self, c: &mut Checker, field: &str) {
        c.check(
            self.start_nm.is_finite() && self.stop_nm > self.start_nm && self.points >= 2,
            field,
            format!("needs start < stop and ≥ 2 points, got [{}, {}] × {}", self.start_nm, self.stop_nm, self.points),
        );
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatchConfig {
    pub shg_temperature_c: f64,
    pub shg_grid: Grid,
    pub spdc_grid: Grid,
    pub gvd_grid: Grid,
    /// Spectrometer range used for the detector-clipped SPDC width.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector_window_nm: Option<[f64; 2]>,
}

impl Default for PhaseMatchConfig {
    fn default() -> Self {
        PhaseMatchConfig {
            shg_temperature_c: 67.0,
            shg_grid: Grid { start_nm: 1545.0, stop_nm: 1575.0, points: 3001 },
            spdc_grid: Grid { start_nm: 1200.0, stop_nm: 2100.0, points: 1801 },
            gvd_grid: Grid { start_nm: 1200.0, stop_nm: 2000.0, points: 401 },
            detector_window_nm: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub chip: ChipConfig,
    pub detector: DetectorConfig,
    #[serde(default)]
    pub dispersion: DispersionSource,
    pub source: SourceConfig,
    #[serde(default)]
    pub tomography: TomographyConfig,
    #[serde(default)]
    pub phase_matching: PhaseMatchConfig,
    pub channels: Vec<Channel>,
    /// Optional MMI cut-back data fitted by `run`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mmi_tree_csv: Option<PathBuf>,
    /// Directory that relative input paths resolve against: the config
    /// file's directory. The output directory resolves against the working
    /// directory instead.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

const BUNDLED: [(&str, &str); 2] = [
    ("paper_repro", include_str!("../../configs/paper_repro.toml")),
    ("ideal", include_str!("../../configs/ideal.toml")),
];

impl Scenario {
    /// Names of the scenarios compiled into the crate.
    pub fn bundled_names() -> impl Iterator<Item = &'static str> {
        BUNDLED.iter().map(|(n, _)| *n)
    }

    pub fn bundled(name: &str) -> Result<Self> {
        let (_, text) = BUNDLED
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::param("scenario", format!("no bundled scenario `{name}`")))?;
        let mut s = Self::from_toml(text)?;
        s.base_dir = PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs"));
        s.prepare()?;
        Ok(s)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::parse("scenario TOML", e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse("scenario JSON", e.to_string()))
    }

    /// Reads a `.toml` or `.json` scenario, resolves its relative paths and
    /// validates it.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut s = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json(&text)?,
            _ => Self::from_toml(&text)?,
        };
        s.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        s.prepare()?;
        Ok(s)
    }

    fn prepare(&mut self) -> Result<()> {
        self.validate()?;
        if let Some(p) = &self.chip.prc.measured_curve_csv {
            let curve = SpectralCurve::read_csv(&self.base_dir.join(p), ValueKind::TransmissionDb)?;
            self.chip.prc.measured_curve = Some(curve);
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::parse("scenario TOML", e.to_string()))
    }

    /// SHA-256 of the canonical TOML serialization, hex encoded.
    pub fn config_hash(&self) -> String {
        let text = self.to_toml().expect("scenario serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    /// Checks every field, then energy conservation of every channel.
    pub fn validate(&self) -> Result<()> {
        let mut errors: Vec<FieldError> = Vec::new();
        self.chip.collect_errors(&mut errors, "chip");
        self.detector.collect_errors(&mut errors, "detector");
        {
            let mut c = Checker::new("source", &mut errors);
            c.positive(self.source.on_chip_pump_power_mw, "on_chip_pump_power_mw");
            c.check(
                self.source.on_chip_pump_power_mw <= self.chip.pump.on_chip_power_mw() * (1.0 + 1e-12),
                "on_chip_pump_power_mw",
                format!(
                    "{} mW exceeds the {} mW the pump couples into the chip",
                    self.source.on_chip_pump_power_mw,
                    self.chip.pump.on_chip_power_mw()
                ),
            );
            c.non_negative(self.source.pair_rate_per_mw_hz, "pair_rate_per_mw_hz");
            c.positive(self.source.source_bandwidth_nm, "source_bandwidth_nm");
        }
        {
            let t = &self.tomography;
            let mut c = Checker::new("tomography", &mut errors);
            c.positive(t.total_coincidences, "total_coincidences");
            c.positive(t.mle.grad_tol, "mle.grad_tol");
            c.non_negative(t.mle.f_tol, "mle.f_tol");
            c.check(t.mle.max_iter > 0, "mle.max_iter", "must be > 0");
        }
        {
            let p = &self.phase_matching;
            let mut c = Checker::new("phase_matching", &mut errors);
            c.finite(p.shg_temperature_c, "shg_temperature_c");
            p.shg_grid.collect_errors(&mut c, "shg_grid");
            p.spdc_grid.collect_errors(&mut c, "spdc_grid");
            p.gvd_grid.collect_errors(&mut c, "gvd_grid");
            if let Some([lo, hi]) = p.detector_window_nm {
                c.check(lo.is_finite() && hi > lo, "detector_window_nm", format!("[{lo}, {hi}] is not an interval"));
            }
        }
        {
            let mut c = Checker::new("", &mut errors);
            c.check(!self.channels.is_empty(), "channels", "at least one channel is required");
        }
        for (k, ch) in self.channels.iter().enumerate() {
            let prefix = format!("channels[{k}]");
            let mut c = Checker::new(&prefix, &mut errors);
            c.check(
                !ch.label.is_empty() && ch.label.chars().all(|x| x.is_ascii_alphanumeric() || x == '-' || x == '_'),
                "label",
                format!("`{}` must be non-empty ASCII letters, digits, `-` or `_`", ch.label),
            );
            c.positive(ch.signal_nm, "signal_nm");
            c.positive(ch.idler_nm, "idler_nm");
            if self.channels[..k].iter().any(|o| o.label == ch.label) {
                c.check(false, "label", format!("duplicate label `{}`", ch.label));
            }
        }
        if !errors.is_empty() {
            return Err(Error::Config(errors));
        }
        let pump = self.chip.pump.wavelength_nm();
        for ch in &self.channels {
            let residual = ch.energy_residual_nm(pump)?;
            if residual.abs() > ENERGY_TOLERANCE_NM {
                return Err(Error::EnergyConservation {
                    label: ch.label.clone(),
                    residual_nm: residual,
                    tolerance_nm: ENERGY_TOLERANCE_NM,
                });
            }
        }
        Ok(())
    }

    /// Keeps only the channels whose labels are listed.
    pub fn select_channels(&mut self, labels: &[String]) -> Result<()> {
        if let Some(missing) = labels.iter().find(|l| !self.channels.iter().any(|c| &c.label == *l)) {
            return Err(Error::param("channels", format!("no channel labelled `{missing}`")));
        }
        self.channels.retain(|c| labels.contains(&c.label));
        Ok(())
    }

    pub fn dispersion_model(&self) -> Result<DispersionModel> {
        self.dispersion.load(&self.base_dir)
    }

    /// Input file referenced by the scenario, resolved against its directory.
    pub fn input_path(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }
}
