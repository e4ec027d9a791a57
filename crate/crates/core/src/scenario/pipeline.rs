use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use super::{Channel, Scenario};
use crate::chip::{mmi_tree_fit, read_mmi_samples, synthesize_pair_state};
use crate::counting::{
    accidental_rate, brightness, derive_seed, expected_rates, read_count_records, simulate_counts,
    write_count_records, CountRecord, DetectorConfig,
};
use crate::error::{Error, Result};
use crate::phase_matching::{fwhm, gvd_curve, shg_tuning_curve, spdc_spectrum, SpectralCurve};
use crate::polarization::AnalyzerSetting;
use crate::tomography::{
    mle_reconstruct, report_metrics, subtract_accidentals, tomo_settings, write_reconstruction, TomographyData,
    TomographyMetrics,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

fn counts_path(out: &Path, label: &str) -> PathBuf {
    out.join(format!("{label}_counts.csv"))
}

fn brightness_path(out: &Path, label: &str) -> PathBuf {
    out.join(format!("{label}_brightness.json"))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path, hint: &str) -> Result<T> {
    if !path.exists() {
        return Err(Error::MissingDependency { path: path.to_path_buf(), hint: hint.into() });
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
}

fn create_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

/// Open-analyzer record followed by the 16 tomography records. Record `k`
/// draws from `derive_seed(seed, label, k)`.
pub fn simulate_channel(s: &Scenario, ch: &Channel) -> Result<Vec<CountRecord>> {
    let rho = synthesize_pair_state(&s.chip, ch.signal_nm)?;
    let power = s.source.on_chip_pump_power_mw;
    let pair_rate = s.source.pair_rate_per_mw_hz * power;
    let seed = |k: u64| derive_seed(s.seed, &ch.label, k);

    let mut records = vec![simulate_counts(&rho, &AnalyzerSetting::open(), pair_rate, power, &s.detector, seed(0))?];

    let settings = tomo_settings();
    let mut total_rate = 0.0;
    for t in settings.settings() {
        let r = expected_rates(&rho, &t.analyzer, pair_rate, &s.detector)?;
        total_rate += r.true_coincidences_hz + r.accidentals_hz;
    }
    if !(total_rate > 0.0) {
        return Err(Error::NoSignal(format!("channel `{}` has no expected coincidences", ch.label)));
    }
    let det = DetectorConfig { integration_time_s: s.tomography.total_coincidences / total_rate, ..s.detector.clone() };
    for (k, t) in settings.settings().iter().enumerate() {
        records.push(simulate_counts(&rho, &t.analyzer, pair_rate, power, &det, seed(k as u64 + 1))?);
    }
    Ok(records)
}

/// Writes `<label>_counts.csv` for every channel.
pub fn simulate(s: &Scenario, out: &Path) -> Result<Vec<PathBuf>> {
    create_dir(out)?;
    s.channels
        .par_iter()
        .map(|ch| {
            let path = counts_path(out, &ch.label);
            write_count_records(&path, &simulate_channel(s, ch)?)?;
            Ok(path)
        })
        .collect()
}

/// Brightness summary of one channel, from its open-analyzer record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrightnessFile {
    pub label: String,
    pub pump_power_mw: f64,
    pub singles_signal_hz: f64,
    pub singles_idler_hz: f64,
    pub coincidences_hz: f64,
    pub accidentals_measured_hz: f64,
    /// `R_s·R_i·τ` from the singles.
    pub accidentals_estimated_hz: f64,
    pub brightness_pairs_per_s_per_nm_per_mw: f64,
    pub pgr_pairs_per_s_per_mw: f64,
    pub filter_bandwidth_nm: f64,
    pub source_bandwidth_nm: f64,
}

pub fn brightness_from_records(s: &Scenario, label: &str, records: &[CountRecord]) -> Result<BrightnessFile> {
    let open = records
        .iter()
        .find(|r| r.setting == AnalyzerSetting::open())
        .ok_or_else(|| Error::InsufficientData(format!("`{label}` has no open-analyzer record")))?;
    let b = brightness(open, s.detector.dwdm_bandwidth_nm, s.source.source_bandwidth_nm)?;
    Ok(BrightnessFile {
        label: label.to_string(),
        pump_power_mw: open.pump_power_mw,
        singles_signal_hz: open.singles_signal_hz,
        singles_idler_hz: open.singles_idler_hz,
        coincidences_hz: open.coincidences_hz,
        accidentals_measured_hz: open.accidentals_hz,
        accidentals_estimated_hz: accidental_rate(
            open.singles_signal_hz,
            open.singles_idler_hz,
            s.detector.coincidence_window_s,
        ),
        brightness_pairs_per_s_per_nm_per_mw: b.brightness,
        pgr_pairs_per_s_per_mw: b.pgr,
        filter_bandwidth_nm: b.filter_bandwidth_nm,
        source_bandwidth_nm: b.bandwidth_used_nm,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFiles {
    pub counts: PathBuf,
    pub rho_real: PathBuf,
    pub rho_imag: PathBuf,
    pub metrics: PathBuf,
    pub brightness: PathBuf,
}

impl ChannelFiles {
    fn new(out: &Path, label: &str) -> Self {
        ChannelFiles {
            counts: counts_path(out, label),
            rho_real: out.join(format!("{label}_rho_real.csv")),
            rho_imag: out.join(format!("{label}_rho_imag.csv")),
            metrics: out.join(format!("{label}_metrics.json")),
            brightness: brightness_path(out, label),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelReport {
    pub label: String,
    pub signal_nm: f64,
    pub idler_nm: f64,
    pub fidelity: f64,
    pub purity: f64,
    pub visibility_hv: f64,
    pub visibility_ad: f64,
    pub chsh_s: f64,
    pub chsh_violation: bool,
    pub converged: bool,
    pub brightness_pairs_per_s_per_nm_per_mw: f64,
    pub pgr_pairs_per_s_per_mw: f64,
    pub files: ChannelFiles,
}

impl ChannelReport {
    fn new(ch: &Channel, m: &TomographyMetrics, b: &BrightnessFile, files: ChannelFiles) -> Self {
        ChannelReport {
            label: ch.label.clone(),
            signal_nm: ch.signal_nm,
            idler_nm: ch.idler_nm,
            fidelity: m.fidelity,
            purity: m.purity,
            visibility_hv: m.visibility_hv,
            visibility_ad: m.visibility_ad,
            chsh_s: m.chsh_s,
            chsh_violation: m.chsh_violation,
            converged: m.converged,
            brightness_pairs_per_s_per_nm_per_mw: b.brightness_pairs_per_s_per_nm_per_mw,
            pgr_pairs_per_s_per_mw: b.pgr_pairs_per_s_per_mw,
            files,
        }
    }
}

fn tomo_channel(s: &Scenario, ch: &Channel, out: &Path) -> Result<ChannelReport> {
    let files = ChannelFiles::new(out, &ch.label);
    if !files.counts.exists() {
        return Err(Error::MissingDependency { path: files.counts, hint: "run `simulate` first".into() });
    }
    let records = read_count_records(&files.counts)?;
    let settings = tomo_settings();
    let mut data = TomographyData::from_records(&records, &settings)?;
    if s.tomography.subtract_accidentals {
        data = subtract_accidentals(&data);
    }
    let metrics = report_metrics(&mle_reconstruct(&data, &settings, &s.tomography.mle)?)?;
    write_reconstruction(out, &ch.label, &metrics)?;
    let b = brightness_from_records(s, &ch.label, &records)?;
    write_json(&files.brightness, &b)?;
    Ok(ChannelReport::new(ch, &metrics, &b, files))
}

/// Reconstructs every channel from its count table and writes the density
/// matrix, metrics and brightness files.
pub fn tomo(s: &Scenario, out: &Path) -> Result<Vec<ChannelReport>> {
    create_dir(out)?;
    s.channels.par_iter().map(|ch| tomo_channel(s, ch, out)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveReport {
    pub path: PathBuf,
    pub metadata: PathBuf,
    /// Wavelength of the largest value.
    pub peak_nm: f64,
    pub fwhm_nm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectraReport {
    pub pump_nm: f64,
    pub spdc: CurveReport,
    /// Width of the above-half-maximum region inside the detector window.
    pub spdc_clipped_fwhm_nm: Option<f64>,
    pub shg_upper: CurveReport,
    pub shg_lower: CurveReport,
    pub gvd: CurveReport,
    /// Grid point of smallest |β₂|: the zero-dispersion wavelength when the
    /// curve only touches zero.
    pub gvd_min_abs_nm: f64,
    /// Wavelengths where the sampled GVD changes sign.
    pub gvd_zero_crossings_nm: Vec<f64>,
}

fn export(curve: &SpectralCurve, path: PathBuf, fwhm_nm: Option<f64>, hash: &str) -> Result<CurveReport> {
    let metadata = curve.write_with_metadata(&path, hash)?;
    Ok(CurveReport { path, metadata, peak_nm: curve.peak_wavelength(), fwhm_nm })
}

fn width_in_window(curve: &SpectralCurve, [lo, hi]: [f64; 2]) -> Option<f64> {
    let (_, max) = curve.argmax();
    let inside: Vec<f64> = curve
        .wavelengths()
        .iter()
        .zip(curve.values())
        .filter(|(w, v)| (lo..=hi).contains(*w) && **v >= max / 2.0)
        .map(|(w, _)| *w)
        .collect();
    Some(inside.last()? - inside.first()?)
}

fn zero_crossings(curve: &SpectralCurve) -> Vec<f64> {
    let (w, v) = (curve.wavelengths(), curve.values());
    (1..w.len())
        .filter(|&k| v[k - 1] != 0.0 && v[k - 1].signum() != v[k].signum())
        .map(|k| w[k - 1] - v[k - 1] * (w[k] - w[k - 1]) / (v[k] - v[k - 1]))
        .collect()
}

/// SPDC spectrum, SHG tuning curves of both waveguides and the GVD curve,
/// each as CSV plus metadata sidecar, summarized in `spectra.json`.
pub fn phasematch(s: &Scenario, out: &Path) -> Result<SpectraReport> {
    create_dir(out)?;
    let model = s.dispersion_model()?;
    let hash = s.config_hash();
    let pm = &s.phase_matching;
    let pump_nm = s.chip.pump.wavelength_nm();

    let spdc = spdc_spectrum(&model, &s.chip.ppln_upper, pump_nm, &pm.spdc_grid.values())?;
    let spdc_clipped_fwhm_nm = pm.detector_window_nm.and_then(|w| width_in_window(&spdc.curve, w));
    let spdc_report = export(&spdc.curve, out.join("spdc_spectrum.csv"), spdc.fwhm_nm, &hash)?;

    let shg = |cfg, name: &str| -> Result<CurveReport> {
        let curve = shg_tuning_curve(&model, cfg, &pm.shg_grid.values(), pm.shg_temperature_c)?;
        let width = fwhm(&curve).ok();
        export(&curve, out.join(name), width, &hash)
    };
    let shg_upper = shg(&s.chip.ppln_upper, "shg_upper.csv")?;
    let shg_lower = shg(&s.chip.ppln_lower, "shg_lower.csv")?;

    let gvd = gvd_curve(&model, &pm.gvd_grid.values(), s.chip.ppln_upper.reference_temperature_c)?;
    let gvd_zero_crossings_nm = zero_crossings(&gvd);
    let gvd_min_abs_nm = gvd
        .wavelengths()
        .iter()
        .zip(gvd.values())
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(w, _)| *w)
        .expect("non-empty grid");
    let gvd_report = export(&gvd, out.join("gvd.csv"), None, &hash)?;

    let report = SpectraReport {
        pump_nm,
        spdc: spdc_report,
        spdc_clipped_fwhm_nm,
        shg_upper,
        shg_lower,
        gvd: gvd_report,
        gvd_min_abs_nm,
        gvd_zero_crossings_nm,
    };
    write_json(&out.join("spectra.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmiFitReport {
    pub input: PathBuf,
    pub per_splitter_loss_db: f64,
    pub intercept_dbm: f64,
    pub residuals_db: Vec<f64>,
}

/// Fits the per-splitter loss of an MMI tree and writes `mmi_fit.json`.
pub fn mmifit(input: &Path, out: &Path) -> Result<MmiFitReport> {
    if !input.exists() {
        return Err(Error::MissingDependency { path: input.to_path_buf(), hint: "MMI cut-back CSV not found".into() });
    }
    create_dir(out)?;
    let fit = mmi_tree_fit(&read_mmi_samples(input)?)?;
    let report = MmiFitReport {
        input: input.to_path_buf(),
        per_splitter_loss_db: fit.per_splitter_loss_db,
        intercept_dbm: fit.intercept_dbm,
        residuals_db: fit.residuals_db,
    };
    write_json(&out.join("mmi_fit.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub config_hash: String,
    pub seed: u64,
    pub tool_version: String,
    pub wall_time_s: f64,
    pub subtract_accidentals: bool,
    pub channels: Vec<ChannelReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectra: Option<SpectraReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mmi: Option<MmiFitReport>,
}

impl RunReport {
    pub fn all_converged(&self) -> bool {
        self.channels.iter().all(|c| c.converged)
    }

    /// Labels of channels whose reconstruction did not converge.
    pub fn unconverged(&self) -> Vec<&str> {
        self.channels.iter().filter(|c| !c.converged).map(|c| c.label.as_str()).collect()
    }
}

fn optional_json<T: DeserializeOwned>(path: &Path) -> Result<Option<T>> {
    if path.exists() {
        read_json(path, "").map(Some)
    } else {
        Ok(None)
    }
}

/// Aggregates the per-channel outputs already in `out` into `report.json`.
/// Spectra and MMI summaries are included when present.
pub fn report(s: &Scenario, out: &Path, wall_time_s: f64) -> Result<RunReport> {
    let channels = s
        .channels
        .iter()
        .map(|ch| {
            let files = ChannelFiles::new(out, &ch.label);
            let m: TomographyMetrics = read_json(&files.metrics, "run `tomo` first")?;
            let b: BrightnessFile = read_json(&files.brightness, "run `tomo` first")?;
            Ok(ChannelReport::new(ch, &m, &b, files))
        })
        .collect::<Result<Vec<_>>>()?;
    let report = RunReport {
        scenario: s.name.clone(),
        config_hash: s.config_hash(),
        seed: s.seed,
        tool_version: TOOL_VERSION.to_string(),
        wall_time_s,
        subtract_accidentals: s.tomography.subtract_accidentals,
        channels,
        spectra: optional_json(&out.join("spectra.json"))?,
        mmi: optional_json(&out.join("mmi_fit.json"))?,
    };
    write_json(&out.join("report.json"), &report)?;
    Ok(report)
}

/// The whole pipeline: counts, reconstructions, spectra, MMI fit when the
/// scenario names a cut-back file, and the aggregated report.
pub fn run(s: &Scenario, out: &Path) -> Result<RunReport> {
    let start = Instant::now();
    simulate(s, out)?;
    tomo(s, out)?;
    phasematch(s, out)?;
    if let Some(p) = &s.mmi_tree_csv {
        mmifit(&s.input_path(p), out)?;
    }
    report(s, out, start.elapsed().as_secs_f64())
}
