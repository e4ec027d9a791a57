//! Poisson photon-counting simulation and the source-characterization
//! estimators computed from count records.

mod estimators;
mod io;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use estimators::{
    accidental_rate, analytic_visibility, brightness, chsh_s_from_visibility, correlation_visibility,
    dwdm_bandwidth_nm, fringe_settings, visibility, BrightnessReport, Chsh, FringeBasis,
};
pub use io::{read_count_records, write_count_records, COUNT_COLUMNS};

use crate::chip::Checker;
use crate::error::{Error, FieldError, Result};
use crate::polarization::{AnalyzerSetting, Arm, DensityMatrix, Matrix4c};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub efficiency_signal: f64,
    pub efficiency_idler: f64,
    /// Dark-count rate of each detector.
    pub dark_rate_hz: f64,
    pub coincidence_window_s: f64,
    pub integration_time_s: f64,
    pub dwdm_bandwidth_nm: f64,
}

impl DetectorConfig {
    pub(crate) fn collect_errors(&self, errors: &mut Vec<FieldError>, prefix: &str) {
        let mut c = Checker::new(prefix, errors);
        for (v, name) in [(self.efficiency_signal, "efficiency_signal"), (self.efficiency_idler, "efficiency_idler")] {
            c.check(v > 0.0 && v <= 1.0, name, format!("must lie in (0, 1], got {v}"));
        }
        c.non_negative(self.dark_rate_hz, "dark_rate_hz");
        c.positive(self.coincidence_window_s, "coincidence_window_s");
        c.positive(self.integration_time_s, "integration_time_s");
        c.positive(self.dwdm_bandwidth_nm, "dwdm_bandwidth_nm");
    }

    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        self.collect_errors(&mut errors, "");
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errors))
        }
    }

    /// Unit efficiencies, no dark counts.
    pub fn ideal() -> Self {
        DetectorConfig {
            efficiency_signal: 1.0,
            efficiency_idler: 1.0,
            dark_rate_hz: 0.0,
            coincidence_window_s: 2e-9,
            integration_time_s: 1.0,
            dwdm_bandwidth_nm: 1.6,
        }
    }
}

/// Measured or simulated rates for one analyzer setting. Raw counts are the
/// integers actually registered; rates are raw counts over the integration
/// time. `coincidences` includes accidentals.
#[derive(Debug, Clone, PartialEq)]
pub struct CountRecord {
    pub setting: AnalyzerSetting,
    pub pump_power_mw: f64,
    pub integration_time_s: f64,
    pub singles_signal_hz: f64,
    pub singles_idler_hz: f64,
    pub coincidences_hz: f64,
    pub accidentals_hz: f64,
    pub raw_singles_signal: u64,
    pub raw_singles_idler: u64,
    pub raw_coincidences: u64,
    pub raw_accidentals: u64,
}

impl CountRecord {
    /// A record built from known rates, with raw counts rounded from
    /// `rate × time`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_rates(
        setting: AnalyzerSetting,
        pump_power_mw: f64,
        integration_time_s: f64,
        singles_signal_hz: f64,
        singles_idler_hz: f64,
        coincidences_hz: f64,
        accidentals_hz: f64,
    ) -> Self {
        let raw = |r: f64| (r * integration_time_s).round().max(0.0) as u64;
        CountRecord {
            setting,
            pump_power_mw,
            integration_time_s,
            singles_signal_hz,
            singles_idler_hz,
            coincidences_hz,
            accidentals_hz,
            raw_singles_signal: raw(singles_signal_hz),
            raw_singles_idler: raw(singles_idler_hz),
            raw_coincidences: raw(coincidences_hz),
            raw_accidentals: raw(accidentals_hz),
        }
    }

    /// Coincidence rate with accidentals removed, floored at zero.
    pub fn net_coincidences_hz(&self) -> f64 {
        (self.coincidences_hz - self.accidentals_hz).max(0.0)
    }
}

/// Mean rates behind a simulated record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedRates {
    pub singles_signal_hz: f64,
    pub singles_idler_hz: f64,
    /// Genuine pair coincidences, accidentals excluded.
    pub true_coincidences_hz: f64,
    pub accidentals_hz: f64,
}

/// Born-rule probability `Tr(ρ·Π_s⊗Π_i)` that a pair passes both analyzers.
pub fn coincidence_probability(rho: &DensityMatrix, setting: &AnalyzerSetting) -> Result<f64> {
    rho.validate()?;
    Ok(projected(rho, &setting.two_photon_projector()))
}

fn projected(rho: &DensityMatrix, op: &Matrix4c) -> f64 {
    rho.expectation(op).clamp(0.0, 1.0)
}

fn arm_marginal(rho: &DensityMatrix, setting: &AnalyzerSetting, arm: Arm) -> f64 {
    let only = match arm {
        Arm::Signal => AnalyzerSetting { signal: setting.signal, idler: None },
        Arm::Idler => AnalyzerSetting { signal: None, idler: setting.idler },
    };
    projected(rho, &only.two_photon_projector())
}

pub fn expected_rates(
    rho: &DensityMatrix,
    setting: &AnalyzerSetting,
    pair_rate_hz: f64,
    det: &DetectorConfig,
) -> Result<ExpectedRates> {
    if !(pair_rate_hz >= 0.0 && pair_rate_hz.is_finite()) {
        return Err(Error::param("pair_rate_hz", format!("must be ≥ 0, got {pair_rate_hz}")));
    }
    det.validate()?;
    let p = coincidence_probability(rho, setting)?;
    let singles_signal_hz = pair_rate_hz * arm_marginal(rho, setting, Arm::Signal) * det.efficiency_signal + det.dark_rate_hz;
    let singles_idler_hz = pair_rate_hz * arm_marginal(rho, setting, Arm::Idler) * det.efficiency_idler + det.dark_rate_hz;
    Ok(ExpectedRates {
        singles_signal_hz,
        singles_idler_hz,
        true_coincidences_hz: pair_rate_hz * p * det.efficiency_signal * det.efficiency_idler,
        accidentals_hz: accidental_rate(singles_signal_hz, singles_idler_hz, det.coincidence_window_s),
    })
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean > 0.0 {
        Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
    } else {
        0
    }
}

/// Draws one record of Poisson counts. Raw coincidences include an
/// independent accidental background; `raw_accidentals` is a separate draw,
/// as from a delayed coincidence window.
pub fn simulate_counts(
    rho: &DensityMatrix,
    setting: &AnalyzerSetting,
    pair_rate_hz: f64,
    pump_power_mw: f64,
    det: &DetectorConfig,
    seed: u64,
) -> Result<CountRecord> {
    let rates = expected_rates(rho, setting, pair_rate_hz, det)?;
    let t = det.integration_time_s;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw_singles_signal = poisson(&mut rng, rates.singles_signal_hz * t);
    let raw_singles_idler = poisson(&mut rng, rates.singles_idler_hz * t);
    let raw_coincidences = poisson(&mut rng, (rates.true_coincidences_hz + rates.accidentals_hz) * t);
    let raw_accidentals = poisson(&mut rng, rates.accidentals_hz * t);
    Ok(CountRecord {
        setting: *setting,
        pump_power_mw,
        integration_time_s: t,
        singles_signal_hz: raw_singles_signal as f64 / t,
        singles_idler_hz: raw_singles_idler as f64 / t,
        coincidences_hz: raw_coincidences as f64 / t,
        accidentals_hz: raw_accidentals as f64 / t,
        raw_singles_signal,
        raw_singles_idler,
        raw_coincidences,
        raw_accidentals,
    })
}

/// Per-task seed: the first eight bytes (little-endian) of
/// `SHA-256(seed_le ‖ stream ‖ index_le)`. Keyed by name rather than
/// position, so adding a task never changes another task's stream.
pub fn derive_seed(seed: u64, stream: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(stream.as_bytes());
    h.update(index.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest holds 32 bytes"))
}
