use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, SQRT_2};

use serde::{Deserialize, Serialize};

use super::{coincidence_probability, CountRecord};
use crate::error::{Error, Result};
use crate::polarization::{AnalyzerSetting, DensityMatrix};
use crate::SPEED_OF_LIGHT;

/// Expected accidental coincidence rate `R_s·R_i·τ`.
pub fn accidental_rate(singles_signal_hz: f64, singles_idler_hz: f64, window_s: f64) -> f64 {
    singles_signal_hz * singles_idler_hz * window_s
}

/// Width in nm of a filter passband `Δν` wide at `center_nm`, `λ²Δν/c`.
pub fn dwdm_bandwidth_nm(center_nm: f64, passband_ghz: f64) -> f64 {
    let lambda_m = center_nm * 1e-9;
    lambda_m * lambda_m * passband_ghz * 1e9 / SPEED_OF_LIGHT * 1e9
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrightnessReport {
    /// Pairs/s/nm/mW.
    pub brightness: f64,
    /// Pairs/s/mW over the source bandwidth.
    pub pgr: f64,
    /// Source bandwidth the PGR integrates over, nm.
    pub bandwidth_used_nm: f64,
    /// Filter bandwidth the brightness is normalized to, nm.
    pub filter_bandwidth_nm: f64,
}

/// `B = R_s·R_i / ((R_CC − R_AC)·P·Δλ)` and `PGR = B × source bandwidth`.
///
/// `R_s·R_i/(R_CC − R_AC)` is the pair rate generated at the source,
/// independent of collection efficiencies.
pub fn brightness(record: &CountRecord, filter_bandwidth_nm: f64, source_bandwidth_nm: f64) -> Result<BrightnessReport> {
    let net = record.coincidences_hz - record.accidentals_hz;
    if !(net > 0.0) {
        return Err(Error::NoSignal(format!(
            "coincidences {} Hz do not exceed accidentals {} Hz",
            record.coincidences_hz, record.accidentals_hz
        )));
    }
    if !(record.pump_power_mw > 0.0) {
        return Err(Error::param("pump_power_mw", format!("must be > 0, got {}", record.pump_power_mw)));
    }
    if !(filter_bandwidth_nm > 0.0) {
        return Err(Error::param("filter_bandwidth_nm", format!("must be > 0, got {filter_bandwidth_nm}")));
    }
    let b = record.singles_signal_hz * record.singles_idler_hz / (net * record.pump_power_mw * filter_bandwidth_nm);
    Ok(BrightnessReport {
        brightness: b,
        pgr: b * source_bandwidth_nm,
        bandwidth_used_nm: source_bandwidth_nm,
        filter_bandwidth_nm,
    })
}

fn contrast(c_max: f64, c_min: f64) -> Result<f64> {
    if !(c_max + c_min > 0.0) {
        return Err(Error::NoSignal("all coincidence counts are zero".into()));
    }
    Ok((c_max - c_min) / (c_max + c_min))
}

/// Fringe contrast `(C_max − C_min)/(C_max + C_min)` over an analyzer sweep.
pub fn visibility(records: &[CountRecord], subtract_accidentals: bool) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::NoSignal("no count records".into()));
    }
    let c = |r: &CountRecord| if subtract_accidentals { r.net_coincidences_hz() } else { r.coincidences_hz };
    let max = records.iter().map(c).fold(f64::NEG_INFINITY, f64::max);
    let min = records.iter().map(c).fold(f64::INFINITY, f64::min);
    contrast(max, min)
}

/// Noiseless fringe contrast of `rho` over the given settings.
pub fn analytic_visibility(rho: &DensityMatrix, settings: &[AnalyzerSetting]) -> Result<f64> {
    let probs = settings
        .iter()
        .map(|s| coincidence_probability(rho, s))
        .collect::<Result<Vec<_>>>()?;
    if probs.is_empty() {
        return Err(Error::NoSignal("no analyzer settings".into()));
    }
    let max = probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = probs.iter().copied().fold(f64::INFINITY, f64::min);
    contrast(max, min)
}

/// Signal polarizer fixed at `signal_angle`, idler polarizer swept over
/// `points` equally spaced angles in [0, π).
pub fn fringe_settings(signal_angle: f64, points: usize) -> Vec<AnalyzerSetting> {
    (0..points)
        .map(|k| AnalyzerSetting::polarizers(signal_angle, std::f64::consts::PI * k as f64 / points as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FringeBasis {
    /// H/V
    Hv,
    /// D/A
    Ad,
}

impl FringeBasis {
    /// Polarizer settings `(a,a)`, `(a⊥,a⊥)`, `(a,a⊥)`, `(a⊥,a)`.
    pub fn settings(self) -> [AnalyzerSetting; 4] {
        let a = match self {
            FringeBasis::Hv => 0.0,
            FringeBasis::Ad => FRAC_PI_4,
        };
        let b = a + FRAC_PI_2;
        [
            AnalyzerSetting::polarizers(a, a),
            AnalyzerSetting::polarizers(b, b),
            AnalyzerSetting::polarizers(a, b),
            AnalyzerSetting::polarizers(b, a),
        ]
    }
}

/// Two-basis correlation visibility from counts ordered as in
/// [`FringeBasis::settings`]: `(C₀ + C₁ − C₂ − C₃)/ΣC`.
pub fn correlation_visibility(counts: [f64; 4]) -> Result<f64> {
    let total: f64 = counts.iter().sum();
    if !(total > 0.0) {
        return Err(Error::NoSignal("all coincidence counts are zero".into()));
    }
    Ok((counts[0] + counts[1] - counts[2] - counts[3]) / total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chsh {
    pub s: f64,
    pub violates: bool,
}

/// `S = 2√2·V`; the local bound `S ≤ 2` is violated for `V > 1/√2`.
pub fn chsh_s_from_visibility(v: f64) -> Result<Chsh> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::param("v", format!("visibility {v} outside [0, 1]")));
    }
    Ok(Chsh { s: 2.0 * SQRT_2 * v, violates: v > FRAC_1_SQRT_2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{derive_seed, simulate_counts, DetectorConfig};
    use crate::polarization::{bell_state, densify, BellState};
    use proptest::prelude::*;

    fn record(rs: f64, ri: f64, cc: f64, ac: f64, p: f64, t: f64) -> CountRecord {
        CountRecord::from_rates(AnalyzerSetting::open(), p, t, rs, ri, cc, ac)
    }

    #[test]
    fn accidental_examples() {
        assert!((accidental_rate(215e3, 92e3, 2e-9) - 39.56).abs() < 1e-9);
        assert_eq!(accidental_rate(0.0, 92e3, 2e-9), 0.0);
        assert!((accidental_rate(1e5, 1e5, 1e-9) - 10.0).abs() < 1e-12);
        assert_eq!(accidental_rate(1e5, 1e5, 0.0), 0.0);
    }

    #[test]
    fn dwdm_200ghz_at_1559() {
        let w = dwdm_bandwidth_nm(1559.0, 200.0);
        assert!((w - 1.6215).abs() < 1e-3, "{w}");
        assert!((w - 1.6).abs() < 0.025);
    }

    #[test]
    fn published_brightness() {
        let r = brightness(&record(215e3, 92e3, 1100.0, 29.0, 0.0188, 1.0), 1.6, 73.0).unwrap();
        let expected = 215e3 * 92e3 / (1071.0 * 0.0188 * 1.6);
        assert!((r.brightness - expected).abs() < 1e-6 * expected);
        assert!((r.brightness - 6.14e8).abs() < 0.01e8);
        assert_eq!(r.pgr, r.brightness * r.bandwidth_used_nm);
        assert!((r.pgr - 4.48e10).abs() < 0.01e10);
    }

    #[test]
    fn pgr_from_quoted_brightness() {
        assert!((6.2e8_f64 * 73.0 - 4.53e10).abs() < 0.005e10);
    }

    #[test]
    fn brightness_requires_signal() {
        assert!(matches!(brightness(&record(1.0, 1.0, 29.0, 29.0, 1.0, 1.0), 1.6, 73.0), Err(Error::NoSignal(_))));
        assert!(matches!(brightness(&record(1.0, 1.0, 20.0, 29.0, 1.0, 1.0), 1.6, 73.0), Err(Error::NoSignal(_))));
        assert!(brightness(&record(1.0, 1.0, 50.0, 29.0, 0.0, 1.0), 1.6, 73.0).is_err());
    }

    proptest! {
        #[test]
        fn brightness_ignores_collection_efficiency(es in 0.01..1.0f64, ei in 0.01..1.0f64) {
            // per-photon losses scale singles by η and pairs by η_s·η_i
            let a = brightness(&record(215e3, 92e3, 1100.0, 29.0, 0.0188, 1.0), 1.6, 73.0).unwrap();
            let k = es * ei;
            let b = brightness(&record(215e3 * es, 92e3 * ei, 1100.0 * k, 29.0 * k, 0.0188, 1.0), 1.6, 73.0).unwrap();
            prop_assert!((a.brightness - b.brightness).abs() < 1e-9 * a.brightness);
        }

        #[test]
        fn brightness_ignores_integration_time(t in 0.1..1000.0f64) {
            let a = brightness(&record(215e3, 92e3, 1100.0, 29.0, 0.0188, 1.0), 1.6, 73.0).unwrap();
            let b = brightness(&record(215e3, 92e3, 1100.0, 29.0, 0.0188, t), 1.6, 73.0).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn accidentals_are_bilinear(a in 0.0..1e6f64, b in 0.0..1e6f64, c in 0.0..1e6f64, x in -3.0..3.0f64, w in 1e-10..1e-8f64) {
            let lhs = accidental_rate(a + x * b, c, w);
            let rhs = accidental_rate(a, c, w) + x * accidental_rate(b, c, w);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs() + rhs.abs()));
            let lhs = accidental_rate(c, a + x * b, w);
            let rhs = accidental_rate(c, a, w) + x * accidental_rate(c, b, w);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs() + rhs.abs()));
        }
    }

    #[test]
    fn analytic_fringe_contrast() {
        let settings = fringe_settings(FRAC_PI_4, 36);
        let werner = DensityMatrix::werner(0.975).unwrap();
        assert!((analytic_visibility(&werner, &settings).unwrap() - 0.975).abs() < 1e-12);
        let pure = densify(&bell_state(BellState::PhiPlus)).unwrap().rho;
        assert!((analytic_visibility(&pure, &settings).unwrap() - 1.0).abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed();
        assert!(analytic_visibility(&mixed, &settings).unwrap().abs() < 1e-12);
    }

    #[test]
    fn correlation_form_matches_werner() {
        let rho = DensityMatrix::werner(0.961).unwrap();
        for basis in [FringeBasis::Hv, FringeBasis::Ad] {
            let p = basis.settings().map(|s| coincidence_probability(&rho, &s).unwrap());
            assert!((correlation_visibility(p).unwrap() - 0.961).abs() < 1e-12);
        }
        assert!(correlation_visibility([0.0; 4]).is_err());
    }

    #[test]
    fn zero_counts_have_no_visibility() {
        let recs = vec![record(1.0, 1.0, 0.0, 0.0, 1.0, 1.0); 3];
        assert!(matches!(visibility(&recs, false), Err(Error::NoSignal(_))));
    }

    #[test]
    fn simulated_fringes_recover_werner_visibility() {
        let det = DetectorConfig { dark_rate_hz: 0.0, ..DetectorConfig::ideal() };
        let settings = fringe_settings(FRAC_PI_4, 8);
        for v in [0.5, 0.71, 0.975] {
            let rho = DensityMatrix::werner(v).unwrap();
            // 10⁶ expected coincidences at the fringe maximum
            let pair_rate = 1e6 / coincidence_probability(&rho, &settings[2]).unwrap();
            let records: Vec<_> = settings
                .iter()
                .enumerate()
                .map(|(k, s)| simulate_counts(&rho, s, pair_rate, 1.0, &det, derive_seed(5, "fringe", k as u64)).unwrap())
                .collect();
            let measured = visibility(&records, true).unwrap();
            assert!((measured - v).abs() < 0.005, "V={v}: {measured}");
        }
    }

    #[test]
    fn chsh_threshold() {
        let c = chsh_s_from_visibility(0.71).unwrap();
        assert!((c.s - 2.008).abs() < 1e-3 && c.violates);
        let c = chsh_s_from_visibility(1.0).unwrap();
        assert!((c.s - 2.0 * SQRT_2).abs() < 1e-15 && c.violates);
        let c = chsh_s_from_visibility(0.5).unwrap();
        assert!((c.s - 1.414).abs() < 1e-3 && !c.violates);
        let edge = FRAC_1_SQRT_2;
        assert!(!chsh_s_from_visibility(edge).unwrap().violates);
        assert!(!chsh_s_from_visibility(f64::from_bits(edge.to_bits() - 1)).unwrap().violates);
        assert!(chsh_s_from_visibility(f64::from_bits(edge.to_bits() + 1)).unwrap().violates);
        assert!(chsh_s_from_visibility(1.2).is_err());
    }
}
