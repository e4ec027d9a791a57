use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::curve::{check_increasing, fwhm, SpectralCurve, ValueKind};
use super::dispersion::DispersionModel;
use crate::chip::PplnConfig;
use crate::error::{Error, Result};
use crate::SPEED_OF_LIGHT;

/// Idler wavelength fixed by energy conservation, `1/λi = 1/λp − 1/λs`.
pub fn idler_wavelength(pump_nm: f64, signal_nm: f64) -> Result<f64> {
    if !(pump_nm > 0.0 && signal_nm > pump_nm) {
        return Err(Error::param(
            "signal_nm",
            format!("signal {signal_nm} nm must be longer than the pump {pump_nm} nm"),
        ));
    }
    Ok(pump_nm * signal_nm / (signal_nm - pump_nm))
}

/// Material mismatch `2π(n_p/λ_p − n_s/λ_s − n_i/λ_i)` in rad/m, without
/// the grating term. Symmetric under signal/idler exchange to the last bit.
pub fn bulk_mismatch(model: &DispersionModel, pump_nm: f64, signal_nm: f64, temperature_c: f64) -> Result<f64> {
    let idler_nm = idler_wavelength(pump_nm, signal_nm)?;
    model.check_window("pump_nm", pump_nm)?;
    model.check_window("signal_nm", signal_nm)?;
    model.check_window("idler_nm", idler_nm)?;
    let k = |w: f64| -> Result<f64> { Ok(model.refractive_index(w, temperature_c)? / (w * 1e-9)) };
    let (a, b) = if signal_nm <= idler_nm { (signal_nm, idler_nm) } else { (idler_nm, signal_nm) };
    Ok(2.0 * PI * (k(pump_nm)? - (k(a)? + k(b)?)))
}

/// `Δk = 2π(n_p/λ_p − n_s/λ_s − n_i/λ_i) − 2π/Λ` in rad/m.
pub fn qpm_mismatch(
    model: &DispersionModel,
    pump_nm: f64,
    signal_nm: f64,
    poling_period_um: f64,
    temperature_c: f64,
) -> Result<f64> {
    if !(poling_period_um > 0.0) {
        return Err(Error::param("poling_period_um", format!("must be > 0, got {poling_period_um}")));
    }
    Ok(bulk_mismatch(model, pump_nm, signal_nm, temperature_c)? - 2.0 * PI / (poling_period_um * 1e-6))
}

/// A poling grating whose wavevector carries an extra offset so that Δk
/// vanishes at a chosen operating point, absorbing the gap between the index
/// model and the real waveguide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibratedGrating {
    pub poling_period_um: f64,
    pub offset_rad_per_m: f64,
    pub temperature_c: f64,
}

impl CalibratedGrating {
    /// Zero mismatch for the degenerate pair `pump → 2·pump`.
    pub fn at_degeneracy(model: &DispersionModel, poling_period_um: f64, pump_nm: f64, temperature_c: f64) -> Result<Self> {
        let offset = qpm_mismatch(model, pump_nm, 2.0 * pump_nm, poling_period_um, temperature_c)?;
        Ok(CalibratedGrating {
            poling_period_um,
            offset_rad_per_m: offset,
            temperature_c,
        })
    }

    pub fn mismatch(&self, model: &DispersionModel, pump_nm: f64, signal_nm: f64) -> Result<f64> {
        Ok(qpm_mismatch(model, pump_nm, signal_nm, self.poling_period_um, self.temperature_c)? - self.offset_rad_per_m)
    }

    /// Mismatch for second-harmonic generation from a fundamental at `fundamental_nm`.
    pub fn shg_mismatch(&self, model: &DispersionModel, fundamental_nm: f64) -> Result<f64> {
        self.mismatch(model, fundamental_nm / 2.0, fundamental_nm)
    }
}

fn sinc_squared(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 3.0
    } else {
        let s = x.sin() / x;
        s * s
    }
}

fn check_grid(grid_nm: &[f64]) -> Result<()> {
    if grid_nm.is_empty() {
        return Err(Error::InsufficientData("empty wavelength grid".into()));
    }
    check_increasing(grid_nm)
}

pub fn temperature_peak_shift(cfg: &PplnConfig, t1_c: f64, t2_c: f64) -> f64 {
    cfg.temperature_slope_nm_per_c * (t2_c - t1_c)
}

/// Normalized SHG efficiency versus fundamental wavelength.
///
/// The grating is calibrated to phase-match `cfg.peak_wavelength_nm` at the
/// reference temperature; other temperatures shift the whole curve by the
/// configured linear slope.
pub fn shg_tuning_curve(
    model: &DispersionModel,
    cfg: &PplnConfig,
    grid_nm: &[f64],
    temperature_c: f64,
) -> Result<SpectralCurve> {
    check_grid(grid_nm)?;
    let t_ref = cfg.reference_temperature_c;
    let grating = CalibratedGrating::at_degeneracy(model, cfg.poling_period_um, cfg.peak_wavelength_nm / 2.0, t_ref)?;
    let shift = temperature_peak_shift(cfg, t_ref, temperature_c);
    let half_length = cfg.length_m() / 2.0;
    let values = grid_nm
        .iter()
        .map(|&w| {
            model.check_window("wavelength_nm", w)?;
            Ok(sinc_squared(grating.shg_mismatch(model, w - shift)? * half_length))
        })
        .collect::<Result<Vec<_>>>()?;
    SpectralCurve::new(grid_nm.to_vec(), values, ValueKind::NormalizedIntensity)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpdcSpectrum {
    pub curve: SpectralCurve,
    /// Main-lobe width; `None` when a half-maximum crossing lies outside the grid.
    pub fwhm_nm: Option<f64>,
}

/// Normalized SPDC signal spectrum for a CW pump, with the grating
/// calibrated to phase-match the degenerate pair of that pump.
pub fn spdc_spectrum(model: &DispersionModel, cfg: &PplnConfig, pump_nm: f64, grid_nm: &[f64]) -> Result<SpdcSpectrum> {
    check_grid(grid_nm)?;
    let grating = CalibratedGrating::at_degeneracy(model, cfg.poling_period_um, pump_nm, cfg.reference_temperature_c)?;
    let half_length = cfg.length_m() / 2.0;
    let values = grid_nm
        .iter()
        .map(|&w| Ok(sinc_squared(grating.mismatch(model, pump_nm, w)? * half_length)))
        .collect::<Result<Vec<_>>>()?;
    let curve = SpectralCurve::new(grid_nm.to_vec(), values, ValueKind::NormalizedIntensity)?;
    let fwhm_nm = match fwhm(&curve) {
        Ok(w) => Some(w),
        Err(Error::IncompleteSupport) => None,
        Err(e) => return Err(e),
    };
    Ok(SpdcSpectrum { curve, fwhm_nm })
}

/// `β₂ = λ³/(2πc²)·d²n/dλ²` in ps²/km on each grid point.
pub fn gvd_curve(model: &DispersionModel, grid_nm: &[f64], temperature_c: f64) -> Result<SpectralCurve> {
    check_grid(grid_nm)?;
    let values = grid_nm
        .iter()
        .map(|&w| {
            let d2n_per_m2 = model.second_derivative(w, temperature_c)? * 1e18;
            let lambda_m = w * 1e-9;
            let beta2_s2_per_m = lambda_m.powi(3) / (2.0 * PI * SPEED_OF_LIGHT * SPEED_OF_LIGHT) * d2n_per_m2;
            Ok(beta2_s2_per_m * 1e27)
        })
        .collect::<Result<Vec<_>>>()?;
    SpectralCurve::new(grid_nm.to_vec(), values, ValueKind::GvdPs2PerKm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chip::ChipConfig;
    use crate::phase_matching::curve::linspace;
    use crate::phase_matching::dispersion::{LithiumNiobateSellmeier, SampledIndex};
    use proptest::prelude::*;

    fn upper() -> PplnConfig {
        PplnConfig {
            peak_wavelength_nm: 1558.50,
            ..ChipConfig::ideal().ppln_upper
        }
    }

    fn waveguide() -> DispersionModel {
        DispersionModel::bundled_waveguide()
    }

    #[test]
    fn degenerate_point_is_phase_matched() {
        let m = waveguide();
        let g = CalibratedGrating::at_degeneracy(&m, 4.13, 779.5, 67.0).unwrap();
        assert!(g.mismatch(&m, 779.5, 1559.0).unwrap().abs() < 1e-3);
        // the bundled data are built so the nominal period needs no correction
        assert!(g.offset_rad_per_m.abs() < 1.0, "{}", g.offset_rad_per_m);
    }

    #[test]
    fn infinite_period_leaves_bulk_mismatch() {
        let m = LithiumNiobateSellmeier::default();
        let m = DispersionModel::Sellmeier(m);
        let bulk = bulk_mismatch(&m, 775.0, 1600.0, 40.0).unwrap();
        let dk = qpm_mismatch(&m, 775.0, 1600.0, 1e30, 40.0).unwrap();
        assert!((dk - bulk).abs() < 1e-6 * bulk.abs());
    }

    #[test]
    fn period_perturbation_sign() {
        let m = waveguide();
        let a = qpm_mismatch(&m, 779.5, 1500.0, 4.13, 67.0).unwrap();
        let b = qpm_mismatch(&m, 779.5, 1500.0, 4.13 * 1.01, 67.0).unwrap();
        let expected = 2.0 * PI * 0.01 / (4.13e-6 * 1.01);
        assert!(((b - a) - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn out_of_window_idler() {
        let m = waveguide();
        assert!(matches!(qpm_mismatch(&m, 779.5, 900.0, 4.13, 67.0), Err(Error::Range { .. })));
        assert!(qpm_mismatch(&m, 779.5, 700.0, 4.13, 67.0).is_err());
    }

    #[test]
    fn energy_conservation() {
        for s in linspace(1200.0, 2200.0, 101) {
            let i = idler_wavelength(779.5, s).unwrap();
            let residual = (1.0 / s + 1.0 / i - 1.0 / 779.5) * 779.5;
            assert!(residual.abs() < 1e-12);
        }
    }

    #[test]
    fn peak_shift_is_linear() {
        let mut cfg = upper();
        assert!((temperature_peak_shift(&cfg, 67.0, 68.0) - 0.269).abs() < 1e-12);
        assert_eq!(temperature_peak_shift(&cfg, 40.0, 40.0), 0.0);
        cfg.temperature_slope_nm_per_c = 0.261;
        assert!((temperature_peak_shift(&cfg, 67.0, 77.0) - 2.61).abs() < 1e-12);
    }

    fn shg_fwhm(length_mm: f64) -> f64 {
        let cfg = PplnConfig { length_mm, ..upper() };
        let curve = shg_tuning_curve(&waveguide(), &cfg, &linspace(1540.0, 1577.0, 7401), 67.0).unwrap();
        fwhm(&curve).unwrap()
    }

    #[test]
    fn shg_peak_and_width() {
        let curve = shg_tuning_curve(&waveguide(), &upper(), &linspace(1550.0, 1567.0, 3401), 67.0).unwrap();
        assert!((curve.peak_wavelength() - 1558.50).abs() < 0.05);
        assert!((curve.argmax().1 - 1.0).abs() < 1e-6);
        let w = fwhm(&curve).unwrap();
        assert!((w - 3.85).abs() < 0.385, "{w}");
    }

    #[test]
    fn shg_peak_tracks_temperature() {
        let curve = shg_tuning_curve(&waveguide(), &upper(), &linspace(1550.0, 1567.0, 3401), 77.0).unwrap();
        assert!((curve.peak_wavelength() - (1558.50 + 2.69)).abs() < 0.01);
    }

    #[test]
    fn shg_width_scales_inversely_with_length() {
        let (w3, w6, w12) = (shg_fwhm(3.0), shg_fwhm(6.0), shg_fwhm(12.0));
        assert!((w3 / w6 - 2.0).abs() < 0.04, "{w3} {w6}");
        assert!((w6 / w12 - 2.0).abs() < 0.04, "{w6} {w12}");
    }

    #[test]
    fn spdc_is_broadband() {
        let s = spdc_spectrum(&waveguide(), &upper(), 779.5, &linspace(1200.0, 2100.0, 1801)).unwrap();
        assert!((s.curve.interpolate(1559.0).unwrap() - 1.0).abs() < 1e-12);
        let w = s.fwhm_nm.unwrap();
        assert!(w >= 450.0 && (w - 589.0).abs() <= 0.25 * 589.0, "{w}");
    }

    #[test]
    fn spdc_narrow_grid_reports_no_width() {
        let s = spdc_spectrum(&waveguide(), &upper(), 779.5, &linspace(1500.0, 1630.0, 131)).unwrap();
        assert_eq!(s.fwhm_nm, None);
    }

    proptest! {
        #[test]
        fn spdc_symmetric_in_frequency(detune_thz in 0.0..60.0f64) {
            let pump = 779.5;
            let nu_deg = SPEED_OF_LIGHT / (2.0 * pump * 1e-9);
            let to_nm = |nu: f64| SPEED_OF_LIGHT / nu * 1e9;
            let lo = to_nm(nu_deg + detune_thz * 1e12);
            let hi = to_nm(nu_deg - detune_thz * 1e12);
            prop_assume!(hi > lo);
            let s = spdc_spectrum(&waveguide(), &upper(), pump, &[lo, hi]).unwrap();
            prop_assert!((s.curve.values()[0] - s.curve.values()[1]).abs() < 1e-10);
        }

        #[test]
        fn curves_are_normalized(t in 20.0..100.0f64, length in 1.0..20.0f64) {
            let cfg = PplnConfig { length_mm: length, ..upper() };
            let curve = shg_tuning_curve(&waveguide(), &cfg, &linspace(1520.0, 1600.0, 401), t).unwrap();
            prop_assert!(curve.values().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    fn quadratic(b: f64) -> DispersionModel {
        let w = linspace(1000.0, 2000.0, 201);
        let n = w.iter().map(|&l| 2.1 + b * (l - 1500.0) * (l - 1500.0)).collect();
        DispersionModel::Sampled(SampledIndex::new(w, n).unwrap())
    }

    #[test]
    fn gvd_of_linear_index_vanishes() {
        let w = linspace(1000.0, 2000.0, 21);
        let n = w.iter().map(|&l| 2.0 - l / 8192.0).collect();
        let m = DispersionModel::Sampled(SampledIndex::new(w, n).unwrap());
        let g = gvd_curve(&m, &linspace(1000.0, 2000.0, 51), 25.0).unwrap();
        assert!(g.values().iter().all(|v| v.abs() < 1e-9), "{:?}", g.values());
    }

    #[test]
    fn gvd_of_quadratic_index() {
        let b = 3e-8;
        let m = quadratic(b);
        let grid = linspace(1000.0, 2000.0, 41);
        let g = gvd_curve(&m, &grid, 25.0).unwrap();
        for (&l, &v) in grid.iter().zip(g.values()) {
            let lm = l * 1e-9;
            let expected = lm.powi(3) * 2.0 * b * 1e18 / (2.0 * PI * SPEED_OF_LIGHT * SPEED_OF_LIGHT) * 1e27;
            assert!((v - expected).abs() < 1e-3 * expected.abs(), "{l}: {v} vs {expected}");
        }
    }

    #[test]
    fn sampled_gvd_matches_sellmeier() {
        let m = DispersionModel::default();
        let sampled = m.resample(&linspace(1000.0, 2200.0, 601), 25.0).unwrap();
        let grid = linspace(1200.0, 1700.0, 11);
        let a = gvd_curve(&m, &grid, 25.0).unwrap();
        let f = gvd_curve(&sampled, &grid, 25.0).unwrap();
        for (x, y) in a.values().iter().zip(f.values()) {
            assert!(*x > 0.0, "bulk lithium niobate is normally dispersive in the telecom band");
            assert!((x - y).abs() < 0.01 * x.abs(), "{x} vs {y}");
        }
    }

    #[test]
    fn bundled_waveguide_has_zero_gvd_at_degeneracy() {
        let g = gvd_curve(&waveguide(), &[1559.0], 25.0).unwrap();
        assert!(g.values()[0].abs() < 1.0, "{}", g.values()[0]);
    }

    #[test]
    fn gvd_needs_enough_samples() {
        let m = DispersionModel::Sampled(SampledIndex::new(vec![1.0e3, 1.1e3, 1.2e3, 1.3e3], vec![2.0; 4]).unwrap());
        assert!(matches!(gvd_curve(&m, &[1100.0], 25.0), Err(Error::InsufficientData(_))));
    }
}
