//! Parametric models of the on-chip components and synthesis of the emitted
//! two-photon polarization state.

mod config;
mod mmi;
mod prc;

use num_complex::Complex64;

pub use config::{ChipConfig, MmiConfig, PplnConfig, PrcConfig, PumpConfig, DEFAULT_PRC_WINDOW_NM};
pub(crate) use config::Checker;
pub use mmi::{mmi_tree_fit, read_mmi_samples, MmiFit, MmiSample};
pub use prc::{db_to_amplitude, db_to_power, prc_transmission, PrcTransmission};

use crate::error::{Error, Result};
use crate::phase_matching::idler_wavelength;
use crate::polarization::{densify, mix_white_noise, DensityMatrix, StateVector};

pub fn pump_wavelength(cfg: &PumpConfig, temperature_c: f64) -> f64 {
    cfg.reference_wavelength_nm + cfg.tuning_slope_nm_per_c * (temperature_c - cfg.reference_temperature_c)
}

/// Splits the coupled pump into (upper, lower) arm powers in mW.
pub fn split_pump(cfg: &MmiConfig, on_chip_power_mw: f64) -> Result<(f64, f64)> {
    if !(on_chip_power_mw >= 0.0) {
        return Err(Error::param("on_chip_power_mw", format!("must be ≥ 0, got {on_chip_power_mw}")));
    }
    let out = on_chip_power_mw * db_to_power(cfg.insertion_loss_db);
    Ok((out * cfg.split_fraction_upper, out * (1.0 - cfg.split_fraction_upper)))
}

/// Unnormalized pair amplitudes, before white noise, for a signal photon at
/// `signal_nm` and its energy-conserving idler.
///
/// Each branch amplitude scales with the square root of its arm's pump
/// power and picks up one field transmission per photon. A photon leaking
/// through the rotator-combiner's finite extinction lands in the orthogonal
/// polarization with the sign of a small rotation, H → +V and V → −H, to
/// first order.
pub fn pair_amplitudes(cfg: &ChipConfig, signal_nm: f64) -> Result<StateVector> {
    let pump = cfg.pump.wavelength_nm();
    let idler_nm = idler_wavelength(pump, signal_nm)?;
    let ts = prc_transmission(&cfg.prc, signal_nm)?;
    let ti = prc_transmission(&cfg.prc, idler_nm)?;
    let (upper, lower) = split_pump(&cfg.mmi, 1.0)?;

    let hh = upper.sqrt() * ts.through_h * ti.through_h;
    let vv = Complex64::from_polar(lower.sqrt() * ts.cross_v * ti.cross_v, cfg.path_phase_rad);
    let hv = hh * ti.leak_h - vv * ts.leak_v;
    let vh = hh * ts.leak_h - vv * ti.leak_v;
    Ok(StateVector::new([Complex64::from(hh), hv, vh, vv]))
}

/// Density matrix of the emitted pair state, including the configured white
/// noise admixture.
pub fn synthesize_pair_state(cfg: &ChipConfig, signal_nm: f64) -> Result<DensityMatrix> {
    cfg.validate()?;
    let psi = pair_amplitudes(cfg, signal_nm)?;
    if psi.norm_sqr() == 0.0 {
        return Err(Error::DegenerateState);
    }
    let rho = densify(&psi.normalized()?)?.rho;
    mix_white_noise(&rho, cfg.noise_admixture)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polarization::{bell_state, fidelity, BellState};
    use proptest::prelude::*;

    fn calibrated() -> ChipConfig {
        let mut cfg = ChipConfig::ideal();
        cfg.mmi.split_fraction_upper = 0.49;
        cfg.mmi.insertion_loss_db = 3.1;
        cfg.prc.through_insertion_loss_db = 2.5;
        cfg.prc.cross_insertion_loss_db = 3.3;
        cfg.prc.extinction_h_db = 19.3;
        cfg.prc.extinction_v_db = 15.5;
        cfg.noise_admixture = 0.026;
        cfg
    }

    #[test]
    fn pump_tuning() {
        let cfg = ChipConfig::ideal().pump;
        assert_eq!(pump_wavelength(&cfg, 21.0), 779.5);
        assert!((pump_wavelength(&cfg, 22.0) - 779.567).abs() < 1e-12);
        let flat = PumpConfig { tuning_slope_nm_per_c: 0.0, ..cfg };
        assert_eq!(pump_wavelength(&flat, -40.0), 779.5);
    }

    #[test]
    fn pump_splitting() {
        let (u, l) = split_pump(&MmiConfig { split_fraction_upper: 0.5, insertion_loss_db: 3.1 }, 0.15).unwrap();
        let expected = 0.15 * 10f64.powf(-0.31) / 2.0;
        assert!((u - expected).abs() < 1e-15 && (l - expected).abs() < 1e-15);
        assert!((u - 0.03674).abs() < 1e-5);
        assert_eq!(split_pump(&MmiConfig { split_fraction_upper: 0.5, insertion_loss_db: 0.0 }, 1.0).unwrap(), (0.5, 0.5));
        let (u, l) = split_pump(&MmiConfig { split_fraction_upper: 0.49, insertion_loss_db: 0.0 }, 1.0).unwrap();
        assert!((u - 0.49).abs() < 1e-15 && (l - 0.51).abs() < 1e-15);
        assert!(split_pump(&MmiConfig { split_fraction_upper: 0.5, insertion_loss_db: 0.0 }, -1.0).is_err());
    }

    #[test]
    fn ideal_chip_emits_bell_states() {
        let mut cfg = ChipConfig::ideal();
        let rho = synthesize_pair_state(&cfg, 1559.0).unwrap();
        assert!((fidelity(&rho, &bell_state(BellState::PhiPlus)).unwrap() - 1.0).abs() < 1e-12);
        cfg.path_phase_rad = std::f64::consts::PI;
        let rho = synthesize_pair_state(&cfg, 1559.0).unwrap();
        assert!((fidelity(&rho, &bell_state(BellState::PhiMinus)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn calibrated_chip_fidelity() {
        let rho = synthesize_pair_state(&calibrated(), 1559.0).unwrap();
        let f = fidelity(&rho, &bell_state(BellState::PhiPlus)).unwrap();
        assert!((0.96..=0.98).contains(&f), "F = {f}");
    }

    #[test]
    fn total_blocking_is_degenerate() {
        let mut cfg = ChipConfig::ideal();
        cfg.prc.through_insertion_loss_db = f64::INFINITY;
        cfg.prc.cross_insertion_loss_db = f64::INFINITY;
        assert!(matches!(synthesize_pair_state(&cfg, 1559.0), Err(Error::DegenerateState)));
    }

    #[test]
    fn signal_outside_window() {
        assert!(matches!(synthesize_pair_state(&ChipConfig::ideal(), 1390.0), Err(Error::Range { .. })));
    }

    #[test]
    fn invalid_config_lists_every_field() {
        let mut cfg = ChipConfig::ideal();
        cfg.noise_admixture = 1.5;
        cfg.pump.coupling_efficiency = 0.0;
        cfg.ppln_lower.length_mm = -1.0;
        match cfg.validate() {
            Err(Error::Config(errs)) => {
                let fields: Vec<_> = errs.iter().map(|e| e.field.as_str()).collect();
                assert_eq!(fields, ["pump.coupling_efficiency", "ppln_lower.length_mm", "noise_admixture"]);
            }
            other => panic!("{other:?}"),
        }
    }

    fn swapped(cfg: &ChipConfig) -> ChipConfig {
        let mut s = cfg.clone();
        s.mmi.split_fraction_upper = 1.0 - cfg.mmi.split_fraction_upper;
        s.prc.through_insertion_loss_db = cfg.prc.cross_insertion_loss_db;
        s.prc.cross_insertion_loss_db = cfg.prc.through_insertion_loss_db;
        s.prc.extinction_h_db = cfg.prc.extinction_v_db;
        s.prc.extinction_v_db = cfg.prc.extinction_h_db;
        std::mem::swap(&mut s.ppln_upper, &mut s.ppln_lower);
        s
    }

    #[test]
    fn swap_with_phase_shift_in_ideal_limit() {
        let mut cfg = ChipConfig::ideal();
        cfg.mmi.split_fraction_upper = 0.3;
        cfg.prc.through_insertion_loss_db = 1.0;
        cfg.prc.cross_insertion_loss_db = 4.0;
        cfg.path_phase_rad = 0.4;
        let a = synthesize_pair_state(&cfg, 1559.0).unwrap().populations();
        let mut s = swapped(&cfg);
        s.path_phase_rad += std::f64::consts::PI;
        let b = synthesize_pair_state(&s, 1559.0).unwrap().populations();
        assert!((a[0] - b[3]).abs() < 1e-15 && (a[3] - b[0]).abs() < 1e-15);
    }

    #[test]
    fn infinite_extinction_has_no_cross_terms() {
        let mut cfg = calibrated();
        cfg.noise_admixture = 0.0;
        cfg.prc.extinction_h_db = f64::INFINITY;
        cfg.prc.extinction_v_db = f64::INFINITY;
        for lam in [1450.0, 1559.0, 1620.0] {
            let p = synthesize_pair_state(&cfg, lam).unwrap().populations();
            assert!(p[1] < 1e-12 && p[2] < 1e-12);
        }
    }

    fn arb_config() -> impl Strategy<Value = ChipConfig> {
        (
            0.0..1.0f64,
            0.0..10.0f64,
            0.0..10.0f64,
            5.0..40.0f64,
            5.0..40.0f64,
            -10.0..10.0f64,
            0.0..=1.0f64,
        )
            .prop_map(|(split, th, cr, eh, ev, phi, noise)| {
                let mut cfg = ChipConfig::ideal();
                cfg.mmi.split_fraction_upper = split;
                cfg.prc.through_insertion_loss_db = th;
                cfg.prc.cross_insertion_loss_db = cr;
                cfg.prc.extinction_h_db = eh;
                cfg.prc.extinction_v_db = ev;
                cfg.path_phase_rad = phi;
                cfg.noise_admixture = noise;
                cfg
            })
    }

    proptest! {
        #[test]
        fn synthesized_states_are_valid(cfg in arb_config(), lam in 1450.0..1680.0f64) {
            let rho = synthesize_pair_state(&cfg, lam).unwrap();
            prop_assert!(rho.validate().is_ok());
        }

        #[test]
        fn swap_symmetry_with_conjugate_phase(cfg in arb_config()) {
            let a = synthesize_pair_state(&cfg, 1559.0).unwrap().populations();
            let mut s = swapped(&cfg);
            s.path_phase_rad = -cfg.path_phase_rad;
            let b = synthesize_pair_state(&s, 1559.0).unwrap().populations();
            prop_assert!((a[0] - b[3]).abs() < 1e-12);
            prop_assert!((a[3] - b[0]).abs() < 1e-12);
        }

        #[test]
        fn noise_lowers_fidelity_with_slope_three_quarters(cfg in arb_config(), dp in 0.01..0.2f64) {
            let mut lo = cfg.clone();
            lo.noise_admixture = cfg.noise_admixture * (1.0 - dp);
            let target = bell_state(BellState::PhiPlus);
            let f_hi = fidelity(&synthesize_pair_state(&cfg, 1559.0).unwrap(), &target).unwrap();
            let f_lo = fidelity(&synthesize_pair_state(&lo, 1559.0).unwrap(), &target).unwrap();
            let dn = cfg.noise_admixture - lo.noise_admixture;
            lo.noise_admixture = 0.0;
            let f_pure = fidelity(&synthesize_pair_state(&lo, 1559.0).unwrap(), &target).unwrap();
            // F(p) = F₀ − p(F₀ − 1/4): strictly decreasing unless F₀ = 1/4
            prop_assert!((f_lo - f_hi - dn * (f_pure - 0.25)).abs() < 1e-12);
            if f_pure > 0.25 + 1e-9 && dn > 0.0 {
                prop_assert!(f_hi < f_lo);
            }
        }
    }

    #[test]
    fn bell_target_noise_slope_is_three_quarters() {
        let mut cfg = ChipConfig::ideal();
        let target = bell_state(BellState::PhiPlus);
        let f0 = fidelity(&synthesize_pair_state(&cfg, 1559.0).unwrap(), &target).unwrap();
        cfg.noise_admixture = 0.1;
        let f1 = fidelity(&synthesize_pair_state(&cfg, 1559.0).unwrap(), &target).unwrap();
        assert!(((f0 - f1) / 0.1 - 0.75).abs() < 1e-12);
    }
}
