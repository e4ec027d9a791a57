use serde::{Deserialize, Serialize};

use super::config::PrcConfig;
use crate::error::{Error, Result};

/// Field (amplitude) transmissions of the rotator-combiner at one wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrcTransmission {
    /// Upper-waveguide H photon passing straight through.
    pub through_h: f64,
    /// Lower-waveguide photon converted to V and combined.
    pub cross_v: f64,
    /// Residual amplitude an H photon leaks into V.
    pub leak_h: f64,
    /// Residual amplitude a V photon leaks into H.
    pub leak_v: f64,
}

/// Power ratio for a loss or extinction in dB.
pub fn db_to_power(db: f64) -> f64 {
    10f64.powf(-db / 10.0)
}

/// Field amplitude ratio for a loss or extinction in dB.
pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(-db / 20.0)
}

impl PrcConfig {
    /// Wavelength range where the model is defined, narrowed to a measured
    /// curve's span when one is loaded.
    pub fn window(&self) -> (f64, f64) {
        let [lo, hi] = self.validity_window_nm;
        match &self.measured_curve {
            Some(c) => {
                let (clo, chi) = c.bounds();
                (lo.max(clo), hi.min(chi))
            }
            None => (lo, hi),
        }
    }

    /// Power transmission of the cross (conversion) path.
    pub fn cross_power(&self, wavelength_nm: f64) -> Result<f64> {
        let (min, max) = self.window();
        if !(min..=max).contains(&wavelength_nm) {
            return Err(Error::Range {
                quantity: "wavelength_nm",
                value: wavelength_nm,
                min,
                max,
            });
        }
        if let Some(curve) = &self.measured_curve {
            let db = curve.interpolate(wavelength_nm).expect("inside curve window");
            return Ok(10f64.powf(db / 10.0));
        }
        let detune = (wavelength_nm - self.cross_center_wavelength_nm) / self.cross_fwhm_nm;
        let shape = (-4.0 * std::f64::consts::LN_2 * detune * detune).exp();
        Ok(db_to_power(self.cross_insertion_loss_db) * shape)
    }
}

pub fn prc_transmission(cfg: &PrcConfig, wavelength_nm: f64) -> Result<PrcTransmission> {
    let cross = cfg.cross_power(wavelength_nm)?;
    Ok(PrcTransmission {
        through_h: db_to_amplitude(cfg.through_insertion_loss_db),
        cross_v: cross.sqrt(),
        leak_h: db_to_amplitude(cfg.extinction_h_db),
        leak_v: db_to_amplitude(cfg.extinction_v_db),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chip::ChipConfig;
    use crate::phase_matching::{SpectralCurve, ValueKind};

    fn measured_prc() -> PrcConfig {
        PrcConfig {
            through_insertion_loss_db: 2.5,
            cross_insertion_loss_db: 3.3,
            extinction_h_db: 19.3,
            extinction_v_db: 15.5,
            cross_fwhm_nm: 160.0,
            ..ChipConfig::ideal().prc
        }
    }

    #[test]
    fn cross_path_peak_and_half_width() {
        let cfg = measured_prc();
        let t = prc_transmission(&cfg, 1559.0).unwrap();
        assert!((t.cross_v.powi(2) - 10f64.powf(-0.33)).abs() < 1e-12);
        assert!((t.cross_v.powi(2) - 0.468).abs() < 1e-3);
        let peak = t.cross_v.powi(2);
        for lam in [1479.0, 1639.0] {
            let p = prc_transmission(&cfg, lam).unwrap().cross_v.powi(2);
            assert!((p / peak - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn through_path_and_leakage() {
        let cfg = measured_prc();
        let a = prc_transmission(&cfg, 1500.0).unwrap();
        let b = prc_transmission(&cfg, 1650.0).unwrap();
        assert_eq!(a.through_h, b.through_h);
        assert!((a.through_h.powi(2) - 10f64.powf(-0.25)).abs() < 1e-12);
        assert!((a.leak_h - 10f64.powf(-0.965)).abs() < 1e-12);
        assert!((a.leak_h - 0.1084).abs() < 1e-4);
        assert!((a.leak_v - 10f64.powf(-0.775)).abs() < 1e-12);
    }

    #[test]
    fn outside_window_is_rejected() {
        let cfg = measured_prc();
        assert!(matches!(prc_transmission(&cfg, 1399.0), Err(Error::Range { .. })));
        assert!(matches!(prc_transmission(&cfg, 1700.5), Err(Error::Range { .. })));
    }

    #[test]
    fn measured_curve_overrides_gaussian() {
        let mut cfg = measured_prc();
        cfg.measured_curve = Some(
            SpectralCurve::new(vec![1470.0, 1559.0, 1680.0], vec![-6.0, -3.0, -9.0], ValueKind::TransmissionDb).unwrap(),
        );
        assert_eq!(cfg.window(), (1470.0, 1680.0));
        let p = cfg.cross_power(1559.0).unwrap();
        assert!((p - 10f64.powf(-0.3)).abs() < 1e-12);
        assert!(cfg.cross_power(1450.0).is_err());
    }
}
