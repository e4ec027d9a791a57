//! Dispersion and quasi-phase-matching: refractive index models, phase
//! mismatch, SHG tuning curves, broadband SPDC spectra and GVD.

mod curve;
mod dispersion;
mod qpm;

pub use curve::{fwhm, half_max_crossings, linspace, sidecar_path, CurveMetadata, SpectralCurve, ValueKind};
pub use dispersion::{
    DispersionModel, LithiumNiobateSellmeier, SampledIndex, MIN_DERIVATIVE_SAMPLES, MIN_INTERPOLATION_SAMPLES,
};
pub use qpm::{
    bulk_mismatch, gvd_curve, idler_wavelength, qpm_mismatch, shg_tuning_curve, spdc_spectrum, temperature_peak_shift,
    CalibratedGrating, SpdcSpectrum,
};
