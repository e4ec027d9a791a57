use serde::{Deserialize, Serialize};

use super::ReconstructionResult;
use crate::counting::{chsh_s_from_visibility, coincidence_probability, correlation_visibility, FringeBasis};
use crate::error::Result;
use crate::polarization::DensityMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyMetrics {
    /// Fidelity to `(|HH⟩ + |VV⟩)/√2`.
    pub fidelity: f64,
    pub purity: f64,
    pub visibility_hv: f64,
    pub visibility_ad: f64,
    /// CHSH S from the A/D visibility.
    pub chsh_s: f64,
    pub chsh_violation: bool,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    pub rho_real: [[f64; 4]; 4],
    pub rho_imag: [[f64; 4]; 4],
}

/// Correlation visibility of `rho` in one basis pair.
pub fn state_visibility(rho: &DensityMatrix, basis: FringeBasis) -> Result<f64> {
    let p = basis.settings();
    let mut c = [0.0; 4];
    for (k, s) in p.iter().enumerate() {
        c[k] = coincidence_probability(rho, s)?;
    }
    correlation_visibility(c)
}

pub fn report_metrics(result: &ReconstructionResult) -> Result<TomographyMetrics> {
    let rho = &result.rho;
    let visibility_hv = state_visibility(rho, FringeBasis::Hv)?;
    let visibility_ad = state_visibility(rho, FringeBasis::Ad)?;
    let chsh = chsh_s_from_visibility(visibility_ad.clamp(0.0, 1.0))?;
    Ok(TomographyMetrics {
        fidelity: result.fidelity_to_bell,
        purity: rho.purity(),
        visibility_hv,
        visibility_ad,
        chsh_s: chsh.s,
        chsh_violation: chsh.violates,
        log_likelihood: result.log_likelihood,
        iterations: result.iterations,
        converged: result.converged,
        rho_real: rho.real_part(),
        rho_imag: rho.imag_part(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polarization::{bell_state, densify, fidelity, BellState};

    fn result_for(rho: DensityMatrix) -> ReconstructionResult {
        let f = fidelity(&rho, &bell_state(BellState::PhiPlus)).unwrap();
        ReconstructionResult {
            rho,
            fidelity_to_bell: f,
            log_likelihood: 0.0,
            likelihood_history: vec![0.0],
            iterations: 0,
            converged: true,
        }
    }

    #[test]
    fn bell_state_metrics() {
        let m = report_metrics(&result_for(densify(&bell_state(BellState::PhiPlus)).unwrap().rho)).unwrap();
        assert!((m.fidelity - 1.0).abs() < 1e-12);
        assert!((m.purity - 1.0).abs() < 1e-12);
        assert!((m.visibility_hv - 1.0).abs() < 1e-12);
        assert!((m.visibility_ad - 1.0).abs() < 1e-12);
        assert!((m.chsh_s - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((m.rho_real[0][3] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn werner_metrics() {
        let m = report_metrics(&result_for(DensityMatrix::werner(0.961).unwrap())).unwrap();
        assert!((m.fidelity - 0.97075).abs() < 1e-12);
        assert!((m.visibility_hv - 0.961).abs() < 1e-12);
        assert!((m.visibility_ad - 0.961).abs() < 1e-12);
    }
}
