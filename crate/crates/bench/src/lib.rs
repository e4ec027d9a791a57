//! Fixed workloads shared by the benchmarks.

use epsim_core::chip::synthesize_pair_state;
use epsim_core::phase_matching::{linspace, DispersionModel};
use epsim_core::polarization::DensityMatrix;
use epsim_core::scenario::Scenario;
use epsim_core::tomography::{tomo_settings, TomographyData, TomographySettingSet};

pub fn paper_scenario() -> Scenario {
    Scenario::bundled("paper_repro").expect("bundled scenario loads")
}

/// State of the first reproduction channel.
pub fn paper_state() -> DensityMatrix {
    let s = paper_scenario();
    synthesize_pair_state(&s.chip, s.channels[0].signal_nm).expect("valid channel")
}

/// Noiseless tomography counts of [`paper_state`] totalling `total`.
pub fn tomography_workload(total: f64) -> (TomographyData, TomographySettingSet) {
    let settings = tomo_settings();
    let data = TomographyData::expected(&paper_state(), &settings, total).expect("valid state");
    (data, settings)
}

pub fn waveguide() -> DispersionModel {
    DispersionModel::bundled_waveguide()
}

pub fn spdc_grid(points: usize) -> Vec<f64> {
    linspace(1200.0, 2100.0, points)
}
