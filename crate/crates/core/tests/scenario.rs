use epsim_core::chip::ChipConfig;
use epsim_core::counting::DetectorConfig;
use epsim_core::scenario::{phasematch, run, validate_outputs, Scenario};
use epsim_core::Error;

#[test]
fn reproduction_scenario_matches_reported_state_quality() {
    let dir = tempfile::tempdir().unwrap();
    let report = run(&Scenario::bundled("paper_repro").unwrap(), dir.path()).unwrap();
    assert_eq!(report.channels.len(), 3);
    for c in &report.channels {
        assert!(c.converged, "{}", c.label);
        assert!((0.96..=0.98).contains(&c.fidelity), "{}: F = {}", c.label, c.fidelity);
        assert!((c.visibility_hv - 0.982).abs() < 0.03, "{}: V_HV = {}", c.label, c.visibility_hv);
        assert!((c.visibility_ad - 0.975).abs() < 0.03, "{}: V_AD = {}", c.label, c.visibility_ad);
        assert!(c.chsh_violation && c.chsh_s > 2.6);
        assert!((c.brightness_pairs_per_s_per_nm_per_mw / 6.2e8 - 1.0).abs() < 0.05);
    }
}

#[test]
fn ideal_chip_without_noise_is_near_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = Scenario::bundled("paper_repro").unwrap();
    s.chip = ChipConfig::ideal();
    s.detector = DetectorConfig::ideal();
    s.source.pair_rate_per_mw_hz = 1e8;
    s.tomography.total_coincidences = 1e6;
    let report = run(&s, dir.path()).unwrap();
    for c in &report.channels {
        assert!(c.fidelity >= 0.999, "{}: {}", c.label, c.fidelity);
    }
}

#[test]
fn repeated_runs_write_identical_csvs() {
    let s = Scenario::bundled("paper_repro").unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(&s, a.path()).unwrap();
    run(&s, b.path()).unwrap();
    let mut compared = 0;
    for entry in std::fs::read_dir(a.path()).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "csv") {
            assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(b.path().join(p.file_name().unwrap())).unwrap());
            compared += 1;
        }
    }
    assert_eq!(compared, 3 * 3 + 4);
}

#[test]
fn different_seeds_change_counts() {
    let mut s = Scenario::bundled("paper_repro").unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    epsim_core::scenario::simulate(&s, a.path()).unwrap();
    s.seed += 1;
    epsim_core::scenario::simulate(&s, b.path()).unwrap();
    let name = format!("{}_counts.csv", s.channels[0].label);
    assert_ne!(std::fs::read(a.path().join(&name)).unwrap(), std::fs::read(b.path().join(&name)).unwrap());
}

#[test]
fn phasematch_on_default_config_peaks_at_measured_wavelength() {
    let dir = tempfile::tempdir().unwrap();
    let spectra = phasematch(&Scenario::bundled("paper_repro").unwrap(), dir.path()).unwrap();
    assert!((spectra.shg_upper.peak_nm - 1558.50).abs() <= 0.05);
    assert!((spectra.shg_lower.peak_nm - 1559.67).abs() <= 0.05);
    assert!((spectra.gvd_min_abs_nm - 1559.0).abs() <= 2.0);
    let csv = std::fs::read_to_string(&spectra.shg_upper.path).unwrap();
    assert!(csv.starts_with("wavelength_nm,normalized_intensity\n"));
    validate_outputs(dir.path()).unwrap();
}

#[test]
fn config_file_round_trip_is_field_identical() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/paper_repro.toml")).unwrap();
    let path = dir.path().join("a.toml");
    std::fs::write(&path, &text).unwrap();
    std::fs::copy(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/mmi_tree.csv"), dir.path().join("mmi_tree.csv")).unwrap();
    let first = Scenario::load(&path).unwrap();
    let again = dir.path().join("b.toml");
    std::fs::write(&again, first.to_toml().unwrap()).unwrap();
    assert_eq!(Scenario::load(&again).unwrap(), first);
}

#[test]
fn energy_violating_channel_is_rejected_with_residual() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = Scenario::bundled("paper_repro").unwrap();
    s.channels[1].idler_nm = 1540.0;
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, s.to_toml().unwrap()).unwrap();
    match Scenario::load(&path) {
        Err(Error::EnergyConservation { label, residual_nm, .. }) => {
            assert_eq!(label, "H8-H38");
            assert!(residual_nm.abs() > 0.2);
        }
        other => panic!("{other:?}"),
    }
}
