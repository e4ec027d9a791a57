use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{TomographyData, TomographyMetrics, TomographySettingSet};
use crate::counting::read_count_records;
use crate::error::{Error, Result};

/// Reads a count-record CSV and aligns it with `settings`.
pub fn read_tomography_data(path: &Path, settings: &TomographySettingSet) -> Result<TomographyData> {
    TomographyData::from_records(&read_count_records(path)?, settings)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionFiles {
    pub rho_real: PathBuf,
    pub rho_imag: PathBuf,
    pub metrics: PathBuf,
}

const BASIS_HEADER: &str = "basis,HH,HV,VH,VV";

fn write_part(path: &Path, m: &[[f64; 4]; 4]) -> Result<()> {
    let mut text = String::from(BASIS_HEADER);
    text.push('\n');
    for (label, row) in ["HH", "HV", "VH", "VV"].iter().zip(m) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        text.push_str(&format!("{label},{}\n", cells.join(",")));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `<stem>_rho_real.csv`, `<stem>_rho_imag.csv` and
/// `<stem>_metrics.json` into `dir`.
pub fn write_reconstruction(dir: &Path, stem: &str, metrics: &TomographyMetrics) -> Result<ReconstructionFiles> {
    let files = ReconstructionFiles {
        rho_real: dir.join(format!("{stem}_rho_real.csv")),
        rho_imag: dir.join(format!("{stem}_rho_imag.csv")),
        metrics: dir.join(format!("{stem}_metrics.json")),
    };
    write_part(&files.rho_real, &metrics.rho_real)?;
    write_part(&files.rho_imag, &metrics.rho_imag)?;
    let json = serde_json::to_string_pretty(metrics)?;
    std::fs::write(&files.metrics, json + "\n").map_err(|e| Error::io(&files.metrics, e))?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polarization::{bell_state, densify, BellState};
    use crate::tomography::{report_metrics, ReconstructionResult};

    #[test]
    fn writes_three_files() {
        let dir = tempfile::tempdir().unwrap();
        let rho = densify(&bell_state(BellState::PhiPlus)).unwrap().rho;
        let result = ReconstructionResult {
            rho,
            fidelity_to_bell: 1.0,
            log_likelihood: -3.0,
            likelihood_history: vec![-3.0],
            iterations: 1,
            converged: true,
        };
        let m = report_metrics(&result).unwrap();
        let files = write_reconstruction(dir.path(), "H8-H38", &m).unwrap();
        let real = std::fs::read_to_string(&files.rho_real).unwrap();
        assert_eq!(real.lines().count(), 5);
        assert!(real.starts_with("basis,HH,HV,VH,VV\nHH,0.5"));
        let back: TomographyMetrics = serde_json::from_str(&std::fs::read_to_string(&files.metrics).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
