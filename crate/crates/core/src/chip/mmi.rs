use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmiSample {
    pub splitter_count: u32,
    pub output_power_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmiFit {
    pub per_splitter_loss_db: f64,
    /// Fitted output power with zero splitters in the path.
    pub intercept_dbm: f64,
    pub residuals_db: Vec<f64>,
}

/// Least-squares loss per splitter from cascaded-MMI output powers.
pub fn mmi_tree_fit(samples: &[MmiSample]) -> Result<MmiFit> {
    let first = samples.first().map(|s| s.splitter_count);
    if !samples.iter().any(|s| Some(s.splitter_count) != first) {
        return Err(Error::InsufficientData(
            "MMI-tree fit needs at least two distinct splitter counts".into(),
        ));
    }
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.splitter_count as f64).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.output_power_dbm).sum::<f64>() / n;
    let (sxy, sxx) = samples.iter().fold((0.0, 0.0), |(sxy, sxx), s| {
        let dx = s.splitter_count as f64 - mx;
        (sxy + dx * (s.output_power_dbm - my), sxx + dx * dx)
    });
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals_db = samples
        .iter()
        .map(|s| s.output_power_dbm - (intercept + slope * s.splitter_count as f64))
        .collect();
    Ok(MmiFit {
        per_splitter_loss_db: -slope,
        intercept_dbm: intercept,
        residuals_db,
    })
}

/// Reads `splitter_count,output_power_dbm` rows.
pub fn read_mmi_samples(path: &Path) -> Result<Vec<MmiSample>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let samples = reader.deserialize().collect::<Result<Vec<MmiSample>, _>>()?;
    if samples.is_empty() {
        return Err(Error::InsufficientData(format!("{} holds no samples", path.display())));
    }
    Ok(samples)
}
