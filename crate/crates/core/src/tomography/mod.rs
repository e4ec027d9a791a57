//! Two-qubit polarization state tomography: the 16-setting measurement
//! design, accidental subtraction, linear inversion and maximum-likelihood
//! reconstruction.

mod io;
mod linear;
mod metrics;
mod mle;

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use io::{read_tomography_data, write_reconstruction, ReconstructionFiles};
pub use linear::{linear_inversion, pauli_basis, psd_projection};
pub use metrics::{report_metrics, state_visibility, TomographyMetrics};
pub use mle::{mle_reconstruct, MleOptions, NegLogLikelihood, ReconstructionResult, PARAMETERS};

use crate::counting::CountRecord;
use crate::error::{Error, Result};
use crate::polarization::{AnalyzerSetting, ArmSetting, DensityMatrix, Matrix4c};

/// Single-photon analyzer states used by the canonical design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Projection {
    H,
    V,
    D,
    /// `(|H⟩ − i|V⟩)/√2`
    R,
}

impl Projection {
    pub const ALL: [Projection; 4] = [Projection::H, Projection::V, Projection::D, Projection::R];

    /// Plate angles (QWP, HWP) in degrees in front of a polarizer fixed at H.
    pub fn plate_angles_deg(self) -> (f64, f64) {
        match self {
            Projection::H => (0.0, 0.0),
            Projection::V => (0.0, 45.0),
            Projection::D => (45.0, 67.5),
            Projection::R => (0.0, 67.5),
        }
    }

    pub fn arm(self) -> ArmSetting {
        let (q, h) = self.plate_angles_deg();
        ArmSetting::new(Some(q.to_radians()), Some(h.to_radians()), 0.0)
    }

    fn letter(self) -> char {
        match self {
            Projection::H => 'H',
            Projection::V => 'V',
            Projection::D => 'D',
            Projection::R => 'R',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographySetting {
    /// Signal then idler projection, e.g. `"HD"`.
    pub label: String,
    pub analyzer: AnalyzerSetting,
    pub projector: Matrix4c,
}

impl TomographySetting {
    pub fn new(label: impl Into<String>, analyzer: AnalyzerSetting) -> Self {
        let projector = analyzer.two_photon_projector();
        TomographySetting {
            label: label.into(),
            analyzer,
            projector,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographySettingSet {
    settings: Vec<TomographySetting>,
}

/// The 16 product projections `{H, V, D, R}⊗{H, V, D, R}`, signal-major:
/// HH, HV, HD, HR, VH, … RR.
pub fn tomo_settings() -> TomographySettingSet {
    let settings = Projection::ALL
        .iter()
        .flat_map(|&s| {
            Projection::ALL.iter().map(move |&i| {
                TomographySetting::new(format!("{}{}", s.letter(), i.letter()), AnalyzerSetting::new(s.arm(), i.arm()))
            })
        })
        .collect();
    TomographySettingSet { settings }
}

impl TomographySettingSet {
    pub fn new(settings: Vec<TomographySetting>) -> Self {
        TomographySettingSet { settings }
    }

    pub fn settings(&self) -> &[TomographySetting] {
        &self.settings
    }

    pub fn len(&self) -> usize {
        self.settings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.settings.is_empty()
    }

    /// Real design matrix `M[k][j] = Tr(Π_k σ_j)` over the Pauli-product basis.
    pub fn design_matrix(&self) -> DMatrix<f64> {
        let basis = pauli_basis();
        DMatrix::from_fn(self.len(), 16, |k, j| (self.settings[k].projector * basis[j]).trace().re)
    }

    pub fn rank(&self) -> usize {
        SVD::new(self.design_matrix(), false, false).rank(1e-10)
    }

    /// The same settings in a new order: entry `k` of the result is entry
    /// `order[k]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        TomographySettingSet {
            settings: order.iter().map(|&k| self.settings[k].clone()).collect(),
        }
    }

    /// Index of the setting realizing the same projector as `analyzer`.
    pub fn position(&self, analyzer: &AnalyzerSetting) -> Option<usize> {
        let p = analyzer.two_photon_projector();
        self.settings.iter().position(|s| (s.projector - p).camax() < 1e-9)
    }
}

/// Coincidence counts aligned with a setting set. Counts are real so that
/// noiseless expectations and subtracted data share one type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyData {
    pub counts: Vec<f64>,
    pub accidentals: Vec<f64>,
    /// Integration time of each setting, s. Sets the relative flux
    /// normalization between settings.
    pub exposure_s: Vec<f64>,
    /// Settings where subtraction went negative and was floored at zero.
    #[serde(default)]
    pub clipped: Vec<bool>,
}

impl TomographyData {
    pub fn new(counts: Vec<f64>, accidentals: Vec<f64>, exposure_s: Vec<f64>) -> Result<Self> {
        let n = counts.len();
        if accidentals.len() != n || exposure_s.len() != n {
            return Err(Error::param(
                "tomography data",
                format!("{n} counts, {} accidentals, {} exposures", accidentals.len(), exposure_s.len()),
            ));
        }
        if counts.iter().chain(&accidentals).any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::param("counts", "counts and accidentals must be finite and ≥ 0"));
        }
        if exposure_s.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::param("exposure_s", "exposures must be > 0"));
        }
        Ok(TomographyData {
            counts,
            accidentals,
            exposure_s,
            clipped: vec![false; n],
        })
    }

    /// Background-free counts with unit exposure.
    pub fn from_counts(counts: Vec<f64>) -> Result<Self> {
        let n = counts.len();
        Self::new(counts, vec![0.0; n], vec![1.0; n])
    }

    /// Noiseless counts from `rho` totalling `total` over all settings.
    pub fn expected(rho: &DensityMatrix, settings: &TomographySettingSet, total: f64) -> Result<Self> {
        let p: Vec<f64> = settings.settings().iter().map(|s| rho.expectation(&s.projector).max(0.0)).collect();
        let sum: f64 = p.iter().sum();
        Self::from_counts(p.iter().map(|x| total * x / sum).collect())
    }

    /// Gathers the records matching each setting of `settings`.
    pub fn from_records(records: &[CountRecord], settings: &TomographySettingSet) -> Result<Self> {
        let mut slots: Vec<Option<&CountRecord>> = vec![None; settings.len()];
        for r in records {
            if let Some(k) = settings.position(&r.setting) {
                slots[k] = Some(r);
            }
        }
        let missing: Vec<&str> = slots
            .iter()
            .zip(settings.settings())
            .filter(|(r, _)| r.is_none())
            .map(|(_, s)| s.label.as_str())
            .collect();
        if !missing.is_empty() {
            return Err(Error::InsufficientData(format!("no records for settings {}", missing.join(", "))));
        }
        let recs: Vec<&CountRecord> = slots.into_iter().flatten().collect();
        Self::new(
            recs.iter().map(|r| r.raw_coincidences as f64).collect(),
            recs.iter().map(|r| r.raw_accidentals as f64).collect(),
            recs.iter().map(|r| r.integration_time_s).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// The same data reordered like [`TomographySettingSet::permuted`].
    pub fn permuted(&self, order: &[usize]) -> Self {
        let pick = |v: &[f64]| order.iter().map(|&k| v[k]).collect::<Vec<_>>();
        TomographyData {
            counts: pick(&self.counts),
            accidentals: pick(&self.accidentals),
            exposure_s: pick(&self.exposure_s),
            clipped: order.iter().map(|&k| self.clipped.get(k).copied().unwrap_or(false)).collect(),
        }
    }
}

/// `max(counts − accidentals, 0)` per setting, flagging clipped settings.
/// The returned data carry zero accidentals.
pub fn subtract_accidentals(data: &TomographyData) -> TomographyData {
    let mut out = data.clone();
    for k in 0..data.len() {
        let net = data.counts[k] - data.accidentals[k];
        out.clipped[k] = net < 0.0;
        out.counts[k] = net.max(0.0);
        out.accidentals[k] = 0.0;
    }
    out
}

/// A density matrix drawn from the Hilbert–Schmidt measure (normalized
/// `GG†` with `G` complex Ginibre).
pub fn random_density_matrix<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    let mut z = || Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    let g = Matrix4c::from_fn(|_, _| z());
    let m = g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.unscale(tr)).expect("Ginibre product is a valid state")
}
