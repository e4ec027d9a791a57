//! Single-photon Jones calculus for the analyzer optics.
//!
//! Retarders follow `R(θ) = Rot(−θ)·diag(1, e^{iΓ})·Rot(θ)` with
//! `Rot(θ) = [[cos θ, −sin θ], [sin θ, cos θ]]` and the global phase dropped.
//! Under this convention a quarter-wave plate at π/4 turns `H` into
//! `(H + iV)/√2`, and a half-wave plate at θ turns `H` into linear
//! polarization at angle `−2θ`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::Mul;

use nalgebra::{Matrix2, Matrix4, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::Matrix4c;

pub type Matrix2c = Matrix2<Complex64>;
pub type Vector2c = Vector2<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// A 2×2 complex operator on the (H, V) field amplitudes of one photon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesOperator(Matrix2c);

impl JonesOperator {
    pub fn new(m: Matrix2c) -> Self {
        JonesOperator(m)
    }

    pub fn identity() -> Self {
        JonesOperator(Matrix2c::identity())
    }

    pub fn matrix(&self) -> &Matrix2c {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        JonesOperator(self.0.adjoint())
    }

    pub fn apply(&self, field: &Vector2c) -> Vector2c {
        self.0 * field
    }

    /// `max |U·U† − I|`
    pub fn unitarity_error(&self) -> f64 {
        max_abs(&(self.0 * self.0.adjoint() - Matrix2c::identity()))
    }

    /// `max |P² − P|`
    pub fn idempotency_error(&self) -> f64 {
        max_abs(&(self.0 * self.0 - self.0))
    }
}

impl Mul for JonesOperator {
    type Output = JonesOperator;

    fn mul(self, rhs: JonesOperator) -> JonesOperator {
        JonesOperator(self.0 * rhs.0)
    }
}

fn max_abs(m: &Matrix2c) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WaveplateKind {
    Half,
    Quarter,
}

impl WaveplateKind {
    pub fn retardance(self) -> f64 {
        match self {
            WaveplateKind::Half => PI,
            WaveplateKind::Quarter => FRAC_PI_2,
        }
    }
}

/// Counter-clockwise rotation matrix.
pub fn rotation(theta: f64) -> Matrix2c {
    let (s, co) = theta.sin_cos();
    Matrix2c::new(c(co), c(-s), c(s), c(co))
}

pub fn waveplate(kind: WaveplateKind, theta: f64) -> JonesOperator {
    let retard = Matrix2c::new(
        c(1.0),
        c(0.0),
        c(0.0),
        Complex64::from_polar(1.0, kind.retardance()),
    );
    JonesOperator(rotation(-theta) * retard * rotation(theta))
}

/// Ideal linear polarizer transmitting `(cos θ, sin θ)`.
pub fn linear_polarizer(theta: f64) -> JonesOperator {
    let (s, co) = theta.sin_cos();
    let v = Vector2c::new(c(co), c(s));
    JonesOperator(v * v.adjoint())
}

/// Wraps an angle into [0, π). Waveplates and polarizers are invariant under
/// a rotation by π.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(PI);
    if w >= PI {
        0.0
    } else {
        w
    }
}

/// Analyzer optics in one arm: optional QWP, then optional HWP, then a
/// linear polarizer. `None` means the plate is removed from the beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmSetting {
    pub qwp: Option<f64>,
    pub hwp: Option<f64>,
    pub polarizer: f64,
}

impl ArmSetting {
    pub fn new(qwp: Option<f64>, hwp: Option<f64>, polarizer: f64) -> Self {
        ArmSetting {
            qwp: qwp.map(wrap_angle),
            hwp: hwp.map(wrap_angle),
            polarizer: wrap_angle(polarizer),
        }
    }

    /// Bare polarizer at `theta`.
    pub fn polarizer(theta: f64) -> Self {
        Self::new(None, None, theta)
    }

    /// Waveplate chain `W = HWP · QWP`.
    pub fn waveplates(&self) -> JonesOperator {
        let q = self
            .qwp
            .map_or_else(JonesOperator::identity, |t| waveplate(WaveplateKind::Quarter, t));
        let h = self
            .hwp
            .map_or_else(JonesOperator::identity, |t| waveplate(WaveplateKind::Half, t));
        h * q
    }

    /// `P = W† Π_pol W`
    pub fn projector(&self) -> JonesOperator {
        let w = self.waveplates();
        w.adjoint() * linear_polarizer(self.polarizer) * w
    }

    /// The single-photon state this arm projects onto, `W†|pol⟩`.
    pub fn analyzed_state(&self) -> Vector2c {
        let (s, co) = self.polarizer.sin_cos();
        self.waveplates().adjoint().apply(&Vector2c::new(c(co), c(s)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Arm {
    Signal,
    Idler,
}

/// Analyzer configuration for both photons of a pair. `None` in an arm
/// means no analyzer in that arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyzerSetting {
    pub signal: Option<ArmSetting>,
    pub idler: Option<ArmSetting>,
}

impl AnalyzerSetting {
    pub fn new(signal: ArmSetting, idler: ArmSetting) -> Self {
        AnalyzerSetting {
            signal: Some(signal),
            idler: Some(idler),
        }
    }

    /// Both analyzers removed.
    pub fn open() -> Self {
        AnalyzerSetting {
            signal: None,
            idler: None,
        }
    }

    /// Bare polarizers at the given angles.
    pub fn polarizers(signal: f64, idler: f64) -> Self {
        Self::new(ArmSetting::polarizer(signal), ArmSetting::polarizer(idler))
    }

    pub fn arm(&self, arm: Arm) -> Option<&ArmSetting> {
        match arm {
            Arm::Signal => self.signal.as_ref(),
            Arm::Idler => self.idler.as_ref(),
        }
    }

    /// Two-photon projector `Π_s ⊗ Π_i` in (HH, HV, VH, VV) order.
    pub fn two_photon_projector(&self) -> Matrix4c {
        let ps = analyzer_projector(self, Arm::Signal);
        let pi = analyzer_projector(self, Arm::Idler);
        kron(ps.matrix(), pi.matrix())
    }
}

pub fn analyzer_projector(setting: &AnalyzerSetting, arm: Arm) -> JonesOperator {
    setting
        .arm(arm)
        .map_or_else(JonesOperator::identity, ArmSetting::projector)
}

/// Kronecker product `a ⊗ b` with `a` acting on the signal photon.
pub fn kron(a: &Matrix2c, b: &Matrix2c) -> Matrix4c {
    Matrix4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}
