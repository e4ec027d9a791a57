//! Two-qubit polarization states in the fixed (HH, HV, VH, VV) basis.
//!
//! The first factor is always the signal photon and the second the idler, so
//! basis index `2 * s + i` addresses `|s⟩ ⊗ |i⟩` with `H = 0`, `V = 1`.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Matrix4c = Matrix4<Complex64>;
pub type Vector4c = Vector4<Complex64>;

/// Tolerance on `max |ρ - ρ†|`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on `|Tr ρ - 1|`.
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest eigenvalue a valid density matrix may have.
pub const PSD_TOL: f64 = -1e-9;
/// Tolerance on `|‖ψ‖² - 1|` for a state vector to count as normalized.
pub const NORM_TOL: f64 = 1e-12;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Product basis states, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    HH = 0,
    HV = 1,
    VH = 2,
    VV = 3,
}

impl Basis {
    pub const ALL: [Basis; 4] = [Basis::HH, Basis::HV, Basis::VH, Basis::VV];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Four complex amplitudes ordered (HH, HV, VH, VV).
///
/// A `StateVector` may hold unnormalized amplitudes (the chip model builds
/// them that way); use [`StateVector::normalized`] before treating it as a
/// physical state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector(Vector4c);

impl StateVector {
    pub fn new(amplitudes: [Complex64; 4]) -> Self {
        StateVector(Vector4c::from(amplitudes))
    }

    pub fn from_real(amplitudes: [f64; 4]) -> Self {
        Self::new(amplitudes.map(|a| Complex64::new(a, 0.0)))
    }

    pub fn from_vector(v: Vector4c) -> Self {
        StateVector(v)
    }

    pub fn amplitudes(&self) -> [Complex64; 4] {
        [self.0[0], self.0[1], self.0[2], self.0[3]]
    }

    pub fn amplitude(&self, basis: Basis) -> Complex64 {
        self.0[basis.index()]
    }

    pub fn as_vector(&self) -> &Vector4c {
        &self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    /// Returns the state scaled to unit norm.
    pub fn normalized(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if !(n2 > 0.0) || !n2.is_finite() {
            return Err(Error::DegenerateState);
        }
        Ok(StateVector(self.0.unscale(n2.sqrt())))
    }

    /// Multiplies every amplitude by `e^{iχ}`.
    pub fn with_global_phase(&self, chi: f64) -> Self {
        StateVector(self.0 * Complex64::from_polar(1.0, chi))
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.0.dotc(&other.0)
    }
}

/// The four maximally entangled polarization states.
///
/// `PhiPlus` is `(|HH⟩ + |VV⟩)/√2`, the target state of the source. Some
/// device literature writes this state as Ψ⁺; this crate always uses the
/// conventional Φ⁺ name for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

pub fn bell_state(kind: BellState) -> StateVector {
    let h = FRAC_1_SQRT_2;
    match kind {
        BellState::PhiPlus => StateVector::from_real([h, 0.0, 0.0, h]),
        BellState::PhiMinus => StateVector::from_real([h, 0.0, 0.0, -h]),
        BellState::PsiPlus => StateVector::from_real([0.0, h, h, 0.0]),
        BellState::PsiMinus => StateVector::from_real([0.0, h, -h, 0.0]),
    }
}

/// A validated 4×4 two-qubit density matrix: Hermitian, unit trace, PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Matrix4c);

impl DensityMatrix {
    /// Validates `m` and wraps it.
    pub fn new(m: Matrix4c) -> Result<Self> {
        validate_matrix(&m)?;
        Ok(DensityMatrix(m))
    }

    /// Wraps a matrix the caller has constructed to be valid (for example
    /// `T†T / Tr(T†T)`). The Hermitian part is taken to remove rounding
    /// asymmetry.
    pub(crate) fn from_constructed(m: Matrix4c) -> Self {
        DensityMatrix(hermitian_part(&m))
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Matrix4c::identity().scale(0.25))
    }

    /// Werner state `v·|Φ⁺⟩⟨Φ⁺| + (1 − v)·I/4`.
    pub fn werner(v: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::param("v", format!("Werner weight {v} outside [0, 1]")));
        }
        let phi = densify(&bell_state(BellState::PhiPlus))?.rho;
        mix_white_noise(&phi, 1.0 - v)
    }

    pub fn matrix(&self) -> &Matrix4c {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix4c {
        self.0
    }

    pub fn entry(&self, row: Basis, col: Basis) -> Complex64 {
        self.0[(row.index(), col.index())]
    }

    pub fn validate(&self) -> Result<()> {
        validate_matrix(&self.0)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// `Tr(ρ²)`
    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    /// Diagonal entries in (HH, HV, VH, VV) order.
    pub fn populations(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|i| self.0[(i, i)].re)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        hermitian_eigenvalues(&self.0)
    }

    /// `Re Tr(ρ · op)` for a Hermitian operator.
    pub fn expectation(&self, op: &Matrix4c) -> f64 {
        (self.0 * op).trace().re
    }

    pub fn real_part(&self) -> [[f64; 4]; 4] {
        std::array::from_fn(|r| std::array::from_fn(|c| self.0[(r, c)].re))
    }

    pub fn imag_part(&self) -> [[f64; 4]; 4] {
        std::array::from_fn(|r| std::array::from_fn(|c| self.0[(r, c)].im))
    }
}

/// Checks the three density-matrix invariants on a raw matrix.
pub fn validate_matrix(m: &Matrix4c) -> Result<()> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Validation("non-finite entry".into()));
    }
    let asym = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if asym >= HERMITIAN_TOL {
        return Err(Error::Validation(format!(
            "not Hermitian: max|ρ − ρ†| = {asym:e}"
        )));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::Validation(format!("trace {tr} is not 1")));
    }
    let min_eig = hermitian_eigenvalues(m)[0];
    if min_eig < PSD_TOL {
        return Err(Error::Validation(format!(
            "not positive semidefinite: smallest eigenvalue {min_eig:e}"
        )));
    }
    Ok(())
}

/// `(m + m†) / 2`
pub fn hermitian_part(m: &Matrix4c) -> Matrix4c {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &Matrix4c) -> [f64; 4] {
    let eig = hermitian_part(m).symmetric_eigenvalues();
    let mut vals = [eig[0], eig[1], eig[2], eig[3]];
    vals.sort_by(f64::total_cmp);
    vals
}

/// Output of [`densify`].
#[derive(Debug, Clone, PartialEq)]
pub struct Densified {
    pub rho: DensityMatrix,
    /// Set when the input was not normalized and had to be rescaled.
    pub renormalized: bool,
}

/// `ρ = |ψ⟩⟨ψ|`, normalizing `ψ` first if needed.
pub fn densify(psi: &StateVector) -> Result<Densified> {
    let renormalized = !psi.is_normalized();
    let psi = if renormalized { psi.normalized()? } else { *psi };
    let v = psi.as_vector();
    let rho = DensityMatrix::from_constructed(v * v.adjoint());
    Ok(Densified { rho, renormalized })
}

/// `(1 − p)·ρ + p·I/4`
pub fn mix_white_noise(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param("p", format!("noise fraction {p} outside [0, 1]")));
    }
    let mixed = rho.matrix().scale(1.0 - p) + Matrix4c::identity().scale(p / 4.0);
    Ok(DensityMatrix::from_constructed(mixed))
}

/// `⟨target|ρ|target⟩`, clamped to [0, 1] against rounding.
pub fn fidelity(rho: &DensityMatrix, target: &StateVector) -> Result<f64> {
    rho.validate()?;
    if !target.is_normalized() {
        return Err(Error::param(
            "target",
            format!("state has squared norm {}", target.norm_sqr()),
        ));
    }
    let v = target.as_vector();
    let f = (v.adjoint() * rho.matrix() * v)[(0, 0)];
    Ok(f.re.clamp(0.0, 1.0))
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²` between two mixed states.
pub fn state_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    rho.validate()?;
    sigma.validate()?;
    let eig = hermitian_part(rho.matrix()).symmetric_eigen();
    let roots = eig.eigenvalues.map(|l| Complex64::from(l.max(0.0).sqrt()));
    let sqrt_rho = eig.eigenvectors * Matrix4::from_diagonal(&roots) * eig.eigenvectors.adjoint();
    let inner = sqrt_rho * sigma.matrix() * sqrt_rho;
    let trace: f64 = hermitian_eigenvalues(&inner).iter().map(|l| l.max(0.0).sqrt()).sum();
    Ok((trace * trace).clamp(0.0, 1.0))
}
