use nalgebra::{DVector, SVD};
use num_complex::Complex64;

use super::{TomographyData, TomographySettingSet};
use crate::error::{Error, Result};
use crate::polarization::{hermitian_part, kron, DensityMatrix, Matrix2c, Matrix4c};

/// `σ_a ⊗ σ_b` for `a, b ∈ {I, X, Y, Z}`, index `4a + b`.
pub fn pauli_basis() -> [Matrix4c; 16] {
    let o = Complex64::new(0.0, 0.0);
    let l = Complex64::new(1.0, 0.0);
    let i = Complex64::i();
    let single = [
        Matrix2c::new(l, o, o, l),
        Matrix2c::new(o, l, l, o),
        Matrix2c::new(o, -i, i, o),
        Matrix2c::new(l, o, o, -l),
    ];
    std::array::from_fn(|k| kron(&single[k / 4], &single[k % 4]))
}

/// Unconstrained least-squares estimate: Hermitian with unit trace, but
/// not necessarily positive semidefinite.
pub fn linear_inversion(data: &TomographyData, settings: &TomographySettingSet) -> Result<Matrix4c> {
    if data.len() != settings.len() {
        return Err(Error::param(
            "data",
            format!("{} counts for {} settings", data.len(), settings.len()),
        ));
    }
    let m = settings.design_matrix();
    let svd = SVD::new(m, true, true);
    let rank = svd.rank(1e-10);
    if rank < 16 {
        return Err(Error::SingularDesign(format!("design matrix rank {rank} < 16")));
    }
    let rates = DVector::from_iterator(data.len(), data.counts.iter().zip(&data.exposure_s).map(|(c, t)| c / t));
    let x = svd.solve(&rates, 1e-12).map_err(|e| Error::SingularDesign(e.to_string()))?;
    if !(x[0] > 0.0) {
        return Err(Error::NoData);
    }
    let basis = pauli_basis();
    let rho = basis
        .iter()
        .zip(x.iter())
        .fold(Matrix4c::zeros(), |acc, (s, &c)| acc + s.scale(c / (4.0 * x[0])));
    Ok(hermitian_part(&rho))
}

/// Nearest density matrix by eigenvalue clipping at zero and renormalizing.
pub fn psd_projection(m: &Matrix4c) -> Result<DensityMatrix> {
    let eig = hermitian_part(m).symmetric_eigen();
    let clipped = eig.eigenvalues.map(|v| v.max(0.0));
    let sum = clipped.sum();
    if !(sum > 0.0) {
        return Err(Error::NoData);
    }
    let d = Matrix4c::from_diagonal(&clipped.map(|v| Complex64::new(v / sum, 0.0)));
    let v = &eig.eigenvectors;
    DensityMatrix::new(hermitian_part(&(v * d * v.adjoint())))
}
