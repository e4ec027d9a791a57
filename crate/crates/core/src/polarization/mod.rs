//! Two-qubit polarization state algebra.

pub mod jones;
pub mod matrix_io;
pub mod state;

pub use jones::{
    analyzer_projector, kron, linear_polarizer, waveplate, AnalyzerSetting, Arm, ArmSetting,
    JonesOperator, Matrix2c, Vector2c, WaveplateKind,
};
pub use state::{
    bell_state, densify, fidelity, hermitian_eigenvalues, hermitian_part, mix_white_noise, state_fidelity, validate_matrix, Basis, BellState, Densified,
    DensityMatrix, Matrix4c, StateVector, Vector4c,
};
