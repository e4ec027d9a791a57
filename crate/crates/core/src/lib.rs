//! Simulation and characterization of an electrically pumped, on-chip
//! polarization-entangled photon-pair source.
//!
//! The pipeline mirrors the device: a DFB pump, an MMI splitter feeding two
//! PPLN waveguides, and a polarization rotator-combiner that merges the two
//! type-0 SPDC outputs into `α|HH⟩ + βe^{iφ}|VV⟩`. On top of the component
//! models sit the characterization tools used on the real device:
//! coincidence counting, brightness and visibility estimators, and
//! maximum-likelihood state tomography.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chip;
pub mod counting;
pub mod error;
pub mod phase_matching;
pub mod polarization;
pub mod scenario;
pub mod tomography;

pub use error::{Error, Result};
pub use polarization::{bell_state, fidelity, AnalyzerSetting, BellState, DensityMatrix, StateVector};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
