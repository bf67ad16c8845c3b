//! Truncated Floquet operators, their eigen-decomposition and Wiener-average
//! dynamics.

mod dynamics;
mod eigen;
mod matrix;

pub use dynamics::{evolve, evolve_with, wiener_average, DynamicsTrace, WienerAverage};
pub use eigen::{eigen_decompose, DecompositionDiagnostics, EigenDecomposition, NORMALITY_TOLERANCE};
pub use matrix::{
    build_floquet, perturbation_trace_norm, trace_norm, unitarity_defect, Convention,
    FloquetMatrix, MAX_DIM, UNITARITY_TOLERANCE,
};
