//! Unperturbed spectra, theta sequences, kick states and the point-mass
//! formulas of the rank-N kicked problem.

mod formulas;
mod spectrum;
mod state;

pub use formulas::{
    b_inverse_partial, circular_distance, cotangent_residual, gamma_window, point_mass,
    point_spectrum_condition, BInverse, BValue, PointSpectrumCondition, POLE_TOLERANCE,
};
pub use spectrum::{alpha_sequence, theta_sequence, BaseSpectrum, ThetaSequence, DEFAULT_PRECISION_BITS};
pub use state::{
    orthonormal_ensemble, power_law_state, KickEnsemble, KickState, Support, NORM_TOLERANCE,
    ORTHOGONALITY_TOLERANCE,
};
