//! Fractional parts, continued fractions, irrationality type, Weyl sums and
//! extreme discrepancy of `(n^j beta)` sequences.

mod discrepancy;
mod rational;
mod type_estimate;
mod weyl;

pub use discrepancy::{
    discrepancy_exact, discrepancy_oracle, discrepancy_report, discrepancy_scaling_fit,
    erdos_turan_bound, DiscrepancyReport, ScalingFit, MAX_POINTS, ORACLE_MAX_POINTS,
    TYPE_ESTIMATE_Q_MAX,
};
pub use rational::{
    constants, continued_fraction, continued_fraction_f64, fractional_part,
    nearest_integer_distance, ContinuedFraction, RationalApprox,
};
pub(crate) use rational::{mod_positive, unit_fraction_to_f64};
pub(crate) use type_estimate::least_squares_slope;
pub use type_estimate::{irrational_type_estimate, TypeEstimate};
pub use weyl::{
    classical_exponent, conjectured_exponent, sequence_points, weyl_sum, SequenceSpec, WeylSum,
};
