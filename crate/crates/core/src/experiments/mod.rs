//! Counting experiments: points in shrinking intervals, the sets `S(x)`,
//! lower bounds on `B^{-1}(x)`, and sweeps over `x`, `gamma` and `N`.

mod counting;
mod sweep;

pub use counting::{
    b_lower_bounds, count_interval, count_set_S, count_set_s_bourget, inequality_check,
    make_interval, BLowerBounds, CountReport, IntervalJ, Variant, DEFAULT_DELTA,
};
pub use sweep::{
    default_x_grid, divergence_scan, gamma_sweep, growth_label, GammaSweep, GrowthLabel,
    ScanOptions, SeriesLabel, SweepCell, SweepResult,
};
