//! Extreme discrepancy of finite point sets in `[0, 1)`.
//!
//! Both the closed form and the quadratic oracle work on the same exact
//! fixed-point image of the input (`x * 2^100`, an `i128`), so they compare
//! candidate intervals without rounding and return bit-identical values.

use rayon::prelude::*;
use serde::Serialize;

use super::rational::RationalApprox;
use super::type_estimate::{irrational_type_estimate, least_squares_slope};
use super::weyl::{exponential_sum, sequence_points, SequenceSpec};
use crate::error::{Error, Result};

const FIXED_BITS: u32 = 100;
const FIXED_ONE: i128 = 1 << FIXED_BITS;
/// `N * 2^100` must stay below `2^127`.
pub const MAX_POINTS: usize = 1 << 26;
pub const ORACLE_MAX_POINTS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    pub n_points: usize,
    pub d_n: f64,
    pub et_bound: Option<f64>,
    pub m_used: Option<u32>,
}

fn to_fixed(points: &[f64]) -> Result<Vec<i128>> {
    if points.len() > MAX_POINTS {
        return Err(Error::Size(format!(
            "{} points exceeds the limit of {MAX_POINTS}",
            points.len()
        )));
    }
    points
        .iter()
        .map(|&x| {
            if !(0.0..1.0).contains(&x) {
                return Err(Error::Domain(format!("point {x} outside [0, 1)")));
            }
            // Exact unless x < 2^-47 carries more than 100 fractional bits.
            Ok((x * FIXED_ONE as f64) as i128)
        })
        .collect()
}

/// Maps a scaled deviation `v = N * 2^100 * D` back to `D`.
fn scaled_to_f64(v: i128, n: usize) -> f64 {
    v as f64 / n as f64 / FIXED_ONE as f64
}

/// Extreme discrepancy `sup_{[a,b)} |A([a,b), N)/N - (b - a)|`.
///
/// Uses `D_N = 1/N + max_i (i/N - x_(i)) - min_i (i/N - x_(i))` over the
/// order statistics; `O(N log N)`.
pub fn discrepancy_exact(points: &[f64]) -> Result<DiscrepancyReport> {
    if points.is_empty() {
        return Err(Error::Domain("empty point list".into()));
    }
    let mut fixed = to_fixed(points)?;
    fixed.sort_unstable();
    let n = fixed.len() as i128;
    let (mut hi, mut lo) = (i128::MIN, i128::MAX);
    for (i, &x) in fixed.iter().enumerate() {
        let d = (i as i128 + 1) * FIXED_ONE - n * x;
        hi = hi.max(d);
        lo = lo.min(d);
    }
    Ok(DiscrepancyReport {
        n_points: points.len(),
        d_n: scaled_to_f64(FIXED_ONE + hi - lo, points.len()),
        et_bound: None,
        m_used: None,
    })
}

/// Same quantity by exhaustive search over intervals whose endpoints are
/// sample points or `{0, 1}`, including one-sided limits at each endpoint.
pub fn discrepancy_oracle(points: &[f64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Domain("empty point list".into()));
    }
    if points.len() > ORACLE_MAX_POINTS {
        return Err(Error::Size(format!(
            "oracle is quadratic; {} points exceeds {ORACLE_MAX_POINTS}",
            points.len()
        )));
    }
    let fixed = to_fixed(points)?;
    let n = fixed.len() as i128;

    let mut ends: Vec<i128> = fixed.clone();
    ends.push(0);
    ends.push(FIXED_ONE);
    ends.sort_unstable();
    ends.dedup();
    // below[e] = #{x < e}, upto[e] = #{x <= e}, by direct counting.
    let below: Vec<i128> = ends
        .iter()
        .map(|&e| fixed.iter().filter(|&&x| x < e).count() as i128)
        .collect();
    let upto: Vec<i128> = ends
        .iter()
        .map(|&e| fixed.iter().filter(|&&x| x <= e).count() as i128)
        .collect();

    let mut best = 0i128;
    for a in 0..ends.len() {
        for b in a..ends.len() {
            let len = n * (ends[b] - ends[a]);
            // [a,b), [a,b], (a,b), (a,b] as limits of half-open intervals.
            let counts = [
                below[b] - below[a],
                upto[b] - below[a],
                below[b] - upto[a],
                upto[b] - upto[a],
            ];
            for c in counts {
                if c < 0 {
                    continue;
                }
                best = best.max((c * FIXED_ONE - len).abs());
            }
        }
    }
    Ok(scaled_to_f64(best, points.len()))
}

/// Erdős–Turán upper bound with explicit constants,
/// `6/(m+1) + (4/pi) sum_{h<=m} (1/h) |sum_n exp(2 pi i h x_n)| / N`.
pub fn erdos_turan_bound(points: &[f64], m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("m must be at least 1".into()));
    }
    if points.is_empty() {
        return Err(Error::Domain("empty point list".into()));
    }
    let n = points.len() as f64;
    let terms: Vec<f64> = (1..=m)
        .into_par_iter()
        .map(|h| {
            let phases: Vec<f64> = points.iter().map(|&x| (h as f64 * x).fract()).collect();
            exponential_sum(&phases).norm() / (h as f64 * n)
        })
        .collect();
    let weyl: f64 = terms.iter().sum();
    Ok(6.0 / (m as f64 + 1.0) + 4.0 / std::f64::consts::PI * weyl)
}

/// Exact discrepancy together with the Erdős–Turán bound for `m`.
pub fn discrepancy_report(points: &[f64], m: u32) -> Result<DiscrepancyReport> {
    let mut r = discrepancy_exact(points)?;
    r.et_bound = Some(erdos_turan_bound(points, m)?);
    r.m_used = Some(m);
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    /// Least-squares slope of `ln D_N` against `ln N`.
    pub slope: f64,
    pub intercept: f64,
    pub table: Vec<(u64, f64)>,
    /// Type estimate of beta, when its precision allows one.
    pub eta_hat: Option<f64>,
    /// `-1/(eta_hat j)`, the exponent of the conjectured upper bound.
    pub predicted_exponent: Option<f64>,
}

/// Search bound for the type estimate attached to scaling fits.
pub const TYPE_ESTIMATE_Q_MAX: u64 = 10_000;

/// Fits `D_N ~ N^slope` for the sequence over a grid of sizes.
pub fn discrepancy_scaling_fit(spec: &SequenceSpec, n_grid: &[u64]) -> Result<ScalingFit> {
    if n_grid.len() < 4 {
        return Err(Error::Domain("need at least 4 grid sizes".into()));
    }
    let lo = *n_grid.iter().min().expect("nonempty");
    let hi = *n_grid.iter().max().expect("nonempty");
    if lo == 0 || (hi as f64) < 100.0 * lo as f64 {
        return Err(Error::Domain("grid must span at least two decades".into()));
    }
    let points = sequence_points(spec, hi)?;
    let table = n_grid
        .par_iter()
        .map(|&n| discrepancy_exact(&points[..n as usize]).map(|r| (n, r.d_n)))
        .collect::<Result<Vec<_>>>()?;
    let logs: Vec<(f64, f64)> = table
        .iter()
        .map(|&(n, d)| ((n as f64).ln(), d.ln()))
        .collect();
    let slope = least_squares_slope(&logs);
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / logs.len() as f64;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / logs.len() as f64;
    let eta_hat = type_of(&spec.beta);
    Ok(ScalingFit {
        slope,
        intercept: my - slope * mx,
        table,
        eta_hat,
        predicted_exponent: eta_hat.map(|eta| -1.0 / (eta * spec.j as f64)),
    })
}

fn type_of(beta: &RationalApprox) -> Option<f64> {
    irrational_type_estimate(beta, TYPE_ESTIMATE_Q_MAX)
        .ok()
        .map(|t| t.eta_hat)
}
