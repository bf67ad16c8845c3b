use std::f64::consts::TAU;

use serde::Serialize;

use super::spectrum::ThetaSequence;
use super::state::{KickEnsemble, KickState};
use crate::error::{Error, Result};

/// Circular distances below this count as hitting a pole.
pub const POLE_TOLERANCE: f64 = 16.0 * f64::EPSILON;

/// Distance between two angles on the circle, in `[0, pi]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs() % TAU;
    d.min(TAU - d)
}

/// A partial sum of `B^{-1}(x)`, or the index of the unperturbed phase it
/// runs into.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BInverse {
    Finite(f64),
    Pole { index: usize },
}

impl BInverse {
    pub fn is_finite(&self) -> bool {
        matches!(self, BInverse::Finite(_))
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            BInverse::Finite(v) => Some(v),
            BInverse::Pole { .. } => None,
        }
    }
}

/// `B(x)` as fed to [`point_mass`]; `InverseDiverges` stands for `B^{-1} = inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BValue {
    Value(f64),
    InverseDiverges,
}

impl From<BInverse> for BValue {
    fn from(b: BInverse) -> Self {
        match b {
            BInverse::Finite(v) => BValue::Value(v.recip()),
            BInverse::Pole { .. } => BValue::InverseDiverges,
        }
    }
}

fn check_lengths(state: &KickState, theta: &ThetaSequence, n_terms: usize) -> Result<()> {
    if n_terms > state.dim() || n_terms > theta.len() {
        return Err(Error::Size(format!(
            "n_terms = {n_terms} exceeds state dim {} or theta length {}",
            state.dim(),
            theta.len()
        )));
    }
    Ok(())
}

/// `sum_{n < n_terms} |a_n|^2 / sin^2((x - theta_n) / 2)`, summed in index order.
pub fn b_inverse_partial(
    x: f64,
    state: &KickState,
    theta: &ThetaSequence,
    n_terms: usize,
) -> Result<BInverse> {
    check_lengths(state, theta, n_terms)?;
    let th = theta.values();
    let mut acc = 0.0;
    for &n in state.support().iter().take_while(|&&n| n < n_terms) {
        let d = circular_distance(x, th[n]);
        if d <= POLE_TOLERANCE {
            return Ok(BInverse::Pole { index: n });
        }
        acc += state.weight(n) / (d / 2.0).sin().powi(2);
    }
    Ok(BInverse::Finite(acc))
}

/// Mass `B(x) / sin^2(lambda / 2 hbar)` of the point `e^{ix}`.
pub fn point_mass(lambda_over_hbar: f64, b: BValue) -> Result<f64> {
    let s = (lambda_over_hbar / 2.0).sin();
    if !lambda_over_hbar.is_finite() || s.abs() <= 1e-12 {
        return Err(Error::TrivialPerturbation(lambda_over_hbar));
    }
    match b {
        BValue::InverseDiverges => Ok(0.0),
        BValue::Value(v) if v >= 0.0 => Ok(v / (s * s)),
        BValue::Value(v) => Err(Error::Domain(format!("B(x) = {v} is negative"))),
    }
}

/// `sum_n |a_n|^2 cot((x - theta_n) / 2) - cot(lambda / 2 hbar)` over the
/// state's support; its zeros are the eigenphases of the rank-one problem
/// whose unperturbed eigenphases are `theta`.
pub fn cotangent_residual(
    x: f64,
    state: &KickState,
    theta: &ThetaSequence,
    lambda_over_hbar: f64,
) -> Result<f64> {
    check_lengths(state, theta, state.dim())?;
    let s = (lambda_over_hbar / 2.0).sin();
    if !lambda_over_hbar.is_finite() || s.abs() <= 1e-12 {
        return Err(Error::TrivialPerturbation(lambda_over_hbar));
    }
    let th = theta.values();
    let mut acc = 0.0;
    for &n in state.support() {
        if circular_distance(x, th[n]) <= POLE_TOLERANCE {
            return Err(Error::Pole { index: n });
        }
        let u = (x - th[n]) / 2.0;
        acc += state.weight(n) * u.cos() / u.sin();
    }
    Ok(acc - (lambda_over_hbar / 2.0).cos() / s)
}

/// The open window `(1/2, 1/2 + 1/(2 eta j))` of power-law exponents.
pub fn gamma_window(j: u32, eta: f64) -> Result<(f64, f64)> {
    if j == 0 {
        return Err(Error::Domain("j must be at least 1".into()));
    }
    if !(eta >= 1.0 && eta.is_finite()) {
        return Err(Error::Domain(format!("type eta = {eta} must be >= 1")));
    }
    Ok((0.5, 0.5 + 1.0 / (2.0 * eta * j as f64)))
}

/// Per-state partial sums `B_k^{-1}(x)` and their product.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSpectrumCondition {
    pub per_state: Vec<BInverse>,
    /// `prod_k B_k^{-1}(x)`, `None` if some factor diverges.
    pub product: Option<f64>,
    pub all_finite: bool,
}

pub fn point_spectrum_condition(
    x: f64,
    ensemble: &KickEnsemble,
    theta: &ThetaSequence,
    n_terms: usize,
) -> Result<PointSpectrumCondition> {
    let per_state = ensemble
        .states()
        .iter()
        .map(|s| b_inverse_partial(x, s, theta, n_terms))
        .collect::<Result<Vec<_>>>()?;
    let all_finite = per_state.iter().all(BInverse::is_finite);
    let product = all_finite.then(|| per_state.iter().filter_map(BInverse::value).product());
    Ok(PointSpectrumCondition {
        per_state,
        product,
        all_finite,
    })
}
