use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use super::eigen::{eigen_decompose, EigenDecomposition};
use super::matrix::{state_fingerprint, FloquetMatrix};
use crate::error::{Error, Result};
use crate::spectral::{alpha_sequence, KickState};

/// Survival amplitudes and energies along `psi, V psi, V^2 psi, ...`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicsTrace {
    /// `c_n = <psi|V^n|psi>` for `n = 0..=n_kicks`.
    pub amplitudes: Vec<Complex64>,
    /// `<H_0>` after `n` kicks, `n = 0..=n_kicks`.
    pub energies: Vec<f64>,
    matrix_fingerprint: u64,
    state_fingerprint: u64,
}

impl DynamicsTrace {
    pub fn n_kicks(&self) -> usize {
        self.amplitudes.len() - 1
    }

    /// `|c_n|^2`.
    pub fn survival(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// `(1/n) sum_{m=1}^{n} |c_m|^2` for `n = 1..=n_kicks`.
    pub fn running_cesaro(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.amplitudes[1..]
            .iter()
            .enumerate()
            .map(|(i, c)| {
                acc += c.norm_sqr();
                acc / (i + 1) as f64
            })
            .collect()
    }
}

/// Iterates `V` on `state`, truncated and renormalized to `V`'s dimension.
///
/// Up to `dim` kicks the vector is pushed through `V` directly; longer runs
/// multiply eigenvector components by `exp(i n phi_i)` instead.
pub fn evolve(v: &FloquetMatrix, state: &KickState, n_kicks: usize) -> Result<DynamicsTrace> {
    if n_kicks == 0 {
        return Err(Error::Domain("n_kicks must be at least 1".into()));
    }
    if n_kicks > v.dim() {
        let d = eigen_decompose(v)?;
        return evolve_with(v, &d, state, n_kicks);
    }
    let state = state.truncated(v.dim())?;
    let alpha = alpha_sequence(v.spectrum(), v.dim())?;
    let psi = DVector::from_column_slice(state.coefficients());
    let mut amplitudes = Vec::with_capacity(n_kicks + 1);
    let mut energies = Vec::with_capacity(n_kicks + 1);
    let mut y = psi.clone();
    for n in 0..=n_kicks {
        if n > 0 {
            y = v.entries() * &y;
        }
        amplitudes.push(psi.dotc(&y));
        energies.push(energy(&alpha, y.as_slice()));
    }
    Ok(DynamicsTrace {
        amplitudes,
        energies,
        matrix_fingerprint: v.fingerprint(),
        state_fingerprint: state_fingerprint(state.coefficients()),
    })
}

/// Same as [`evolve`], always through the given eigen-decomposition of `v`.
pub fn evolve_with(
    v: &FloquetMatrix,
    d: &EigenDecomposition,
    state: &KickState,
    n_kicks: usize,
) -> Result<DynamicsTrace> {
    if d.matrix_fingerprint() != v.fingerprint() {
        return Err(Error::Provenance("decomposition is of a different matrix".into()));
    }
    let state = state.truncated(v.dim())?;
    let alpha = alpha_sequence(v.spectrum(), v.dim())?;
    let psi = DVector::from_column_slice(state.coefficients());
    let q = d.vectors();
    let coeffs = q.adjoint() * &psi;
    let phases = d.eigenphases();
    let mut amplitudes = Vec::with_capacity(n_kicks + 1);
    let mut energies = Vec::with_capacity(n_kicks + 1);
    for n in 0..=n_kicks {
        let z = DVector::from_iterator(
            coeffs.len(),
            coeffs
                .iter()
                .zip(phases)
                .map(|(c, &p)| c * Complex64::from_polar(1.0, n as f64 * p)),
        );
        let c_n: Complex64 = coeffs.iter().zip(z.iter()).map(|(a, b)| a.conj() * b).sum();
        amplitudes.push(c_n);
        let y = q * &z;
        energies.push(energy(&alpha, y.as_slice()));
    }
    Ok(DynamicsTrace {
        amplitudes,
        energies,
        matrix_fingerprint: v.fingerprint(),
        state_fingerprint: state_fingerprint(state.coefficients()),
    })
}

fn energy(alpha: &[f64], y: &[Complex64]) -> f64 {
    alpha.iter().zip(y).map(|(a, c)| a * c.norm_sqr()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WienerAverage {
    /// `(1/T) sum_{n=1}^{T} |c_n|^2`.
    pub cesaro_mean: f64,
    /// `sum_i w_{k,i}^2`.
    pub point_mass_sum: f64,
    pub t: usize,
}

/// Compares the time average of `|c_n|^2` with the squared point masses of
/// kick state `k`; both must come from the same `V` and `psi_k`.
pub fn wiener_average(
    trace: &DynamicsTrace,
    decomposition: &EigenDecomposition,
    k: usize,
) -> Result<WienerAverage> {
    if trace.matrix_fingerprint != decomposition.matrix_fingerprint() {
        return Err(Error::Provenance("trace and decomposition come from different matrices".into()));
    }
    match decomposition.state_fingerprint(k) {
        Some(f) if f == trace.state_fingerprint => {}
        Some(_) => {
            return Err(Error::Provenance(format!("trace was not started from kick state {k}")))
        }
        None => return Err(Error::Domain(format!("no kick state {k}"))),
    }
    let t = trace.n_kicks();
    Ok(WienerAverage {
        cesaro_mean: *trace.running_cesaro().last().expect("n_kicks >= 1"),
        point_mass_sum: decomposition.point_mass_sum(k)?,
        t,
    })
}
