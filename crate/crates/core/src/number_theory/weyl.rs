use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;

use super::rational::{mod_positive, unit_fraction_to_f64, RationalApprox};
use crate::error::{Error, Result};

/// The sequence `(n^j beta)` reduced mod 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSpec {
    pub j: u32,
    pub beta: RationalApprox,
    pub label: String,
}

impl SequenceSpec {
    pub fn new(j: u32, beta: RationalApprox, label: impl Into<String>) -> Result<Self> {
        if j == 0 {
            return Err(Error::Domain("power j must be at least 1".into()));
        }
        Ok(Self {
            j,
            beta,
            label: label.into(),
        })
    }
}

/// `{h n^j beta}` for `n = 1..=n_terms`, reduced exactly before rounding.
pub(crate) fn reduced_phases(spec: &SequenceSpec, h: u64, n_terms: u64) -> Vec<f64> {
    let q: BigUint = spec.beta.denominator().magnitude().clone();
    let p = mod_positive(&(spec.beta.numerator() * BigInt::from(h)), &q);
    if p.is_zero() {
        return vec![0.0; n_terms as usize];
    }
    let j = spec.j;
    (1..=n_terms)
        .into_par_iter()
        .map(|n| {
            let r = match pow_u128(n, j) {
                Some(nj) => (&p * BigUint::from(nj)) % &q,
                None => (&p * BigUint::from(n).pow(j)) % &q,
            };
            unit_fraction_to_f64(&r, &q)
        })
        .collect()
}

fn pow_u128(n: u64, j: u32) -> Option<u128> {
    (n as u128).checked_pow(j)
}

/// Points `{n^j beta}`, `n = 1..=n_terms`, each rounded once from the exact
/// residue. The output does not depend on thread scheduling.
pub fn sequence_points(spec: &SequenceSpec, n_terms: u64) -> Result<Vec<f64>> {
    if n_terms == 0 {
        return Err(Error::Domain("n_terms must be at least 1".into()));
    }
    Ok(reduced_phases(spec, 1, n_terms))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylSum {
    pub value: Complex64,
    pub modulus: f64,
}

/// `S = sum_{n=1}^{N} exp(2 pi i h n^j beta)`.
pub fn weyl_sum(spec: &SequenceSpec, h: u64, n_terms: u64) -> Result<WeylSum> {
    if n_terms == 0 {
        return Err(Error::Domain("n_terms must be at least 1".into()));
    }
    if h == 0 {
        return Err(Error::Domain("h must be positive".into()));
    }
    let phases = reduced_phases(spec, h, n_terms);
    let value = exponential_sum(&phases);
    Ok(WeylSum {
        value,
        modulus: value.norm(),
    })
}

/// `sum exp(2 pi i x)` over already-reduced phases, summed in input order.
pub(crate) fn exponential_sum(phases: &[f64]) -> Complex64 {
    let mut acc = Complex64::zero();
    for &x in phases {
        let (s, c) = (std::f64::consts::TAU * x).sin_cos();
        acc += Complex64::new(c, s);
    }
    acc
}

/// Vinogradov-type exponent `rho' = 1 / (3 (j-1)^2 ln(12 j (j-1)))`.
pub fn classical_exponent(j: u32) -> Result<f64> {
    if j < 2 {
        return Err(Error::Domain("classical exponent needs j >= 2".into()));
    }
    let jf = j as f64;
    Ok(1.0 / (3.0 * (jf - 1.0).powi(2) * (12.0 * jf * (jf - 1.0)).ln()))
}

/// Conjectured exponent `1 - 1/j + epsilon` of `|S|`.
pub fn conjectured_exponent(j: u32, epsilon: f64) -> Result<f64> {
    if j == 0 {
        return Err(Error::Domain("j must be at least 1".into()));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::Domain("epsilon must be non-negative".into()));
    }
    Ok(1.0 - 1.0 / j as f64 + epsilon)
}
