use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::number_theory::{
    constants, mod_positive, unit_fraction_to_f64, RationalApprox, SequenceSpec,
};

pub const DEFAULT_PRECISION_BITS: u32 = 256;

/// Unperturbed eigenvalues `alpha_n = hbar * sum_j beta_j n^j`, together with
/// the kick period that turns them into phases.
///
/// Besides the plain coefficients `beta_j`, the spectrum stores the exact
/// "turns" `t_j = beta_j T / (2 pi)`, so that
/// `alpha_n T / (2 pi hbar) = sum_j t_j n^j` can be reduced mod 1 exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseSpectrum {
    beta: Vec<RationalApprox>,
    turns: Vec<RationalApprox>,
    hbar: f64,
    period: f64,
}

fn check_scalars(hbar: f64, period: f64) -> Result<()> {
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::Domain(format!("hbar must be positive, got {hbar}")));
    }
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::Domain(format!("period must be positive, got {period}")));
    }
    Ok(())
}

fn check_coefficients(c: &[RationalApprox]) -> Result<()> {
    if c.len() < 2 {
        return Err(Error::Domain("need coefficients beta_0..beta_p with p >= 1".into()));
    }
    if c[1..].iter().all(RationalApprox::is_zero) {
        return Err(Error::Domain("some beta_j with j >= 1 must be nonzero".into()));
    }
    Ok(())
}

fn exact(x: f64) -> BigRational {
    RationalApprox::from_f64(x)
        .expect("validated finite")
        .as_rational()
        .clone()
}

impl BaseSpectrum {
    /// Spectrum from plain coefficients; `2 pi` is taken as a rational with
    /// `precision_bits` fractional bits when forming the turns.
    pub fn new(beta: Vec<RationalApprox>, hbar: f64, period: f64, precision_bits: u32) -> Result<Self> {
        check_scalars(hbar, period)?;
        check_coefficients(&beta)?;
        if precision_bits < 53 {
            return Err(Error::Precision(format!(
                "precision of {precision_bits} bits is below double precision"
            )));
        }
        let two_pi = constants::pi(precision_bits).as_rational() * BigInt::from(2);
        let scale = exact(period) / two_pi;
        let turns = beta
            .iter()
            .map(|b| RationalApprox::from_rational(b.as_rational() * &scale))
            .collect();
        Ok(Self {
            beta,
            turns,
            hbar,
            period,
        })
    }

    /// Spectrum given directly by its turns `t_j`, i.e. with
    /// `alpha_n T / (2 pi hbar) = sum_j t_j n^j` exactly.
    pub fn from_turns(turns: Vec<RationalApprox>, hbar: f64, period: f64) -> Result<Self> {
        check_scalars(hbar, period)?;
        check_coefficients(&turns)?;
        let two_pi = constants::pi(DEFAULT_PRECISION_BITS).as_rational() * BigInt::from(2);
        let scale = two_pi / exact(period);
        let beta = turns
            .iter()
            .map(|t| RationalApprox::from_rational(t.as_rational() * &scale))
            .collect();
        Ok(Self {
            beta,
            turns,
            hbar,
            period,
        })
    }

    /// Harmonic oscillator `alpha_n = n hbar omega`.
    pub fn harmonic(omega: RationalApprox, hbar: f64, period: f64) -> Result<Self> {
        Self::new(
            vec![RationalApprox::from_integer(0), omega],
            hbar,
            period,
            DEFAULT_PRECISION_BITS,
        )
    }

    /// Spectrum whose phases are `theta_n = 2 pi {beta n^j}` with `hbar = T = 1`.
    pub fn from_sequence(spec: &SequenceSpec) -> Result<Self> {
        let mut turns = vec![RationalApprox::from_integer(0); spec.j as usize + 1];
        turns[spec.j as usize] = spec.beta.clone();
        Self::from_turns(turns, 1.0, 1.0)
    }

    pub fn beta(&self) -> &[RationalApprox] {
        &self.beta
    }

    pub fn turns(&self) -> &[RationalApprox] {
        &self.turns
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn degree(&self) -> usize {
        self.beta.len() - 1
    }
}

/// `alpha_n` for `n = 0..n_terms`, each rounded once from the exact value.
pub fn alpha_sequence(spec: &BaseSpectrum, n_terms: usize) -> Result<Vec<f64>> {
    if n_terms == 0 {
        return Err(Error::Domain("n_terms must be at least 1".into()));
    }
    let hbar = exact(spec.hbar);
    Ok((0..n_terms)
        .into_par_iter()
        .map(|n| {
            let n = BigRational::from_integer(BigInt::from(n));
            let mut acc = BigRational::zero();
            for b in spec.beta.iter().rev() {
                acc = acc * &n + b.as_rational();
            }
            RationalApprox::from_rational(acc * &hbar).to_f64()
        })
        .collect())
}

/// Phases `theta_n = 2 pi {alpha_n T / (2 pi hbar)}` of the unperturbed
/// evolution, each in `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSequence {
    values: Vec<f64>,
    fractions: Vec<f64>,
    provenance: Option<BaseSpectrum>,
}

const BELOW_TAU: f64 = {
    let tau = std::f64::consts::TAU;
    f64::from_bits(tau.to_bits() - 1)
};

fn turns_to_angle(f: f64) -> f64 {
    let a = std::f64::consts::TAU * f;
    if a >= std::f64::consts::TAU {
        BELOW_TAU
    } else {
        a
    }
}

impl ThetaSequence {
    /// Wraps explicit phases; each must lie in `[0, 2 pi)`.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("empty theta sequence".into()));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..std::f64::consts::TAU).contains(*v))
        {
            return Err(Error::Domain(format!("theta[{i}] = {v} outside [0, 2 pi)")));
        }
        let fractions = values
            .iter()
            .map(|v| crate::number_theory::fractional_part(v / std::f64::consts::TAU))
            .collect();
        Ok(Self {
            values,
            fractions,
            provenance: None,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `theta_n / 2 pi`, in `[0, 1)`, rounded once from the exact residue.
    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn provenance(&self) -> Option<&BaseSpectrum> {
        self.provenance.as_ref()
    }

    /// Eigenphases `-theta_n mod 2 pi` of `U = diag(exp(-i theta_n))`.
    pub fn unperturbed_eigenphases(&self) -> ThetaSequence {
        let fractions: Vec<f64> = self
            .fractions
            .iter()
            .map(|&f| if f == 0.0 { 0.0 } else { crate::number_theory::fractional_part(1.0 - f) })
            .collect();
        let values = fractions.iter().map(|&f| turns_to_angle(f)).collect();
        ThetaSequence {
            values,
            fractions,
            provenance: None,
        }
    }

    /// The first `n` phases.
    pub fn prefix(&self, n: usize) -> Result<ThetaSequence> {
        if n == 0 || n > self.len() {
            return Err(Error::Size(format!("prefix {n} of a length-{} sequence", self.len())));
        }
        Ok(ThetaSequence {
            values: self.values[..n].to_vec(),
            fractions: self.fractions[..n].to_vec(),
            provenance: self.provenance.clone(),
        })
    }
}

/// Exact `{sum_j t_j n^j}` for `n = 0..n_terms`, by Horner's rule modulo the
/// common denominator of the turns.
pub fn theta_sequence(spec: &BaseSpectrum, n_terms: usize) -> Result<ThetaSequence> {
    if n_terms == 0 {
        return Err(Error::Domain("n_terms must be at least 1".into()));
    }
    let q_int = spec
        .turns
        .iter()
        .fold(BigInt::one(), |acc, t| acc.lcm(t.denominator()));
    let q: BigUint = q_int.magnitude().clone();
    let coeffs: Vec<BigUint> = spec
        .turns
        .iter()
        .map(|t| {
            let scaled = t.numerator() * (&q_int / t.denominator());
            mod_positive(&scaled, &q)
        })
        .collect();
    let fractions: Vec<f64> = (0..n_terms)
        .into_par_iter()
        .map(|n| {
            let n = BigUint::from(n) % &q;
            let mut acc = BigUint::zero();
            for c in coeffs.iter().rev() {
                acc = (acc * &n + c) % &q;
            }
            unit_fraction_to_f64(&acc, &q)
        })
        .collect();
    let values = fractions.iter().map(|&f| turns_to_angle(f)).collect();
    debug_assert!(q_int.is_positive());
    Ok(ThetaSequence {
        values,
        fractions,
        provenance: Some(spec.clone()),
    })
}
