use std::hash::{DefaultHasher, Hash, Hasher};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{theta_sequence, BaseSpectrum, KickEnsemble, ThetaSequence};

pub const MAX_DIM: usize = 4096;
/// Unitarity is required to `UNITARITY_TOLERANCE * dim` in max norm.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

/// How the kick is combined with the free evolution `U = diag(exp(-i theta_n))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `V = U + sum_k (exp(i lambda_k / hbar) - 1) |psi_k><psi_k| U`.
    #[default]
    AdditiveRk,
    /// `V = U exp(-i W / hbar)` with `W = sum_k lambda_k |psi_k><psi_k|`.
    ExponentialProduct,
}

/// Truncated Floquet operator together with what it was built from.
#[derive(Debug, Clone)]
pub struct FloquetMatrix {
    entries: DMatrix<Complex64>,
    convention: Convention,
    spectrum: BaseSpectrum,
    ensemble: KickEnsemble,
    theta: ThetaSequence,
    fingerprint: u64,
}

fn fingerprint(m: &DMatrix<Complex64>, convention: Convention) -> u64 {
    let mut h = DefaultHasher::new();
    m.nrows().hash(&mut h);
    convention.hash(&mut h);
    for z in m.iter() {
        z.re.to_bits().hash(&mut h);
        z.im.to_bits().hash(&mut h);
    }
    h.finish()
}

pub(crate) fn state_fingerprint(c: &[Complex64]) -> u64 {
    let mut h = DefaultHasher::new();
    for z in c {
        z.re.to_bits().hash(&mut h);
        z.im.to_bits().hash(&mut h);
    }
    h.finish()
}

impl FloquetMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn spectrum(&self) -> &BaseSpectrum {
        &self.spectrum
    }

    /// The ensemble as truncated and renormalized to `dim`.
    pub fn ensemble(&self) -> &KickEnsemble {
        &self.ensemble
    }

    /// `theta_0..theta_{dim-1}` of the free evolution.
    pub fn theta(&self) -> &ThetaSequence {
        &self.theta
    }

    /// Hash of the dimension, convention and entry bits.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// `|psi_k><psi_k| U` scaled by `exp(i lambda_k / hbar) - 1`.
    pub fn r_k(&self, k: usize) -> Result<DMatrix<Complex64>> {
        if k >= self.ensemble.rank() {
            return Err(Error::Domain(format!(
                "kick index {k} out of range for rank {}",
                self.ensemble.rank()
            )));
        }
        let mu = Complex64::from_polar(1.0, self.ensemble.lambda_over_hbar(k)) - 1.0;
        let psi = self.ensemble.states()[k].coefficients();
        let th = self.theta.values();
        Ok(DMatrix::from_fn(self.dim(), self.dim(), |m, n| {
            mu * psi[m] * psi[n].conj() * Complex64::from_polar(1.0, -th[n])
        }))
    }
}

/// Builds `V` on the first `dim` unperturbed levels.
pub fn build_floquet(
    spec: &BaseSpectrum,
    ensemble: &KickEnsemble,
    dim: usize,
    convention: Convention,
) -> Result<FloquetMatrix> {
    if dim < 2 {
        return Err(Error::Size("dim must be at least 2".into()));
    }
    if dim > MAX_DIM {
        return Err(Error::Resource(format!(
            "dim = {dim} exceeds the dense limit {MAX_DIM}"
        )));
    }
    if (ensemble.hbar() - spec.hbar()).abs() > 1e-15 * spec.hbar() {
        return Err(Error::Ensemble(format!(
            "ensemble hbar {} differs from spectrum hbar {}",
            ensemble.hbar(),
            spec.hbar()
        )));
    }
    let ensemble = ensemble.truncated(dim)?;
    let theta = theta_sequence(spec, dim)?;
    let u: Vec<Complex64> = theta
        .values()
        .iter()
        .map(|&t| Complex64::from_polar(1.0, -t))
        .collect();

    let sign = match convention {
        Convention::AdditiveRk => 1.0,
        Convention::ExponentialProduct => -1.0,
    };
    // K = I + sum_k (exp(sign * i lambda_k / hbar) - 1) P_k
    let mut kick = DMatrix::<Complex64>::identity(dim, dim);
    for (k, state) in ensemble.states().iter().enumerate() {
        let mu = Complex64::from_polar(1.0, sign * ensemble.lambda_over_hbar(k)) - 1.0;
        let psi = state.coefficients();
        for &m in state.support() {
            for &n in state.support() {
                kick[(m, n)] += mu * psi[m] * psi[n].conj();
            }
        }
    }
    let entries = match convention {
        Convention::AdditiveRk => DMatrix::from_fn(dim, dim, |m, n| kick[(m, n)] * u[n]),
        Convention::ExponentialProduct => DMatrix::from_fn(dim, dim, |m, n| u[m] * kick[(m, n)]),
    };

    let defect = unitarity_defect(&entries);
    let tolerance = UNITARITY_TOLERANCE * dim as f64;
    if defect > tolerance {
        return Err(Error::Unitarity { defect, tolerance });
    }
    let fingerprint = fingerprint(&entries, convention);
    Ok(FloquetMatrix {
        entries,
        convention,
        spectrum: spec.clone(),
        ensemble,
        theta,
        fingerprint,
    })
}

/// `max |(V^dagger V - I)_{mn}|`.
pub fn unitarity_defect(v: &DMatrix<Complex64>) -> f64 {
    let g = v.adjoint() * v;
    let n = g.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

/// `|exp(i lambda / hbar) - 1| = sqrt(2 (1 - cos(lambda / hbar)))`, the trace
/// norm of each `R_k`.
pub fn perturbation_trace_norm(lambda_over_hbar: f64) -> f64 {
    2.0 * (lambda_over_hbar / 2.0).sin().abs()
}

/// Sum of singular values.
pub fn trace_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone().svd(false, false).singular_values.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number_theory::RationalApprox;
    use crate::spectral::{orthonormal_ensemble, KickState, Support};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    pub(crate) fn q(s: &str) -> RationalApprox {
        s.parse().unwrap()
    }

    fn two_level(lambda: f64) -> (BaseSpectrum, KickEnsemble) {
        let spec = BaseSpectrum::from_turns(vec![q("0"), q("1/2")], 1.0, 1.0).unwrap();
        let psi = KickState::from_coefficients(vec![
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
        ])
        .unwrap();
        (spec, KickEnsemble::new(vec![psi], vec![lambda], 1.0).unwrap())
    }

    #[test]
    fn two_level_example() {
        let (spec, ens) = two_level(PI);
        let v = build_floquet(&spec, &ens, 2, Convention::AdditiveRk).unwrap();
        // (I - 2P) U by hand.
        let expected = [[0.0, 1.0], [-1.0, 0.0]];
        for m in 0..2 {
            for n in 0..2 {
                assert!((v.entries()[(m, n)] - Complex64::new(expected[m][n], 0.0)).norm() < 1e-15);
            }
        }
    }

    fn golden_harmonic() -> BaseSpectrum {
        BaseSpectrum::from_turns(
            vec![q("0"), crate::number_theory::constants::golden_conjugate(200)],
            1.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn empty_ensemble_gives_u() {
        let spec = golden_harmonic();
        let ens = KickEnsemble::empty(1.0).unwrap();
        for c in [Convention::AdditiveRk, Convention::ExponentialProduct] {
            let v = build_floquet(&spec, &ens, 16, c).unwrap();
            let th = theta_sequence(&spec, 16).unwrap();
            for m in 0..16 {
                for n in 0..16 {
                    let expected = if m == n {
                        Complex64::from_polar(1.0, -th.values()[n])
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    assert_eq!(v.entries()[(m, n)], expected);
                }
            }
        }
    }

    #[test]
    fn rank_two_is_unitary() {
        let spec = golden_harmonic();
        let ens = orthonormal_ensemble(0.75, 2, 64, &[0.7, 2.1], 1.0).unwrap();
        for c in [Convention::AdditiveRk, Convention::ExponentialProduct] {
            let v = build_floquet(&spec, &ens, 64, c).unwrap();
            assert!(unitarity_defect(v.entries()) <= 1e-12);
        }
    }

    #[test]
    fn conventions_are_related_by_conjugation() {
        let spec = golden_harmonic();
        let ens = orthonormal_ensemble(0.75, 2, 32, &[0.7, 2.1], 1.0).unwrap();
        let neg = orthonormal_ensemble(0.75, 2, 32, &[-0.7, -2.1], 1.0).unwrap();
        let a = build_floquet(&spec, &ens, 32, Convention::AdditiveRk).unwrap();
        let p = build_floquet(&spec, &neg, 32, Convention::ExponentialProduct).unwrap();
        let u = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            32,
            a.theta().values().iter().map(|&t| Complex64::from_polar(1.0, -t)),
        ));
        let conj = u.adjoint() * p.entries() * &u;
        assert!((conj - a.entries()).camax() < 1e-12);
    }

    #[test]
    fn trace_norm_examples() {
        assert!((perturbation_trace_norm(PI) - 2.0).abs() < 1e-15);
        assert!((perturbation_trace_norm(PI / 2.0) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(perturbation_trace_norm(0.0), 0.0);
        for l in [0.3f64, 1.0, 2.0, 5.5, -4.0] {
            let direct = (2.0 * (1.0 - l.cos())).sqrt();
            assert!((perturbation_trace_norm(l) - direct).abs() < 1e-12);
        }
        let spec = golden_harmonic();
        let ens = orthonormal_ensemble(0.6, 2, 48, &[0.9, 2.5], 1.0).unwrap();
        let v = build_floquet(&spec, &ens, 48, Convention::AdditiveRk).unwrap();
        for k in 0..2 {
            let r = v.r_k(k).unwrap();
            let tn = trace_norm(&r);
            assert!((tn - perturbation_trace_norm(ens.lambda_over_hbar(k))).abs() < 1e-8);
        }
        assert!(v.r_k(2).is_err());
    }

    #[test]
    fn additive_is_u_plus_sum_of_r_k() {
        let spec = golden_harmonic();
        let ens = orthonormal_ensemble(0.6, 2, 20, &[0.9, 2.5], 1.0).unwrap();
        let v = build_floquet(&spec, &ens, 20, Convention::AdditiveRk).unwrap();
        let mut sum = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            20,
            v.theta().values().iter().map(|&t| Complex64::from_polar(1.0, -t)),
        ));
        for k in 0..2 {
            sum += v.r_k(k).unwrap();
        }
        assert!((sum - v.entries()).camax() < 1e-15);
    }

    #[test]
    fn size_limits() {
        let spec = golden_harmonic();
        let ens = KickEnsemble::empty(1.0).unwrap();
        assert!(matches!(
            build_floquet(&spec, &ens, 1, Convention::AdditiveRk),
            Err(Error::Size(_))
        ));
        assert!(matches!(
            build_floquet(&spec, &ens, MAX_DIM + 1, Convention::AdditiveRk),
            Err(Error::Resource(_))
        ));
        let s = KickState::uniform(10, &Support::Explicit(vec![8, 9])).unwrap();
        let ens = KickEnsemble::new(vec![s], vec![1.0], 1.0).unwrap();
        assert!(build_floquet(&spec, &ens, 4, Convention::AdditiveRk).is_err());
    }
}
