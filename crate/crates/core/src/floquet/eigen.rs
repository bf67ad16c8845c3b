use std::f64::consts::TAU;

use nalgebra::linalg::Schur;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::matrix::{state_fingerprint, unitarity_defect, FloquetMatrix, UNITARITY_TOLERANCE};
use crate::error::{Error, Result};

/// Eigenphases of `V` and the spectral weights `|<psi_k|v_i>|^2` of each
/// kick state.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    eigenphases: Vec<f64>,
    vectors: DMatrix<Complex64>,
    weights: Vec<Vec<f64>>,
    max_modulus_defect: f64,
    max_off_diagonal: f64,
    matrix_fingerprint: u64,
    state_fingerprints: Vec<u64>,
}

/// Residual size of a triangular Schur factor accepted as diagonal.
pub const NORMALITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecompositionDiagnostics {
    pub max_modulus_defect: f64,
    pub max_off_diagonal: f64,
}

impl EigenDecomposition {
    /// Sorted, in `[0, 2 pi)`.
    pub fn eigenphases(&self) -> &[f64] {
        &self.eigenphases
    }

    /// Orthonormal eigenvectors as columns, in eigenphase order.
    pub fn vectors(&self) -> &DMatrix<Complex64> {
        &self.vectors
    }

    /// `weights()[k][i] = |<psi_k|v_i>|^2`.
    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn diagnostics(&self) -> DecompositionDiagnostics {
        DecompositionDiagnostics {
            max_modulus_defect: self.max_modulus_defect,
            max_off_diagonal: self.max_off_diagonal,
        }
    }

    pub fn matrix_fingerprint(&self) -> u64 {
        self.matrix_fingerprint
    }

    pub(crate) fn state_fingerprint(&self, k: usize) -> Option<u64> {
        self.state_fingerprints.get(k).copied()
    }

    /// `sum_i w_{k,i}^2`, the total squared point mass seen by state `k`.
    pub fn point_mass_sum(&self, k: usize) -> Result<f64> {
        let w = self
            .weights
            .get(k)
            .ok_or_else(|| Error::Domain(format!("no kick state {k}")))?;
        Ok(w.iter().map(|x| x * x).sum())
    }
}

fn phase(z: Complex64) -> f64 {
    let a = z.arg().rem_euclid(TAU);
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// Complex Schur form `V = Q T Q^dagger`; for a unitary `V` the factor `T`
/// is diagonal up to rounding and the columns of `Q` are eigenvectors.
pub fn eigen_decompose(v: &FloquetMatrix) -> Result<EigenDecomposition> {
    let dim = v.dim();
    let tolerance = UNITARITY_TOLERANCE * dim as f64;
    let defect = unitarity_defect(v.entries());
    if defect > tolerance {
        return Err(Error::Unitarity { defect, tolerance });
    }
    let schur = Schur::try_new(v.entries().clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Domain("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();

    let mut max_off_diagonal: f64 = 0.0;
    for j in 0..dim {
        for i in 0..j {
            max_off_diagonal = max_off_diagonal.max(t[(i, j)].norm());
        }
    }
    if max_off_diagonal > NORMALITY_TOLERANCE * dim as f64 {
        return Err(Error::Domain(format!(
            "Schur factor not diagonal: off-diagonal {max_off_diagonal:e}"
        )));
    }
    let eigenvalues: Vec<Complex64> = (0..dim).map(|i| t[(i, i)]).collect();
    let max_modulus_defect = eigenvalues
        .iter()
        .map(|z| (z.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    if max_modulus_defect > tolerance {
        return Err(Error::Unitarity {
            defect: max_modulus_defect,
            tolerance,
        });
    }

    let mut order: Vec<usize> = (0..dim).collect();
    let phases: Vec<f64> = eigenvalues.iter().map(|&z| phase(z)).collect();
    order.sort_by(|&a, &b| phases[a].total_cmp(&phases[b]).then(a.cmp(&b)));
    let eigenphases: Vec<f64> = order.iter().map(|&i| phases[i]).collect();
    let vectors = DMatrix::from_fn(dim, dim, |r, c| q[(r, order[c])]);

    let weights = v
        .ensemble()
        .states()
        .iter()
        .map(|s| {
            let psi = s.coefficients();
            (0..dim)
                .map(|i| {
                    let ip: Complex64 = (0..dim).map(|m| psi[m].conj() * vectors[(m, i)]).sum();
                    ip.norm_sqr()
                })
                .collect()
        })
        .collect();
    let state_fingerprints = v
        .ensemble()
        .states()
        .iter()
        .map(|s| state_fingerprint(s.coefficients()))
        .collect();
    Ok(EigenDecomposition {
        eigenphases,
        vectors,
        weights,
        max_modulus_defect,
        max_off_diagonal,
        matrix_fingerprint: v.fingerprint(),
        state_fingerprints,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::matrix::{build_floquet, Convention};
    use crate::number_theory::{constants, RationalApprox};
    use crate::spectral::{
        b_inverse_partial, cotangent_residual, orthonormal_ensemble, point_mass, theta_sequence,
        BaseSpectrum, BValue, KickEnsemble, KickState, Support,
    };
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn q(s: &str) -> RationalApprox {
        s.parse().unwrap()
    }

    fn golden_harmonic() -> BaseSpectrum {
        BaseSpectrum::from_turns(vec![q("0"), constants::golden_conjugate(200)], 1.0, 1.0).unwrap()
    }

    #[test]
    fn two_level_eigenphases() {
        let spec = BaseSpectrum::from_turns(vec![q("0"), q("1/2")], 1.0, 1.0).unwrap();
        let psi = KickState::from_coefficients(vec![
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
        ])
        .unwrap();
        let ens = KickEnsemble::new(vec![psi], vec![PI], 1.0).unwrap();
        let v = build_floquet(&spec, &ens, 2, Convention::AdditiveRk).unwrap();
        let d = eigen_decompose(&v).unwrap();
        assert!((d.eigenphases()[0] - PI / 2.0).abs() < 1e-12);
        assert!((d.eigenphases()[1] - 3.0 * PI / 2.0).abs() < 1e-12);
        for w in &d.weights()[0] {
            assert!((w - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_case() {
        let spec = golden_harmonic();
        let psi = crate::spectral::power_law_state(0.75, 12, &Support::All).unwrap();
        let ens = KickEnsemble::new(vec![psi.clone()], vec![TAU], 1.0);
        assert!(ens.is_err());
        let ens = KickEnsemble::empty(1.0).unwrap();
        let v = build_floquet(&spec, &ens, 12, Convention::AdditiveRk).unwrap();
        let d = eigen_decompose(&v).unwrap();
        let mut expected: Vec<f64> = theta_sequence(&spec, 12)
            .unwrap()
            .unperturbed_eigenphases()
            .values()
            .to_vec();
        expected.sort_by(f64::total_cmp);
        for (a, b) in d.eigenphases().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn secular_equation_and_weights() {
        let spec = golden_harmonic();
        for dim in [2usize, 16, 64] {
            let lambda = 1.3;
            let ens = orthonormal_ensemble(0.75, 1, dim, &[lambda], 1.0).unwrap();
            let v = build_floquet(&spec, &ens, dim, Convention::AdditiveRk).unwrap();
            let d = eigen_decompose(&v).unwrap();
            assert_eq!(d.eigenphases().len(), dim);
            let total: f64 = d.weights()[0].iter().sum();
            assert!((total - 1.0).abs() < 1e-10);

            let state = &v.ensemble().states()[0];
            let phi = v.theta().unperturbed_eigenphases();
            for (i, &x) in d.eigenphases().iter().enumerate() {
                // Index 0 carries no weight, so its level stays put.
                if (x - phi.values()[0]).abs() < 1e-9 {
                    continue;
                }
                let r = cotangent_residual(x, state, &phi, lambda).unwrap();
                assert!(r.abs() <= 1e-6, "dim {dim}: residual {r} at {x}");
                let b = b_inverse_partial(x, state, &phi, dim).unwrap();
                let mass = point_mass(lambda, BValue::from(b)).unwrap();
                assert!((mass - d.weights()[0][i]).abs() < 1e-8, "{mass} vs {}", d.weights()[0][i]);
            }
        }
    }

    #[test]
    fn weights_sum_to_one_rank_two() {
        let spec = golden_harmonic();
        let ens = orthonormal_ensemble(0.6, 2, 40, &[0.5, 2.0], 1.0).unwrap();
        for c in [Convention::AdditiveRk, Convention::ExponentialProduct] {
            let v = build_floquet(&spec, &ens, 40, c).unwrap();
            let d = eigen_decompose(&v).unwrap();
            for w in d.weights() {
                assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            }
            assert!(d.diagnostics().max_modulus_defect < 1e-10);
            assert!(d.eigenphases().windows(2).all(|p| p[0] <= p[1]));
        }
    }

    #[test]
    fn conventions_share_a_spectrum_under_lambda_flip() {
        let spec = golden_harmonic();
        let ens = orthonormal_ensemble(0.75, 2, 24, &[0.8, 1.9], 1.0).unwrap();
        let neg = orthonormal_ensemble(0.75, 2, 24, &[-0.8, -1.9], 1.0).unwrap();
        let a = eigen_decompose(&build_floquet(&spec, &ens, 24, Convention::AdditiveRk).unwrap()).unwrap();
        let p = eigen_decompose(&build_floquet(&spec, &neg, 24, Convention::ExponentialProduct).unwrap())
            .unwrap();
        for (x, y) in a.eigenphases().iter().zip(p.eigenphases()) {
            assert!(crate::spectral::circular_distance(*x, *y) < 1e-10);
        }
    }
}
