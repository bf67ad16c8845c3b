//! Python bindings for `kicklab`, imported as `kicklab`.
//!
//! Real parameters such as `beta` are passed as strings (`"1/3"`, `"0.7"`,
//! `"golden"`) so they reach the library as exact rationals.

use pyo3::exceptions::{PyArithmeticError, PyMemoryError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use kicklab::experiments::{self, Variant};
use kicklab::floquet::{self, Convention};
use kicklab::number_theory::{self as nt, RationalApprox, SequenceSpec};
use kicklab::spectral::{self, BaseSpectrum, BInverse, Support};
use kicklab::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Size(_) | Error::Resource(_) => PyMemoryError::new_err(e.to_string()),
        Error::Unitarity { .. } | Error::Precision(_) | Error::Pole { .. } => {
            PyArithmeticError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn real(s: &str) -> kicklab::Result<RationalApprox> {
    kicklab::cli::parse_beta(s).map_err(Error::Domain)
}

fn sequence(j: u32, beta: &str) -> kicklab::Result<SequenceSpec> {
    SequenceSpec::new(j, real(beta)?, beta)
}

fn spectrum_from_turns(t: &[String], hbar: f64, period: f64) -> kicklab::Result<BaseSpectrum> {
    let t = t.iter().map(|s| real(s)).collect::<kicklab::Result<Vec<_>>>()?;
    BaseSpectrum::from_turns(t, hbar, period)
}

fn parse_variant(name: &str) -> kicklab::Result<Variant> {
    match name {
        "combescure" => Ok(Variant::Combescure),
        "bourget" => Ok(Variant::Bourget),
        v => Err(Error::Domain(format!("unknown variant '{v}'"))),
    }
}

fn parse_convention(name: &str) -> kicklab::Result<Convention> {
    match name {
        "additive" => Ok(Convention::AdditiveRk),
        "product" => Ok(Convention::ExponentialProduct),
        c => Err(Error::Domain(format!("unknown convention '{c}'"))),
    }
}

/// Extreme discrepancy of points in `[0, 1)`.
#[pyfunction]
fn discrepancy(points: Vec<f64>) -> PyResult<f64> {
    nt::discrepancy_exact(&points).map(|r| r.d_n).map_err(to_py)
}

#[pyfunction]
fn erdos_turan_bound(points: Vec<f64>, m: u32) -> PyResult<f64> {
    nt::erdos_turan_bound(&points, m).map_err(to_py)
}

/// `{n^j beta}` for `n = 1..=n`.
#[pyfunction]
fn sequence_points(j: u32, beta: &str, n: u64) -> PyResult<Vec<f64>> {
    sequence(j, beta).and_then(|s| nt::sequence_points(&s, n)).map_err(to_py)
}

#[pyfunction]
fn scaling_fit<'py>(py: Python<'py>, j: u32, beta: &str, n_grid: Vec<u64>) -> PyResult<Bound<'py, PyDict>> {
    let spec = sequence(j, beta).map_err(to_py)?;
    let fit = py
        .detach(|| nt::discrepancy_scaling_fit(&spec, &n_grid))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("slope", fit.slope)?;
    d.set_item("intercept", fit.intercept)?;
    d.set_item("table", fit.table)?;
    d.set_item("eta_hat", fit.eta_hat)?;
    d.set_item("predicted_exponent", fit.predicted_exponent)?;
    Ok(d)
}

/// Least-squares type estimate over convergents with denominator up to `q_max`.
#[pyfunction]
#[pyo3(signature = (beta, q_max = 10_000))]
fn type_estimate(beta: &str, q_max: u64) -> PyResult<f64> {
    let x = real(beta).map_err(to_py)?;
    nt::irrational_type_estimate(&x, q_max)
        .map(|t| t.eta_hat)
        .map_err(to_py)
}

/// Unperturbed phases `theta_n`, `n = 0..n`, for spectrum turns `t_j`.
#[pyfunction]
#[pyo3(signature = (turns, n, hbar = 1.0, period = 1.0))]
fn theta_sequence(turns: Vec<String>, n: usize, hbar: f64, period: f64) -> PyResult<Vec<f64>> {
    spectrum_from_turns(&turns, hbar, period)
        .and_then(|s| spectral::theta_sequence(&s, n))
        .map(|t| t.values().to_vec())
        .map_err(to_py)
}

/// Real coefficients `a_n = C n^(-gamma)`, `n = 0..dim`, with `a_0 = 0`.
#[pyfunction]
fn power_law_state(gamma: f64, dim: usize) -> PyResult<Vec<f64>> {
    spectral::power_law_state(gamma, dim, &Support::All)
        .map(|s| s.coefficients().iter().map(|c| c.re).collect())
        .map_err(to_py)
}

/// Partial sum of `B^{-1}(x)` over `m < n` for `theta_m = 2 pi {m^j beta}`
/// and the power-law state; `inf` at a pole.
#[pyfunction]
fn b_inverse_partial(x: f64, j: u32, beta: &str, gamma: f64, n: usize) -> PyResult<f64> {
    let run = || -> kicklab::Result<f64> {
        let base = BaseSpectrum::from_sequence(&sequence(j, beta)?)?;
        let theta = spectral::theta_sequence(&base, n)?;
        let state = spectral::power_law_state(gamma, n, &Support::All)?;
        Ok(match spectral::b_inverse_partial(x, &state, &theta, n)? {
            BInverse::Finite(v) => v,
            BInverse::Pole { .. } => f64::INFINITY,
        })
    };
    run().map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (x, j, beta, gamma, n, variant = "combescure", delta = 0.01))]
fn inequality_check<'py>(
    py: Python<'py>,
    x: f64,
    j: u32,
    beta: &str,
    gamma: f64,
    n: u64,
    variant: &str,
    delta: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = sequence(j, beta).map_err(to_py)?;
    let v = parse_variant(variant).map_err(to_py)?;
    let r = experiments::inequality_check(x, &spec, gamma, n, v, delta).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("a_count", r.a_count)?;
    d.set_item("lhs", r.lhs)?;
    d.set_item("lhs_measure", r.lhs_measure)?;
    d.set_item("rhs", r.rhs)?;
    d.set_item("holds", r.holds)?;
    Ok(d)
}

/// Eigenphases of the Floquet matrix with `len(lambdas)` power-law kicks,
/// and the weight of each kick state on each eigenvector.
#[pyfunction]
#[pyo3(signature = (turns, dim, lambdas, gamma = 0.75, hbar = 1.0, period = 1.0, convention = "additive"))]
fn floquet_spectrum<'py>(
    py: Python<'py>,
    turns: Vec<String>,
    dim: usize,
    lambdas: Vec<f64>,
    gamma: f64,
    hbar: f64,
    period: f64,
    convention: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = spectrum_from_turns(&turns, hbar, period).map_err(to_py)?;
    let conv = parse_convention(convention).map_err(to_py)?;
    let (phases, weights, defect) = py
        .detach(|| -> kicklab::Result<_> {
            let ens = spectral::orthonormal_ensemble(gamma, lambdas.len(), dim, &lambdas, hbar)?;
            let v = floquet::build_floquet(&spec, &ens, dim, conv)?;
            let d = floquet::eigen_decompose(&v)?;
            Ok((
                d.eigenphases().to_vec(),
                d.weights().to_vec(),
                floquet::unitarity_defect(v.entries()),
            ))
        })
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("eigenphases", phases)?;
    d.set_item("weights", weights)?;
    d.set_item("unitarity_defect", defect)?;
    Ok(d)
}

/// `|c_n|^2` and energies for `n = 0..=kicks` under one power-law kick,
/// with the Cesàro mean and the squared point masses it should approach.
#[pyfunction]
#[pyo3(signature = (turns, dim, lam, kicks, gamma = 0.75, hbar = 1.0, period = 1.0))]
fn survival<'py>(
    py: Python<'py>,
    turns: Vec<String>,
    dim: usize,
    lam: f64,
    kicks: usize,
    gamma: f64,
    hbar: f64,
    period: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = spectrum_from_turns(&turns, hbar, period).map_err(to_py)?;
    let (trace, w) = py
        .detach(|| -> kicklab::Result<_> {
            let ens = spectral::orthonormal_ensemble(gamma, 1, dim, &[lam], hbar)?;
            let v = floquet::build_floquet(&spec, &ens, dim, Convention::AdditiveRk)?;
            let d = floquet::eigen_decompose(&v)?;
            let trace = floquet::evolve_with(&v, &d, &v.ensemble().states()[0], kicks)?;
            let w = floquet::wiener_average(&trace, &d, 0)?;
            Ok((trace, w))
        })
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("survival", trace.survival())?;
    d.set_item("energies", trace.energies)?;
    d.set_item("cesaro_mean", w.cesaro_mean)?;
    d.set_item("point_mass_sum", w.point_mass_sum)?;
    Ok(d)
}

/// Runs the command line with `args` (without the program name) and returns
/// its exit code.
#[pyfunction]
fn run_cli(py: Python<'_>, args: Vec<String>) -> i32 {
    py.detach(|| {
        kicklab::cli::run(std::iter::once("kicklab".to_string()).chain(args))
    })
}

#[pymodule(name = "kicklab")]
fn kicklab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(discrepancy, m)?)?;
    m.add_function(wrap_pyfunction!(erdos_turan_bound, m)?)?;
    m.add_function(wrap_pyfunction!(sequence_points, m)?)?;
    m.add_function(wrap_pyfunction!(scaling_fit, m)?)?;
    m.add_function(wrap_pyfunction!(type_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(theta_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(power_law_state, m)?)?;
    m.add_function(wrap_pyfunction!(b_inverse_partial, m)?)?;
    m.add_function(wrap_pyfunction!(inequality_check, m)?)?;
    m.add_function(wrap_pyfunction!(floquet_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(survival, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsers() {
        assert_eq!(parse_variant("bourget").unwrap(), Variant::Bourget);
        assert!(parse_variant("other").is_err());
        assert_eq!(parse_convention("product").unwrap(), Convention::ExponentialProduct);
        assert!(parse_convention("x").is_err());
        assert!(sequence(1, "nope").is_err());
        assert_eq!(sequence(2, "1/3").unwrap().j, 2);
    }

    #[test]
    fn turns_build_a_spectrum() {
        let s = spectrum_from_turns(&["0".into(), "1/2".into()], 1.0, 1.0).unwrap();
        let t = spectral::theta_sequence(&s, 2).unwrap();
        assert!((t.values()[1] - std::f64::consts::PI).abs() < 1e-15);
        assert!(spectrum_from_turns(&["0".into()], 1.0, 1.0).is_err());
    }
}
