use num_complex::Complex64;

use crate::error::{Error, Result};

/// Index set carrying the nonzero coefficients of a kick state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Support {
    /// Every index `1..dim`.
    All,
    /// Indices `n >= 1` with `n % modulus == residue`.
    Residue { modulus: usize, residue: usize },
    /// An explicit list of indices.
    Explicit(Vec<usize>),
}

impl Support {
    fn indices(&self, dim: usize) -> Vec<usize> {
        match self {
            Support::All => (1..dim).collect(),
            Support::Residue { modulus, residue } => (1..dim)
                .filter(|n| n % modulus == residue % modulus)
                .collect(),
            Support::Explicit(v) => {
                let mut v = v.clone();
                v.sort_unstable();
                v.dedup();
                v
            }
        }
    }
}

/// Normalized kick state `|psi> = sum_n a_n |phi_n>` truncated to `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct KickState {
    coefficients: Vec<Complex64>,
    gamma: Option<f64>,
    support: Vec<usize>,
    normalization: f64,
    truncated_weight: f64,
}

pub const NORM_TOLERANCE: f64 = 1e-12;

/// Euler-Maclaurin estimate of `sum_{k >= k0} (m k + r)^(-s)` for `s > 1`.
fn power_tail(modulus: usize, residue: usize, first: usize, s: f64) -> f64 {
    let m = modulus as f64;
    let x = first as f64;
    debug_assert!(first % modulus == residue % modulus);
    x.powf(1.0 - s) / (m * (s - 1.0)) + 0.5 * x.powf(-s) + s * m * x.powf(-s - 1.0) / 12.0
}

impl KickState {
    /// Builds a state from explicit coefficients, normalizing them.
    pub fn from_coefficients(coefficients: Vec<Complex64>) -> Result<Self> {
        let norm2: f64 = coefficients.iter().map(|a| a.norm_sqr()).sum();
        if !(norm2 > 0.0 && norm2.is_finite()) {
            return Err(Error::Domain("kick state must have nonzero finite norm".into()));
        }
        let scale = norm2.sqrt().recip();
        let coefficients: Vec<Complex64> = coefficients.iter().map(|a| a * scale).collect();
        let support = coefficients
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != Complex64::new(0.0, 0.0))
            .map(|(i, _)| i)
            .collect();
        Ok(Self {
            coefficients,
            gamma: None,
            support,
            normalization: scale,
            truncated_weight: 0.0,
        })
    }

    /// Equal weights on `support`, which may include index 0.
    pub fn uniform(dim: usize, support: &Support) -> Result<Self> {
        let idx = support.indices(dim);
        check_support(&idx, dim, 0)?;
        let c = (idx.len() as f64).sqrt().recip();
        let mut coefficients = vec![Complex64::new(0.0, 0.0); dim];
        for &n in &idx {
            coefficients[n] = Complex64::new(c, 0.0);
        }
        Ok(Self {
            coefficients,
            gamma: None,
            support: idx,
            normalization: c,
            truncated_weight: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// `|a_n|^2`, zero beyond the truncation.
    pub fn weight(&self, n: usize) -> f64 {
        self.coefficients.get(n).map_or(0.0, |a| a.norm_sqr())
    }

    pub fn gamma(&self) -> Option<f64> {
        self.gamma
    }

    /// Sorted indices with nonzero coefficient.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// The constant `C` in `a_n = C n^(-gamma)` (or the uniform amplitude).
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Fraction of the untruncated squared norm lying at indices `>= dim`.
    pub fn truncated_weight(&self) -> f64 {
        self.truncated_weight
    }

    pub fn inner(&self, other: &KickState) -> Complex64 {
        self.coefficients
            .iter()
            .zip(&other.coefficients)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Cuts the state to `dim` entries and renormalizes; the weight removed
    /// is added to [`KickState::truncated_weight`].
    pub fn truncated(&self, dim: usize) -> Result<Self> {
        if dim >= self.dim() {
            let mut s = self.clone();
            s.coefficients.resize(dim, Complex64::new(0.0, 0.0));
            return Ok(s);
        }
        let kept: f64 = self.coefficients[..dim].iter().map(|a| a.norm_sqr()).sum();
        if kept == 0.0 {
            return Err(Error::Domain(format!("no weight left below dim = {dim}")));
        }
        let scale = kept.sqrt().recip();
        let coefficients: Vec<Complex64> =
            self.coefficients[..dim].iter().map(|a| a * scale).collect();
        let support = self.support.iter().copied().filter(|&n| n < dim).collect();
        let lost = 1.0 - kept;
        Ok(Self {
            coefficients,
            gamma: self.gamma,
            support,
            normalization: self.normalization * scale,
            truncated_weight: self.truncated_weight + (1.0 - self.truncated_weight) * lost,
        })
    }
}

fn check_support(idx: &[usize], dim: usize, min_index: usize) -> Result<()> {
    if idx.is_empty() {
        return Err(Error::Domain("empty support".into()));
    }
    if let Some(&n) = idx.iter().find(|&&n| n < min_index || n >= dim) {
        return Err(Error::Domain(format!(
            "support index {n} outside {min_index}..{dim}"
        )));
    }
    Ok(())
}

/// `a_n = C n^(-gamma)` on `support`, zero elsewhere, with `C` fixing the norm.
pub fn power_law_state(gamma: f64, dim: usize, support: &Support) -> Result<KickState> {
    if !(gamma > 0.5 && gamma <= 1.0) {
        return Err(Error::Domain(format!(
            "gamma = {gamma} outside the divergent regime (1/2, 1]"
        )));
    }
    if dim < 2 {
        return Err(Error::Size("dim must be at least 2".into()));
    }
    let idx = support.indices(dim);
    check_support(&idx, dim, 1)?;
    let s = 2.0 * gamma;
    // Smallest terms first.
    let head: f64 = idx.iter().rev().map(|&n| (n as f64).powf(-s)).sum();
    let c = head.sqrt().recip();
    let mut coefficients = vec![Complex64::new(0.0, 0.0); dim];
    for &n in &idx {
        coefficients[n] = Complex64::new(c * (n as f64).powf(-gamma), 0.0);
    }
    let tail = match support {
        Support::All => power_tail(1, 0, dim, s),
        Support::Residue { modulus, residue } => {
            let r = residue % modulus;
            let first = dim + (r + modulus - dim % modulus) % modulus;
            power_tail(*modulus, r, first.max(1), s)
        }
        Support::Explicit(_) => 0.0,
    };
    Ok(KickState {
        coefficients,
        gamma: Some(gamma),
        support: idx,
        normalization: c,
        truncated_weight: tail / (head + tail),
    })
}

/// Orthonormal kick states `psi_k` with strengths `lambda_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct KickEnsemble {
    states: Vec<KickState>,
    strengths: Vec<f64>,
    hbar: f64,
}

pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-12;

impl KickEnsemble {
    pub fn new(states: Vec<KickState>, strengths: Vec<f64>, hbar: f64) -> Result<Self> {
        if states.len() != strengths.len() {
            return Err(Error::Ensemble(format!(
                "{} states but {} strengths",
                states.len(),
                strengths.len()
            )));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::Domain(format!("hbar must be positive, got {hbar}")));
        }
        for &l in &strengths {
            let l_h = l / hbar;
            if !l_h.is_finite() || (l_h / 2.0).sin().abs() <= 1e-12 {
                return Err(Error::TrivialPerturbation(l_h));
            }
        }
        for k in 0..states.len() {
            for l in 0..k {
                let ip = states[k].inner(&states[l]).norm();
                if ip > ORTHOGONALITY_TOLERANCE {
                    return Err(Error::Ensemble(format!(
                        "|<psi_{l}|psi_{k}>| = {ip:e} exceeds {ORTHOGONALITY_TOLERANCE:e}"
                    )));
                }
            }
        }
        Ok(Self {
            states,
            strengths,
            hbar,
        })
    }

    /// The rank-0 ensemble.
    pub fn empty(hbar: f64) -> Result<Self> {
        Self::new(Vec::new(), Vec::new(), hbar)
    }

    pub fn rank(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[KickState] {
        &self.states
    }

    pub fn strengths(&self) -> &[f64] {
        &self.strengths
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn lambda_over_hbar(&self, k: usize) -> f64 {
        self.strengths[k] / self.hbar
    }

    /// Every state truncated and renormalized to `dim`, then rechecked.
    pub fn truncated(&self, dim: usize) -> Result<Self> {
        let states = self
            .states
            .iter()
            .map(|s| s.truncated(dim))
            .collect::<Result<Vec<_>>>()?;
        Self::new(states, self.strengths.clone(), self.hbar)
    }
}

/// `n_states` power-law states on interleaved supports: state `k` lives on
/// the indices `n >= 1` with `(n - 1) % n_states == k`.
pub fn orthonormal_ensemble(
    gamma: f64,
    n_states: usize,
    dim: usize,
    strengths: &[f64],
    hbar: f64,
) -> Result<KickEnsemble> {
    if n_states == 0 {
        return KickEnsemble::empty(hbar);
    }
    if n_states > dim.saturating_sub(1) {
        return Err(Error::Size(format!(
            "{n_states} states need dim >= {}, got {dim}",
            n_states + 1
        )));
    }
    let states = (0..n_states)
        .map(|k| {
            power_law_state(
                gamma,
                dim,
                &Support::Residue {
                    modulus: n_states,
                    residue: (k + 1) % n_states,
                },
            )
        })
        .collect::<Result<Vec<_>>>()?;
    KickEnsemble::new(states, strengths.to_vec(), hbar)
}
