use std::f64::consts::TAU;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use super::counting::{b_lower_bounds, report_from_parts, CountReport, Variant, DEFAULT_DELTA};
use crate::error::{Error, Result};
use crate::number_theory::{
    constants, discrepancy_exact, irrational_type_estimate, RationalApprox, SequenceSpec,
    TYPE_ESTIMATE_Q_MAX,
};
use crate::spectral::{gamma_window, power_law_state, theta_sequence, BInverse, BaseSpectrum, Support};

/// `x_m = 2 pi {m (phi - 1) + 1/7}` for `m = 1..=count`.
pub fn default_x_grid(count: usize) -> Vec<f64> {
    let g = constants::golden_conjugate(200);
    let seventh = BigRational::new(1.into(), 7.into());
    (1..=count as i64)
        .map(|m| {
            let v = g.as_rational() * BigRational::from_integer(m.into()) + &seventh;
            TAU * RationalApprox::from_rational(v).fractional_part().to_f64()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanOptions {
    pub variant: Variant,
    pub delta: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            variant: Variant::Combescure,
            delta: DEFAULT_DELTA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthLabel {
    DivergentTrend,
    Bounded,
    Inconclusive,
}

impl GrowthLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            GrowthLabel::DivergentTrend => "divergent-trend",
            GrowthLabel::Bounded => "bounded",
            GrowthLabel::Inconclusive => "inconclusive",
        }
    }
}

/// Divergent if the counts never decrease and at least double end to end;
/// bounded if the last three agree.
pub fn growth_label(counts: &[u64]) -> GrowthLabel {
    let (Some(&first), Some(&last)) = (counts.first(), counts.last()) else {
        return GrowthLabel::Inconclusive;
    };
    let monotone = counts.windows(2).all(|w| w[0] <= w[1]);
    if counts.len() >= 2 && monotone && last > 0 && last >= 2 * first {
        GrowthLabel::DivergentTrend
    } else if counts.len() >= 3 && counts[counts.len() - 3..].iter().all(|&c| c == last) {
        GrowthLabel::Bounded
    } else {
        GrowthLabel::Inconclusive
    }
}

/// One `(x, gamma, N)` cell of a scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub x_index: usize,
    pub x: f64,
    pub gamma: f64,
    pub d_n: f64,
    pub report: CountReport,
    pub s_bourget_count: u64,
    pub bound_combescure: f64,
    pub bound_bourget: f64,
    pub bounds_hold: bool,
}

impl SweepCell {
    /// The partial sum of `B^{-1}`, infinite at a pole.
    pub fn b_inverse_value(&self) -> f64 {
        match self.report.b_inverse {
            Some(BInverse::Finite(v)) => v,
            _ => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesLabel {
    pub x_index: usize,
    pub x: f64,
    pub gamma: f64,
    pub s_counts: Vec<u64>,
    pub label: GrowthLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub label: String,
    pub j: u32,
    pub gamma: f64,
    pub options: ScanOptions,
    pub x_grid: Vec<f64>,
    pub n_grid: Vec<u64>,
    /// Ordered by `x`, then `N`.
    pub cells: Vec<SweepCell>,
    pub series: Vec<SeriesLabel>,
}

impl SweepResult {
    /// Whether the inequality held on every cell where it applies.
    pub fn inequality_holds(&self) -> bool {
        self.cells.iter().all(|c| c.report.holds != Some(false))
    }

    pub fn cell(&self, x_index: usize, n: u64) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.x_index == x_index && c.report.n == n)
    }
}

/// Phases and discrepancies shared by every `gamma` on one grid.
struct Prepared {
    theta: crate::spectral::ThetaSequence,
    sorted: Vec<Vec<f64>>,
    d_n: Vec<f64>,
    n_max: usize,
}

fn prepare(spec: &SequenceSpec, x_grid: &[f64], n_grid: &[u64]) -> Result<Prepared> {
    if x_grid.is_empty() || n_grid.is_empty() {
        return Err(Error::Domain("empty x or N grid".into()));
    }
    if let Some(x) = x_grid.iter().find(|&&x| !(x > 0.0 && x < TAU)) {
        return Err(Error::Domain(format!("x = {x} outside (0, 2 pi)")));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) || n_grid[0] < 3 {
        return Err(Error::Domain("N grid must be increasing and start at 3 or more".into()));
    }
    let n_max = *n_grid.last().expect("nonempty") as usize;
    let base = BaseSpectrum::from_sequence(spec)?;
    let theta = theta_sequence(&base, n_max + 1)?;
    let per_n: Vec<(Vec<f64>, f64)> = n_grid
        .par_iter()
        .map(|&n| {
            let mut pts = theta.fractions()[1..=n as usize].to_vec();
            let d = discrepancy_exact(&pts)?.d_n;
            pts.sort_by(f64::total_cmp);
            Ok((pts, d))
        })
        .collect::<Result<_>>()?;
    let (sorted, d_n) = per_n.into_iter().unzip();
    Ok(Prepared {
        theta,
        sorted,
        d_n,
        n_max,
    })
}

fn scan_prepared(
    p: &Prepared,
    spec: &SequenceSpec,
    gamma: f64,
    x_grid: &[f64],
    n_grid: &[u64],
    options: ScanOptions,
) -> Result<SweepResult> {
    let state = power_law_state(gamma, p.n_max, &Support::All)?;
    let jobs: Vec<(usize, usize)> = (0..x_grid.len())
        .flat_map(|xi| (0..n_grid.len()).map(move |ni| (xi, ni)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(xi, ni)| {
            let (x, n) = (x_grid[xi], n_grid[ni]);
            let mut report =
                report_from_parts(x, n, gamma, options.variant, options.delta, &p.sorted[ni], p.d_n[ni]);
            let b = b_lower_bounds(x, &state, &p.theta, n as usize)?;
            report.s_count = Some(b.s_count);
            report.b_inverse = Some(b.b_inverse);
            Ok(SweepCell {
                x_index: xi,
                x,
                gamma,
                d_n: p.d_n[ni],
                report,
                s_bourget_count: b.s_bourget_count,
                bound_combescure: b.combescure,
                bound_bourget: b.bourget,
                bounds_hold: b.holds,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let series = x_grid
        .iter()
        .enumerate()
        .map(|(xi, &x)| {
            let s_counts: Vec<u64> = cells
                .iter()
                .filter(|c| c.x_index == xi)
                .map(|c| c.report.s_count.unwrap_or(0))
                .collect();
            SeriesLabel {
                x_index: xi,
                x,
                gamma,
                label: growth_label(&s_counts),
                s_counts,
            }
        })
        .collect();
    Ok(SweepResult {
        label: spec.label.clone(),
        j: spec.j,
        gamma,
        options,
        x_grid: x_grid.to_vec(),
        n_grid: n_grid.to_vec(),
        cells,
        series,
    })
}

/// Counts, inequality sides and `B^{-1}` bounds over `x_grid` and `n_grid`
/// for the power-law state with exponent `gamma` on every index.
///
/// The state is built once at the largest `N` and each cell uses its prefix,
/// so `#S(x)` is nondecreasing in `N` by construction of the sets.
pub fn divergence_scan(
    spec: &SequenceSpec,
    gamma: f64,
    x_grid: &[f64],
    n_grid: &[u64],
    options: ScanOptions,
) -> Result<SweepResult> {
    let p = prepare(spec, x_grid, n_grid)?;
    scan_prepared(&p, spec, gamma, x_grid, n_grid, options)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaSweep {
    /// Type estimate of `beta`, absent for rationals.
    pub eta_hat: Option<f64>,
    /// `(1/2, 1/2 + 1/(2 eta j))` when `eta_hat` is known.
    pub window: Option<(f64, f64)>,
    pub scans: Vec<SweepResult>,
    /// Per scan, whether its `gamma` lies inside the window.
    pub in_window: Vec<Option<bool>>,
}

/// [`divergence_scan`] for each `gamma`, annotated with the window.
pub fn gamma_sweep(
    spec: &SequenceSpec,
    gammas: &[f64],
    x_grid: &[f64],
    n_grid: &[u64],
    options: ScanOptions,
) -> Result<GammaSweep> {
    if gammas.is_empty() {
        return Err(Error::Domain("empty gamma grid".into()));
    }
    let eta_hat = irrational_type_estimate(&spec.beta, TYPE_ESTIMATE_Q_MAX)
        .ok()
        .map(|t| t.eta_hat);
    let window = eta_hat.map(|e| gamma_window(spec.j, e)).transpose()?;
    let p = prepare(spec, x_grid, n_grid)?;
    let scans = gammas
        .iter()
        .map(|&g| scan_prepared(&p, spec, g, x_grid, n_grid, options))
        .collect::<Result<Vec<_>>>()?;
    let in_window = gammas
        .iter()
        .map(|&g| window.map(|(lo, hi)| g > lo && g < hi))
        .collect();
    Ok(GammaSweep {
        eta_hat,
        window,
        scans,
        in_window,
    })
}
