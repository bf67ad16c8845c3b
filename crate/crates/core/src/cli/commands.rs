use rayon::prelude::*;
use serde::Serialize;

use super::output::{Artifact, Cell, ResultTable};
use super::{
    CliError, Command, ConventionArg, DiscrepancyArgs, DynamicsArgs, KickKind, ScountArgs,
    SpectrumArgs, SystemArgs, VariantArg, WeylArgs, EXIT_OK, EXIT_TOLERANCE,
};
use crate::error::Error;
use crate::experiments::{gamma_sweep, ScanOptions, Variant};
use crate::floquet::{
    build_floquet, eigen_decompose, evolve, unitarity_defect, wiener_average, Convention,
    FloquetMatrix, MAX_DIM, UNITARITY_TOLERANCE,
};
use crate::number_theory::{
    discrepancy_report, irrational_type_estimate, sequence_points, weyl_sum, SequenceSpec,
    TYPE_ESTIMATE_Q_MAX,
};
use crate::spectral::{
    cotangent_residual, orthonormal_ensemble, BaseSpectrum, KickEnsemble,
    KickState, Support,
};

pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub exit_code: i32,
    pub notes: Vec<String>,
}

/// Largest `|cotangent residual|` accepted for a rank-one spectrum.
pub const COT_RESIDUAL_TOLERANCE: f64 = 1e-6;
/// Largest accepted gap between the Cesàro mean and the squared point masses.
pub const WIENER_TOLERANCE: f64 = 0.02;
/// Levels with less weight than this are treated as decoupled from the kick.
const DECOUPLED_WEIGHT: f64 = 1e-10;

pub fn dispatch(command: &Command, precision: u32) -> Result<Outcome, CliError> {
    match command {
        Command::Discrepancy(a) => discrepancy(a),
        Command::Weyl(a) => weyl(a),
        Command::Spectrum(a) => spectrum(a, precision),
        Command::Scount(a) => scount(a),
        Command::Dynamics(a) => dynamics(a, precision),
    }
}

fn sequence(j: u32, beta: &super::Beta) -> Result<SequenceSpec, CliError> {
    Ok(SequenceSpec::new(j, beta.value.clone(), beta.text.clone())?)
}

fn eta_hat(spec: &SequenceSpec) -> Option<f64> {
    irrational_type_estimate(&spec.beta, TYPE_ESTIMATE_Q_MAX)
        .ok()
        .map(|t| t.eta_hat)
}

#[derive(Serialize)]
struct DiscrepancySummary {
    label: String,
    j: u32,
    m: u32,
    slope: f64,
    intercept: f64,
    eta_hat: Option<f64>,
    predicted_exponent: Option<f64>,
}

fn discrepancy(a: &DiscrepancyArgs) -> Result<Outcome, CliError> {
    let spec = sequence(a.j, &a.beta)?;
    let grid = &a.n_grid.0;
    let n_max = *grid.last().expect("nonempty grid");
    let points = sequence_points(&spec, n_max)?;
    let reports = grid
        .par_iter()
        .map(|&n| discrepancy_report(&points[..n as usize], a.m))
        .collect::<crate::Result<Vec<_>>>()?;

    let mut table = ResultTable::new(&[("N", ""), ("D_N", ""), ("ET_bound", "")]);
    let mut logs = Vec::new();
    for r in &reports {
        table.push(vec![
            Cell::UInt(r.n_points as u64),
            r.d_n.into(),
            r.et_bound.unwrap_or(f64::NAN).into(),
        ]);
        if r.d_n > 0.0 {
            logs.push(((r.n_points as f64).ln(), r.d_n.ln()));
        }
    }
    let (slope, intercept) = if logs.len() >= 2 {
        let s = crate::number_theory::least_squares_slope(&logs);
        let n = logs.len() as f64;
        let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
        let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
        (s, my - s * mx)
    } else {
        (f64::NAN, f64::NAN)
    };
    table.push(vec!["slope".into(), slope.into(), intercept.into()]);

    let eta = eta_hat(&spec);
    let summary = DiscrepancySummary {
        label: spec.label.clone(),
        j: spec.j,
        m: a.m,
        slope,
        intercept,
        eta_hat: eta,
        predicted_exponent: eta.map(|e| -1.0 / (e * spec.j as f64)),
    };
    Ok(Outcome {
        artifacts: vec![
            Artifact::csv("discrepancy.csv", &table),
            Artifact::json("summary.json", &summary),
        ],
        exit_code: EXIT_OK,
        notes: vec![format!("fitted slope {slope}")],
    })
}

fn weyl(a: &WeylArgs) -> Result<Outcome, CliError> {
    let spec = sequence(a.j, &a.beta)?;
    let jobs: Vec<(u64, u64)> = a
        .n_grid
        .0
        .iter()
        .flat_map(|&n| a.h.0.iter().map(move |&h| (n, h)))
        .collect();
    let sums = jobs
        .par_iter()
        .map(|&(n, h)| weyl_sum(&spec, h, n))
        .collect::<crate::Result<Vec<_>>>()?;
    let mut table = ResultTable::new(&[
        ("N", ""),
        ("h", ""),
        ("re", ""),
        ("im", ""),
        ("modulus", ""),
        ("modulus_over_N", ""),
    ]);
    for (&(n, h), s) in jobs.iter().zip(&sums) {
        table.push(vec![
            n.into(),
            h.into(),
            s.value.re.into(),
            s.value.im.into(),
            s.modulus.into(),
            (s.modulus / n as f64).into(),
        ]);
    }
    Ok(Outcome {
        artifacts: vec![Artifact::csv("weyl.csv", &table)],
        exit_code: EXIT_OK,
        notes: Vec::new(),
    })
}

fn build_system(s: &SystemArgs, precision: u32) -> Result<FloquetMatrix, CliError> {
    if s.dim < 2 {
        return Err(CliError::Usage("--dim must be at least 2".into()));
    }
    if s.dim > MAX_DIM {
        return Err(Error::Resource(format!("dim = {} exceeds {MAX_DIM}", s.dim)).into());
    }
    let spectrum = match (&s.turns, &s.beta) {
        (Some(t), None) => BaseSpectrum::from_turns(
            t.0.iter().map(|b| b.value.clone()).collect(),
            s.hbar,
            s.period,
        )?,
        (None, Some(b)) => BaseSpectrum::new(
            b.0.iter().map(|b| b.value.clone()).collect(),
            s.hbar,
            s.period,
            precision,
        )?,
        _ => return Err(CliError::Usage("give exactly one of --turns or --beta".into())),
    };
    let lambdas = s.lambdas.as_ref().map(|l| l.0.clone()).unwrap_or_default();
    if lambdas.len() != s.rank {
        return Err(CliError::Usage(format!(
            "--rank {} needs {} strengths in --lambdas, got {}",
            s.rank,
            s.rank,
            lambdas.len()
        )));
    }
    let ensemble = match (s.kick_state, s.rank) {
        (_, 0) => KickEnsemble::empty(s.hbar)?,
        (KickKind::PowerLaw, r) => orthonormal_ensemble(s.gamma, r, s.dim, &lambdas, s.hbar)?,
        (KickKind::Uniform, 1) => KickEnsemble::new(vec![uniform_state(s.dim)?], lambdas, s.hbar)?,
        (KickKind::Uniform, _) => {
            return Err(CliError::Usage("--kick-state uniform supports rank 1 only".into()))
        }
    };
    let convention = match s.convention {
        ConventionArg::Additive => Convention::AdditiveRk,
        ConventionArg::Product => Convention::ExponentialProduct,
    };
    Ok(build_floquet(&spectrum, &ensemble, s.dim, convention)?)
}

fn uniform_state(dim: usize) -> crate::Result<KickState> {
    KickState::uniform(dim, &Support::Explicit((0..dim).collect()))
}

#[derive(Serialize)]
struct SpectrumSummary {
    dim: usize,
    rank: usize,
    convention: Convention,
    unitarity_defect: f64,
    unitarity_tolerance: f64,
    max_modulus_defect: f64,
    max_off_diagonal: f64,
    max_cot_residual: Option<f64>,
    cot_residual_tolerance: f64,
    truncated_weights: Vec<f64>,
}

fn spectrum(a: &SpectrumArgs, precision: u32) -> Result<Outcome, CliError> {
    let v = build_floquet_checked(&a.system, precision)?;
    let d = eigen_decompose(&v)?;
    let rank = v.ensemble().rank();

    let residuals: Option<Vec<f64>> = if rank == 1 {
        // The product convention with lambda has the additive spectrum at -lambda.
        let sign = match v.convention() {
            Convention::AdditiveRk => 1.0,
            Convention::ExponentialProduct => -1.0,
        };
        let l = sign * v.ensemble().lambda_over_hbar(0);
        let state = &v.ensemble().states()[0];
        let phi = v.theta().unperturbed_eigenphases();
        let r = d
            .eigenphases()
            .iter()
            .zip(&d.weights()[0])
            .map(|(&x, &w)| {
                if w <= DECOUPLED_WEIGHT {
                    return Ok(f64::NAN);
                }
                match cotangent_residual(x, state, &phi, l) {
                    Ok(r) => Ok(r),
                    Err(Error::Pole { .. }) => Ok(f64::NAN),
                    Err(e) => Err(e),
                }
            })
            .collect::<crate::Result<Vec<_>>>()?;
        Some(r)
    } else {
        None
    };

    let mut columns: Vec<(String, &str)> = vec![("index".into(), ""), ("eigenphase".into(), "rad")];
    columns.extend((0..rank).map(|k| (format!("weight_{k}"), "")));
    if residuals.is_some() {
        columns.push(("cot_residual".into(), ""));
    }
    let cols: Vec<(&str, &str)> = columns.iter().map(|(n, u)| (n.as_str(), *u)).collect();
    let mut table = ResultTable::new(&cols);
    for (i, &x) in d.eigenphases().iter().enumerate() {
        let mut row = vec![Cell::from(i), x.into()];
        row.extend(d.weights().iter().map(|w| Cell::from(w[i])));
        if let Some(r) = &residuals {
            row.push(r[i].into());
        }
        table.push(row);
    }

    let max_cot_residual = residuals.as_ref().map(|r| {
        r.iter()
            .filter(|v| v.is_finite())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    });
    let diag = d.diagnostics();
    let summary = SpectrumSummary {
        dim: v.dim(),
        rank,
        convention: v.convention(),
        unitarity_defect: unitarity_defect(v.entries()),
        unitarity_tolerance: UNITARITY_TOLERANCE * v.dim() as f64,
        max_modulus_defect: diag.max_modulus_defect,
        max_off_diagonal: diag.max_off_diagonal,
        max_cot_residual,
        cot_residual_tolerance: COT_RESIDUAL_TOLERANCE,
        truncated_weights: v.ensemble().states().iter().map(|s| s.truncated_weight()).collect(),
    };
    let mut notes = vec![format!("unitarity defect {:e}", summary.unitarity_defect)];
    let mut exit_code = EXIT_OK;
    if let Some(r) = max_cot_residual {
        notes.push(format!("max |cotangent residual| {r:e}"));
        if r > COT_RESIDUAL_TOLERANCE {
            exit_code = EXIT_TOLERANCE;
        }
    }
    Ok(Outcome {
        artifacts: vec![
            Artifact::csv("eigenphases.csv", &table),
            Artifact::json("summary.json", &summary),
        ],
        exit_code,
        notes,
    })
}

fn build_floquet_checked(s: &SystemArgs, precision: u32) -> Result<FloquetMatrix, CliError> {
    if !(s.hbar > 0.0) || !(s.period > 0.0) {
        return Err(CliError::Usage("--hbar and --period must be positive".into()));
    }
    build_system(s, precision)
}

#[derive(Serialize)]
struct DynamicsSummary {
    dim: usize,
    rank: usize,
    start: usize,
    kicks: usize,
    final_energy: f64,
    cesaro_mean: f64,
    point_mass_sum: Option<f64>,
    difference: Option<f64>,
    tolerance: f64,
    within_tolerance: Option<bool>,
}

fn dynamics(a: &DynamicsArgs, precision: u32) -> Result<Outcome, CliError> {
    if a.kicks == 0 {
        return Err(CliError::Usage("--kicks must be at least 1".into()));
    }
    let v = build_floquet_checked(&a.system, precision)?;
    let rank = v.ensemble().rank();
    if rank > 0 && a.start >= rank {
        return Err(CliError::Usage(format!("--start {} but rank is {rank}", a.start)));
    }
    if rank == 0 && a.start >= v.dim() {
        return Err(CliError::Usage(format!("--start {} outside the basis", a.start)));
    }
    // Without kicks the run starts from the basis state |phi_start>.
    let state = if rank > 0 {
        v.ensemble().states()[a.start].clone()
    } else {
        KickState::uniform(v.dim(), &Support::Explicit(vec![a.start]))?
    };
    let trace = evolve(&v, &state, a.kicks)?;
    let survival = trace.survival();
    let cesaro = trace.running_cesaro();
    let mut table = ResultTable::new(&[
        ("n", ""),
        ("survival", ""),
        ("energy", "energy"),
        ("cesaro_mean", ""),
    ]);
    for n in 1..=a.kicks {
        table.push(vec![
            n.into(),
            survival[n].into(),
            trace.energies[n].into(),
            cesaro[n - 1].into(),
        ]);
    }
    let cesaro_mean = *cesaro.last().expect("kicks >= 1");
    let point_mass_sum = if rank > 0 {
        let d = eigen_decompose(&v)?;
        Some(wiener_average(&trace, &d, a.start)?.point_mass_sum)
    } else {
        None
    };
    let difference = point_mass_sum.map(|p| (cesaro_mean - p).abs());
    let summary = DynamicsSummary {
        dim: v.dim(),
        rank,
        start: a.start,
        kicks: a.kicks,
        final_energy: trace.energies[a.kicks],
        cesaro_mean,
        point_mass_sum,
        difference,
        tolerance: WIENER_TOLERANCE,
        within_tolerance: difference.map(|d| d <= WIENER_TOLERANCE),
    };
    let mut notes = vec![format!("Cesàro mean {cesaro_mean}")];
    if let Some(p) = point_mass_sum {
        notes.push(format!("sum of squared point masses {p}"));
    }
    Ok(Outcome {
        artifacts: vec![
            Artifact::csv("dynamics.csv", &table),
            Artifact::json("summary.json", &summary),
        ],
        exit_code: EXIT_OK,
        notes,
    })
}

#[derive(Serialize)]
struct SeriesSummary {
    x: f64,
    s_counts: Vec<u64>,
    label: &'static str,
}

#[derive(Serialize)]
struct GammaSummary {
    gamma: f64,
    window_annotation: &'static str,
    inequality_holds: bool,
    bounds_hold: bool,
    invalid_cells: usize,
    series: Vec<SeriesSummary>,
}

#[derive(Serialize)]
struct ScountSummary {
    label: String,
    j: u32,
    variant: Variant,
    delta: f64,
    n_grid: Vec<u64>,
    eta_hat: Option<f64>,
    window: Option<(f64, f64)>,
    gammas: Vec<GammaSummary>,
}

fn scount(a: &ScountArgs) -> Result<Outcome, CliError> {
    if let Some(g) = a.gamma.0.iter().find(|&&g| !(g > 0.5 && g <= 1.0)) {
        return Err(CliError::Usage(format!("gamma = {g} outside (1/2, 1]")));
    }
    let spec = sequence(a.j, &a.beta)?;
    let options = ScanOptions {
        variant: match a.variant {
            VariantArg::Combescure => Variant::Combescure,
            VariantArg::Bourget => Variant::Bourget,
        },
        delta: a.delta,
    };
    let sweep = gamma_sweep(&spec, &a.gamma.0, &a.x_grid.0, &a.n_grid.0, options)?;

    let mut table = ResultTable::new(&[
        ("gamma", ""),
        ("x_index", ""),
        ("x", "rad"),
        ("N", ""),
        ("interval_valid", ""),
        ("A", ""),
        ("lhs", ""),
        ("lhs_measure", ""),
        ("rhs", ""),
        ("D_N", ""),
        ("holds", ""),
        ("S", ""),
        ("S_bourget", ""),
        ("B_inverse_partial", ""),
        ("bound_4S", ""),
        ("bound_bourget", ""),
        ("bounds_hold", ""),
    ]);
    let mut gammas = Vec::new();
    let mut all_ok = true;
    for (scan, in_window) in sweep.scans.iter().zip(&sweep.in_window) {
        for c in &scan.cells {
            let r = &c.report;
            table.push(vec![
                c.gamma.into(),
                c.x_index.into(),
                c.x.into(),
                r.n.into(),
                r.interval_valid.into(),
                r.a_count.into(),
                r.lhs.into(),
                r.lhs_measure.into(),
                r.rhs.into(),
                c.d_n.into(),
                match r.holds {
                    Some(h) => h.into(),
                    None => "n/a".into(),
                },
                r.s_count.unwrap_or(0).into(),
                c.s_bourget_count.into(),
                c.b_inverse_value().into(),
                c.bound_combescure.into(),
                c.bound_bourget.into(),
                c.bounds_hold.into(),
            ]);
        }
        let inequality_holds = scan.inequality_holds();
        let bounds_hold = scan.cells.iter().all(|c| c.bounds_hold);
        all_ok &= inequality_holds && bounds_hold;
        gammas.push(GammaSummary {
            gamma: scan.gamma,
            window_annotation: match in_window {
                Some(true) => "inside-window",
                Some(false) => "outside-window",
                None => "no-window",
            },
            inequality_holds,
            bounds_hold,
            invalid_cells: scan.cells.iter().filter(|c| !c.report.interval_valid).count(),
            series: scan
                .series
                .iter()
                .map(|s| SeriesSummary {
                    x: s.x,
                    s_counts: s.s_counts.clone(),
                    label: s.label.as_str(),
                })
                .collect(),
        });
    }
    let summary = ScountSummary {
        label: spec.label.clone(),
        j: spec.j,
        variant: options.variant,
        delta: options.delta,
        n_grid: a.n_grid.0.clone(),
        eta_hat: sweep.eta_hat,
        window: sweep.window,
        gammas,
    };
    let notes = summary
        .gammas
        .iter()
        .map(|g| {
            let labels: Vec<&str> = g.series.iter().map(|s| s.label).collect();
            format!("gamma {} ({}): {}", g.gamma, g.window_annotation, labels.join(" "))
        })
        .collect();
    Ok(Outcome {
        artifacts: vec![
            Artifact::csv("cells.csv", &table),
            Artifact::json("summary.json", &summary),
        ],
        exit_code: if all_ok { EXIT_OK } else { EXIT_TOLERANCE },
        notes,
    })
}
