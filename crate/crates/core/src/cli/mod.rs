//! The `kicklab` command line: `discrepancy`, `weyl`, `spectrum`, `scount`
//! and `dynamics`. Each run writes its tables and a `manifest.json` to
//! `--out`, and is skipped when the manifest there already has the same hash.

mod commands;
mod output;
mod parse;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Serialize, Serializer};
use serde_json::Value as Json;

use crate::error::Error;
use crate::number_theory::RationalApprox;
use crate::spectral::DEFAULT_PRECISION_BITS;

pub use output::{
    params_hash, read_manifest, write_atomic, Artifact, Cell, ResultTable, RunManifest,
    MANIFEST_NAME,
};
pub use parse::{parse_beta, parse_n_grid, parse_real, parse_x_grid, CONSTANT_TERMS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_TOLERANCE: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_RESOURCE,
            CliError::Core(e) => match e {
                Error::Size(_) | Error::Resource(_) => EXIT_RESOURCE,
                Error::Unitarity { .. } | Error::Precision(_) | Error::Pole { .. } => EXIT_TOLERANCE,
                Error::Domain(_)
                | Error::Range(_)
                | Error::Ensemble(_)
                | Error::TrivialPerturbation(_)
                | Error::Provenance(_) => EXIT_USAGE,
            },
        }
    }
}

/// A parsed real parameter `beta`, hashed by the text it was given as.
#[derive(Debug, Clone)]
pub struct Beta {
    pub text: String,
    pub value: RationalApprox,
}

impl Serialize for Beta {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.text)
    }
}

fn beta(s: &str) -> Result<Beta, String> {
    Ok(Beta {
        text: s.trim().to_ascii_lowercase(),
        value: parse_beta(s)?,
    })
}

#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
pub struct Betas(pub Vec<Beta>);

fn betas(s: &str) -> Result<Betas, String> {
    s.split(',').map(beta).collect::<Result<_, _>>().map(Betas)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Sizes(pub Vec<u64>);

fn sizes(s: &str) -> Result<Sizes, String> {
    parse_n_grid(s).map(Sizes)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Reals(pub Vec<f64>);

fn reals(s: &str) -> Result<Reals, String> {
    parse::parse_real_list(s).map(Reals)
}

fn x_grid(s: &str) -> Result<Reals, String> {
    parse_x_grid(s).map(Reals)
}

#[derive(Debug, Parser)]
#[command(name = "kicklab", version, about = "Kicked-oscillator spectra and discrepancy experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Bits of pi used when converting spectrum coefficients to turns.
    #[arg(long, global = true, default_value_t = DEFAULT_PRECISION_BITS)]
    pub precision: u32,
    /// Recompute even if the output directory holds a matching run.
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact discrepancy of (n^j beta) with the Erdős–Turán bound and a log-log fit.
    Discrepancy(DiscrepancyArgs),
    /// Weyl sums over n^j beta.
    Weyl(WeylArgs),
    /// Eigenphases and spectral weights of the Floquet matrix.
    Spectrum(SpectrumArgs),
    /// Interval counts, #S(x) and lower bounds on B^{-1}(x) over a grid.
    Scount(ScountArgs),
    /// Survival amplitudes and energies under repeated kicks.
    Dynamics(DynamicsArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Discrepancy(_) => "discrepancy",
            Command::Weyl(_) => "weyl",
            Command::Spectrum(_) => "spectrum",
            Command::Scount(_) => "scount",
            Command::Dynamics(_) => "dynamics",
        }
    }

    fn params(&self) -> serde_json::Result<Json> {
        match self {
            Command::Discrepancy(a) => serde_json::to_value(a),
            Command::Weyl(a) => serde_json::to_value(a),
            Command::Spectrum(a) => serde_json::to_value(a),
            Command::Scount(a) => serde_json::to_value(a),
            Command::Dynamics(a) => serde_json::to_value(a),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct DiscrepancyArgs {
    #[arg(long, default_value_t = 1)]
    pub j: u32,
    /// `p/q`, a decimal, `golden`, `sqrt2` or `liouville`.
    #[arg(long, value_parser = beta)]
    pub beta: Beta,
    /// `a:b:k` (log-spaced) or a comma list.
    #[arg(long, value_parser = sizes)]
    pub n_grid: Sizes,
    /// Erdős–Turán cutoff.
    #[arg(long, default_value_t = 64)]
    pub m: u32,
}

#[derive(Debug, Args, Serialize)]
pub struct WeylArgs {
    #[arg(long, default_value_t = 1)]
    pub j: u32,
    #[arg(long, value_parser = beta)]
    pub beta: Beta,
    #[arg(long, value_parser = sizes)]
    pub n_grid: Sizes,
    /// Frequencies `h`.
    #[arg(long, default_value = "1", value_parser = sizes)]
    pub h: Sizes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KickKind {
    /// `a_n ~ n^(-gamma)` on interleaved residue classes.
    PowerLaw,
    /// Equal weights on every index, rank 1 only.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConventionArg {
    Additive,
    Product,
}

#[derive(Debug, Args, Serialize)]
pub struct SystemArgs {
    /// Turns `t_j` with `alpha_n T / (2 pi hbar) = sum_j t_j n^j`.
    #[arg(long, value_parser = betas, conflicts_with = "beta")]
    pub turns: Option<Betas>,
    /// Coefficients `beta_j` of `alpha_n = hbar sum_j beta_j n^j`.
    #[arg(long, value_parser = betas)]
    pub beta: Option<Betas>,
    #[arg(long, default_value = "1", value_parser = parse_real)]
    pub hbar: f64,
    #[arg(long, default_value = "1", value_parser = parse_real)]
    pub period: f64,
    #[arg(long, default_value_t = 1)]
    pub rank: usize,
    #[arg(long, default_value = "0.75", value_parser = parse_real)]
    pub gamma: f64,
    /// Kick strengths, one per state; accepts `pi` forms such as `pi/2`.
    #[arg(long, value_parser = reals)]
    pub lambdas: Option<Reals>,
    #[arg(long)]
    pub dim: usize,
    #[arg(long, value_enum, default_value = "power-law")]
    pub kick_state: KickKind,
    #[arg(long, value_enum, default_value = "additive")]
    pub convention: ConventionArg,
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct DynamicsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    #[arg(long)]
    pub kicks: usize,
    /// Kick state the evolution starts from; without kicks, the basis index.
    #[arg(long, default_value_t = 0)]
    pub start: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantArg {
    Combescure,
    Bourget,
}

#[derive(Debug, Args, Serialize)]
pub struct ScountArgs {
    #[arg(long, default_value_t = 1)]
    pub j: u32,
    #[arg(long, value_parser = beta)]
    pub beta: Beta,
    /// One exponent or a comma list, each in (1/2, 1].
    #[arg(long, value_parser = reals)]
    pub gamma: Reals,
    /// `default`, `default:K`, or a comma list in (0, 2 pi).
    #[arg(long, default_value = "default", value_parser = x_grid)]
    pub x_grid: Reals,
    #[arg(long, value_parser = sizes)]
    pub n_grid: Sizes,
    #[arg(long, value_enum, default_value = "combescure")]
    pub variant: VariantArg,
    #[arg(long, default_value = "0.01", value_parser = parse_real)]
    pub delta: f64,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Canonical parameters of a run: every flag except `--out`, `--threads`
/// and `--force`, which do not change the outputs.
pub fn run_params(cli: &Cli) -> BTreeMap<String, Json> {
    let mut params: BTreeMap<String, Json> = match cli.command.params().expect("serializable args") {
        Json::Object(m) => m.into_iter().collect(),
        _ => unreachable!("args serialize as maps"),
    };
    params.insert("precision".into(), Json::from(cli.precision));
    params
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    let out = cli
        .out
        .clone()
        .ok_or_else(|| CliError::Usage("--out DIR is required".into()))?;
    let command = cli.command.name();
    let params = run_params(cli);
    let hash = params_hash(command, &params);
    if !cli.force {
        if let Some(m) = output::cached(&out, &hash) {
            println!("{command}: reusing {} ({hash})", out.display());
            return Ok(m.exit_code);
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let outcome = pool.install(|| commands::dispatch(&cli.command, cli.precision))?;

    fs::create_dir_all(&out)?;
    let mut units = BTreeMap::new();
    for a in &outcome.artifacts {
        write_atomic(&out.join(&a.name), &a.bytes)?;
        if !a.units.is_empty() {
            units.insert(a.name.clone(), a.units.clone());
        }
    }
    let manifest = RunManifest {
        command: command.to_string(),
        params,
        hash: hash.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339(),
        outputs: outcome.artifacts.iter().map(|a| a.name.clone()).collect(),
        units,
        exit_code: outcome.exit_code,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).expect("serializable manifest");
    bytes.push(b'\n');
    write_atomic(&out.join(MANIFEST_NAME), &bytes)?;
    for note in &outcome.notes {
        println!("{command}: {note}");
    }
    println!("{command}: wrote {} ({hash})", out.display());
    Ok(outcome.exit_code)
}
