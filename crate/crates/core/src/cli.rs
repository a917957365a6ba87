//! Command-line front end.
//!
//! Every command writes its outputs to explicit paths and drops a
//! `<output>.manifest.json` next to the primary output. Errors map onto the
//! exit codes of [`Error::exit_code`].

use std::f64::consts::PI;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::autocorr::{estimate_autocorr, AutocorrTable, Provenance};
use crate::convergence::{default_step, sweep, MomentSource, SweepConfig};
use crate::error::{Error, Result};
use crate::koopman::{alignment, estimate_frequency};
use crate::operator::{build_kernel, kernel_spectrum, SolverPath};
use crate::signal::{analytic_table, synthesize, SignalSpec, TimeSeries};

#[derive(Debug, Parser)]
#[command(name = "ssa-koopman", version, about = "Spectra of autocorrelation operators and Koopman mode energies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a time series from a signal spec and write it as CSV.
    Generate {
        /// Signal spec (JSON).
        #[arg(long)]
        spec: PathBuf,
        /// Output CSV (`t,re,im`).
        #[arg(long)]
        out: PathBuf,
        /// Overrides the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Tabulate lagged moments rho(k dt) for k < lags.
    Autocorr {
        #[command(flatten)]
        input: InputArgs,
        /// Number of lags.
        #[arg(long)]
        lags: usize,
        /// Lag step for analytic tables (defaults to the spec's dt).
        #[arg(long)]
        dt: Option<f64>,
        /// Output CSV (`lag,re,im`); the sidecar goes to the same path with a `.json` extension.
        #[arg(long)]
        out: PathBuf,
    },
    /// Top eigenpairs of the kernel for one window.
    Analyze {
        #[command(flatten)]
        input: InputArgs,
        /// Window length tau.
        #[arg(long)]
        tau: f64,
        /// Kernel size N; the quadrature step is tau / N.
        #[arg(long)]
        n: usize,
        /// Number of eigenpairs reported.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Quadrature step; must equal tau / N when given.
        #[arg(long)]
        dt: Option<f64>,
        /// Output JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Eigenvalues along a ladder of windows, with oracle and truth columns.
    Sweep {
        /// Signal spec (JSON).
        #[arg(long)]
        spec: PathBuf,
        /// Comma-separated ascending windows, e.g. `50,100,200`.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        ladder: Vec<f64>,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Fixed quadrature step. Defaults to the spec's dt with
        /// `--empirical`, else min(0.1, pi / (4 max |x|)).
        #[arg(long)]
        dt: Option<f64>,
        /// Include Gram-oracle columns in the CSV.
        #[arg(long)]
        oracle: bool,
        /// Estimate moments from a synthesized path instead of the closed form.
        #[arg(long)]
        empirical: bool,
        #[arg(long)]
        seed: Option<u64>,
        /// Output JSON report; the CSV goes to the same path with a `.csv` extension.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Signal spec (`.json`) or sampled series (`.csv`).
    #[arg(long)]
    pub input: PathBuf,
    /// Use closed-form moments (spec input only; default for specs).
    #[arg(long, conflicts_with = "empirical")]
    pub analytic: bool,
    /// Estimate moments from samples (synthesized for spec input).
    #[arg(long)]
    pub empirical: bool,
    /// Overrides the spec's seed when synthesizing.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Provenance record written next to each primary output.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub config: Value,
    pub seed: Option<u64>,
    pub version: String,
    pub started_unix: f64,
    pub wall_clock_seconds: f64,
}

enum Moments {
    Analytic(SignalSpec),
    Series {
        series: TimeSeries,
        spec: Option<SignalSpec>,
    },
}

fn load_moments(input: &InputArgs) -> Result<Moments> {
    let is_csv = input
        .input
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        if input.analytic {
            return Err(Error::invalid("--analytic needs a spec, not a series CSV"));
        }
        return Ok(Moments::Series {
            series: TimeSeries::load(&input.input)?,
            spec: None,
        });
    }
    let mut spec = SignalSpec::load(&input.input)?;
    if let Some(seed) = input.seed {
        spec.seed = seed;
    }
    if input.empirical {
        Ok(Moments::Series {
            series: synthesize(&spec),
            spec: Some(spec),
        })
    } else {
        Ok(Moments::Analytic(spec))
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn sibling(path: &Path, extension: &str) -> PathBuf {
    path.with_extension(extension)
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(OsString::from).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

struct Run {
    command: &'static str,
    started: SystemTime,
    clock: Instant,
}

impl Run {
    fn start(command: &'static str) -> Self {
        Run {
            command,
            started: SystemTime::now(),
            clock: Instant::now(),
        }
    }

    fn finish(self, inputs: &[&Path], outputs: &[&Path], config: Value, seed: Option<u64>) -> Result<()> {
        let primary = outputs[0];
        let manifest = manifest_path(primary);
        let mut listed: Vec<String> = outputs.iter().map(|p| p.display().to_string()).collect();
        listed.push(manifest.display().to_string());
        let record = RunManifest {
            command: self.command.to_string(),
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            outputs: listed,
            config,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: self
                .started
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs_f64())
                .unwrap_or(0.0),
            wall_clock_seconds: self.clock.elapsed().as_secs_f64(),
        };
        write(&manifest, &serde_json::to_string_pretty(&record).expect("manifest serializes"))
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> std::result::Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(CliError::Usage)?;
    execute(cli.command).map_err(CliError::Run)
}

#[derive(Debug)]
pub enum CliError {
    Usage(clap::Error),
    Run(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) if !e.use_stderr() => 0,
            CliError::Usage(_) => 2,
            CliError::Run(e) => e.exit_code(),
        }
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Generate { spec, out, seed } => generate(&spec, &out, seed),
        Command::Autocorr {
            input,
            lags,
            dt,
            out,
        } => autocorr(&input, lags, dt, &out),
        Command::Analyze {
            input,
            tau,
            n,
            k,
            dt,
            out,
        } => analyze(&input, tau, n, k, dt, &out),
        Command::Sweep {
            spec,
            ladder,
            k,
            dt,
            oracle,
            empirical,
            seed,
            out,
        } => run_sweep(&spec, ladder, k, dt, oracle, empirical, seed, &out),
    }
}

fn generate(spec_path: &Path, out: &Path, seed: Option<u64>) -> Result<()> {
    let run = Run::start("generate");
    let mut spec = SignalSpec::load(spec_path)?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    write(out, &synthesize(&spec).to_csv())?;
    run.finish(
        &[spec_path],
        &[out],
        json!({ "spec_hash": spec.content_hash() }),
        Some(spec.seed),
    )
}

fn autocorr(input: &InputArgs, lags: usize, dt: Option<f64>, out: &Path) -> Result<()> {
    let run = Run::start("autocorr");
    let (table, seed): (AutocorrTable, Option<u64>) = match load_moments(input)? {
        Moments::Analytic(spec) => {
            let step = dt.unwrap_or(spec.sample_step());
            (analytic_table(&spec, step, lags)?, Some(spec.seed))
        }
        Moments::Series { series, spec } => {
            if dt.is_some_and(|d| (d - series.sample_step()).abs() > 1e-12 * d) {
                return Err(Error::invalid("--dt must match the series sample step"));
            }
            (estimate_autocorr(&series, lags)?, spec.map(|s| s.seed))
        }
    };
    let sidecar = sibling(out, "json");
    write(out, &table.to_csv())?;
    write(&sidecar, &table.sidecar_json())?;
    run.finish(
        &[&input.input],
        &[out, &sidecar],
        json!({ "lags": lags, "lag_step": table.lag_step(), "empirical": input.empirical }),
        seed,
    )
}

fn analyze(input: &InputArgs, tau: f64, n: usize, k: usize, dt: Option<f64>, out: &Path) -> Result<()> {
    let run = Run::start("analyze");
    if n == 0 {
        return Err(Error::invalid("--n must be positive"));
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!("--k must lie in 1..={n}, got {k}")));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid("--tau must be positive"));
    }
    let step = tau / n as f64;
    if let Some(dt) = dt {
        if (dt - step).abs() > 1e-9 * step {
            return Err(Error::invalid(format!("--dt {dt} disagrees with tau / n = {step}")));
        }
    }
    let (table, seed) = match load_moments(input)? {
        Moments::Analytic(spec) => (analytic_table(&spec, step, n.max(2))?, Some(spec.seed)),
        Moments::Series { series, spec } => {
            let ratio = step / series.sample_step();
            let stride = ratio.round();
            if stride < 1.0 || (ratio - stride).abs() > 1e-9 * ratio {
                return Err(Error::invalid(format!(
                    "tau / n = {step} is not a multiple of the series sample step {}",
                    series.sample_step()
                )));
            }
            let stride = stride as usize;
            (
                estimate_autocorr(&series, ((n - 1) * stride + 1).max(2))?,
                spec.map(|s| s.seed),
            )
        }
    };
    let kernel = build_kernel(&table, tau, n)?;
    let spectrum = kernel_spectrum(&kernel, k)?;
    let band = (-PI / step, PI / step);
    let mut frequencies = Vec::with_capacity(k);
    let mut alignments = Vec::with_capacity(k);
    for v in &spectrum.top.eigenvectors {
        let x = estimate_frequency(v, step, band)?;
        alignments.push(alignment(v, x, step)?);
        frequencies.push(x);
    }
    let solver = match spectrum.path {
        SolverPath::DenseJacobi => json!({ "kind": "jacobi" }),
        SolverPath::Lanczos {
            iterations,
            converged,
        } => json!({ "kind": "lanczos", "iterations": iterations, "converged": converged }),
    };
    let report = json!({
        "tau": tau,
        "n": n,
        "step": step,
        "eigenvalues": spectrum.top.eigenvalues,
        "alignments": alignments,
        "frequencies": frequencies,
        "solver": solver,
    });
    write(out, &serde_json::to_string_pretty(&report).expect("report serializes"))?;
    run.finish(
        &[&input.input],
        &[out],
        json!({ "tau": tau, "n": n, "k": k, "empirical": matches!(table.provenance(), Provenance::Empirical { .. }) }),
        seed,
    )
}

#[allow(clippy::too_many_arguments)]
fn run_sweep(
    spec_path: &Path,
    ladder: Vec<f64>,
    k: usize,
    dt: Option<f64>,
    oracle: bool,
    empirical: bool,
    seed: Option<u64>,
    out: &Path,
) -> Result<()> {
    let run = Run::start("sweep");
    let mut spec = SignalSpec::load(spec_path)?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    let step = dt.unwrap_or_else(|| {
        if empirical {
            spec.sample_step()
        } else {
            default_step(&spec)
        }
    });
    let source = if empirical {
        MomentSource::Empirical {
            series: synthesize(&spec),
            spec: Some(spec.clone()),
        }
    } else {
        MomentSource::Analytic(spec.clone())
    };
    let config = SweepConfig {
        tau_ladder: ladder.clone(),
        step,
        k,
        source,
    };
    let report = sweep(&config)?;
    let csv = sibling(out, "csv");
    write(out, &report.to_json())?;
    write(&csv, &report.to_csv(oracle))?;
    run.finish(
        &[spec_path],
        &[out, &csv],
        json!({ "ladder": ladder, "k": k, "step": step, "oracle": oracle, "empirical": empirical }),
        Some(spec.seed),
    )
}
