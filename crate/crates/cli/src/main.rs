use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use itqde::assembly::WeightScheme;
use itqde::experiment::{
    self, preset, preset_names, preset_toml, EnsembleKind, MethodSpec, RunConfig, VerifyOptions,
};
use itqde::{ItqdeError, Result};

#[derive(Parser)]
#[command(name = "itqde", version, about = "Spectra and imaginary-time expectations from real-time overlaps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trajectory, curves, λ sweep, plateaus and analysis for one config.
    Run(RunArgs),
    /// Trajectory (and shot-noise errors) only.
    Sample(RunArgs),
    /// λ sweep over a stored trajectory.
    Sweep(SweepArgs),
    /// Operator-level checks for a config's Hamiltonian; one JSON record per line.
    Analyze(AnalyzeArgs),
    /// Invariant suites on a small TFIM chain.
    Verify(VerifyArgs),
    /// List presets, or print one as TOML.
    Presets { name: Option<String> },
}

#[derive(Args)]
struct Source {
    /// TOML run config.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset name.
    #[arg(long)]
    preset: Option<String>,
}

impl Source {
    fn load(&self) -> Result<RunConfig> {
        match (&self.config, &self.preset) {
            (Some(path), _) => RunConfig::read(path),
            (None, Some(name)) => preset(name),
            (None, None) => Err(ItqdeError::Parameter("give --config or --preset".into())),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EnsembleArg {
    Fixed,
    Basis,
    Clifford,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    ExactBinomial,
    GaussianAsymptotic,
}

impl From<SchemeArg> for WeightScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::ExactBinomial => WeightScheme::ExactBinomial,
            SchemeArg::GaussianAsymptotic => WeightScheme::GaussianAsymptotic,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dtau: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    #[arg(long)]
    window: Option<usize>,
    /// Shots per circuit; switches the method to sampled.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long, value_enum)]
    ensemble: Option<EnsembleArg>,
    #[arg(long)]
    ensemble_size: Option<usize>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut c = self.source.load()?;
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(d) = self.dtau {
            c.itqde.dtau = d;
        }
        if let Some(m) = self.m {
            c.itqde.m = m;
        }
        if let Some(s) = self.scheme {
            c.itqde.scheme = s.into();
        }
        if self.window.is_some() {
            c.itqde.window = self.window;
        }
        if self.shots.is_some() || self.ensemble.is_some() || self.ensemble_size.is_some() {
            let (shots, ensemble, ensemble_size, fixed_state, exact) = match &c.method {
                MethodSpec::Sampled { shots, ensemble, ensemble_size, fixed_state, exact_probabilities } => {
                    (Some(*shots), *ensemble, *ensemble_size, *fixed_state, *exact_probabilities)
                }
                _ => (None, EnsembleKind::Clifford, 1, 0, false),
            };
            let ensemble = match self.ensemble {
                Some(EnsembleArg::Fixed) => EnsembleKind::Fixed,
                Some(EnsembleArg::Basis) => EnsembleKind::Basis,
                Some(EnsembleArg::Clifford) => EnsembleKind::Clifford,
                None => ensemble,
            };
            let shots = self
                .shots
                .or(shots)
                .ok_or_else(|| ItqdeError::Config { path: "method.shots".into(), message: "pass --shots".into() })?;
            c.method = MethodSpec::Sampled {
                shots,
                ensemble,
                ensemble_size: self.ensemble_size.unwrap_or(ensemble_size),
                fixed_state,
                exact_probabilities: exact,
            };
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    trajectory: PathBuf,
    #[arg(long)]
    errors: Option<PathBuf>,
    #[arg(long, default_value = "H")]
    label: String,
    /// Explicit comma-separated λ values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["lambda_min", "lambda_max"])]
    lambda: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    lambda_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda_max: Option<f64>,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, value_enum, default_value = "exact-binomial")]
    scheme: SchemeArg,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    output: PathBuf,
}

impl SweepArgs {
    fn grid(&self) -> Result<Vec<f64>> {
        if let Some(v) = &self.lambda {
            return Ok(v.clone());
        }
        match (self.lambda_min, self.lambda_max) {
            (Some(lo), Some(hi)) if self.points >= 2 => Ok((0..self.points)
                .map(|i| lo + (hi - lo) * i as f64 / (self.points - 1) as f64)
                .collect()),
            (Some(lo), Some(_)) if self.points == 1 => Ok(vec![lo]),
            _ => Err(ItqdeError::Parameter(
                "give --lambda, or --lambda-min and --lambda-max with --points >= 1".into(),
            )),
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    source: Source,
    /// Write the records here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 3)]
    qubits: usize,
    #[arg(long, default_value_t = 20)]
    m: usize,
    #[arg(long, default_value_t = 1e-2)]
    dtau: f64,
    #[arg(long, default_value_t = itqde::model::DEFAULT_DENSE_LIMIT)]
    dense_limit: usize,
}

fn print_run(summary: &experiment::RunSummary) {
    println!("wrote {} files to {}", summary.files.len(), summary.directory.display());
    if let Some(est) = &summary.spectrum {
        println!("plateaus: {}", est.plateaus.len());
        for m in &summary.matches {
            println!(
                "  E = {:>14.8}  nearest exact {:>14.8}  zeta {:.2e}",
                m.energy, m.nearest_exact, m.zeta
            );
        }
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(args) => {
            let c = args.config()?;
            print_run(&experiment::run(&c, args.output.as_deref())?);
        }
        Command::Sample(args) => {
            let c = args.config()?;
            print_run(&experiment::sample(&c, args.output.as_deref())?);
        }
        Command::Sweep(args) => {
            let est = experiment::sweep_files(
                &args.trajectory,
                args.errors.as_deref(),
                &args.label,
                &args.grid()?,
                args.scheme.into(),
                args.window,
                &args.output,
            )?;
            println!("plateaus: {}", est.plateaus.len());
            for p in &est.plateaus {
                println!("  E = {:>14.8}  lambda in [{}, {}]", p.energy, p.lambda_min, p.lambda_max);
            }
        }
        Command::Analyze(args) => {
            let report = experiment::analyze_config(&args.source.load()?)?;
            if let Some(reason) = &report.skipped {
                eprintln!("operator checks skipped: {reason}");
            }
            let mut text = String::new();
            for r in report.records() {
                text.push_str(&serde_json::to_string(&r)?);
                text.push('\n');
            }
            write_or_print(args.output.as_deref(), &text)?;
        }
        Command::Verify(args) => {
            let report = experiment::verify(&VerifyOptions {
                qubits: args.qubits,
                m: args.m,
                dtau: args.dtau,
                dense_limit: args.dense_limit,
            })?;
            for s in &report.suites {
                let tag = if s.passed { "PASS" } else { "FAIL" };
                println!("{tag} {:<28} worst {:.3e}  tol {:.1e}", s.name, s.worst, s.tolerance);
            }
            if !report.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Presets { name } => match name {
            Some(n) => {
                let text = preset_toml(&n).ok_or_else(|| ItqdeError::Config {
                    path: "preset".into(),
                    message: format!("unknown preset {n:?}"),
                })?;
                print!("{text}");
            }
            None => {
                for n in preset_names() {
                    println!("{n}");
                }
            }
        },
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
