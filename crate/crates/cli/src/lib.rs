//! `coherence-lab`: configuration, orchestration and artifact writing for
//! the simulator in `coherence-core`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod fit;
pub mod output;
pub mod pipelines;
pub mod plot;
pub mod reproduce;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{annotated_schema, RunConfig};
use crate::error::CliError;
use crate::output::{write_click_file, write_outcome, write_text};

#[derive(Debug, Parser)]
#[command(name = "coherence-lab", version, about = "Simulate and fit pulsed resonant spectroscopy of a two-level emitter")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML run configuration; unspecified keys take their defaults.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads. Results do not depend on this.
    #[arg(long, global = true, env = "COHERENCE_LAB_WORKERS")]
    pub workers: Option<usize>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub plot: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one synthetic experiment and fit it.
    Simulate(SimulateArgs),
    /// Fit a model to a curvedata CSV file.
    Fit(FitArgs),
    /// Run every pipeline with the built-in reference configuration and compare.
    ReproducePaper,
    /// Print every configuration key with its default, unit and meaning.
    Schema {
        /// Accepted for compatibility; printing is the only action.
        #[arg(long)]
        print: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Lifetime,
    Rabi,
    Ple,
    Ramsey,
    G2,
    Laser,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub experiment: Experiment,
    /// HBT pulse count (g2 only); accepts forms such as 1e7.
    #[arg(long, value_parser = parse_count)]
    pub pulses: Option<u64>,
    /// Write the raw click stream here (g2 only).
    #[arg(long, value_name = "PATH")]
    pub clicks: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitKind {
    Exp,
    Rabi,
    Sinusoid,
    RamseyEnvelope,
    Lorentzian,
    Voigt,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    pub model: FitKind,
    #[arg(long, value_name = "CSV")]
    pub input: PathBuf,
    /// Add a constant floor to the Gaussian envelope (ramsey-envelope only).
    #[arg(long)]
    pub floor: bool,
}

fn parse_count(s: &str) -> Result<u64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !(v >= 1.0 && v.is_finite() && v.fract() == 0.0 && v <= 9.0e15) {
        return Err(format!("`{s}` is not a positive whole count"));
    }
    Ok(v as u64)
}

impl Experiment {
    fn name(self) -> &'static str {
        match self {
            Experiment::Lifetime => "lifetime",
            Experiment::Rabi => "rabi",
            Experiment::Ple => "ple",
            Experiment::Ramsey => "ramsey",
            Experiment::G2 => "g2",
            Experiment::Laser => "laser",
        }
    }
}

fn resolve_config(g: &GlobalArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &g.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &g.out {
        cfg.out_dir = out.to_string_lossy().into_owned();
    }
    Ok(cfg)
}

fn install_workers(n: Option<usize>) -> Result<(), CliError> {
    let Some(n) = n else { return Ok(()) };
    if n == 0 {
        return Err(CliError::Schema("--workers must be >= 1".into()));
    }
    // A second call in the same process (tests) keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs one parsed command, writing artifacts and printing the report.
pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    install_workers(cli.global.workers)?;
    match cli.command {
        Command::Schema { .. } => {
            write!(stdout, "{}", annotated_schema())?;
            Ok(())
        }
        Command::Simulate(args) => {
            let mut cfg = resolve_config(&cli.global)?;
            if let Some(n) = args.pulses {
                cfg.hbt.n_pulses = n;
            }
            cfg.validate()?;
            if args.experiment != Experiment::G2 && (args.pulses.is_some() || args.clicks.is_some()) {
                return Err(CliError::Schema("--pulses and --clicks apply to `simulate g2` only".into()));
            }
            let outcome = match args.experiment {
                Experiment::Lifetime => pipelines::lifetime(&cfg),
                Experiment::Rabi => pipelines::rabi(&cfg),
                Experiment::Ple => pipelines::ple(&cfg),
                Experiment::Ramsey => pipelines::ramsey(&cfg),
                Experiment::G2 => pipelines::g2(&cfg, args.clicks.is_some()),
                Experiment::Laser => pipelines::laser(&cfg),
            }?;
            let out_dir = PathBuf::from(&cfg.out_dir);
            let command = format!("simulate {}", args.experiment.name());
            let report = write_outcome(&out_dir, &outcome, &cfg, &command, cli.global.plot)?;
            if let Some(path) = &args.clicks {
                write_click_file(path, &outcome)?;
            }
            write!(stdout, "{report}")?;
            match outcome.failure {
                Some(e) => Err(e),
                None => Ok(()),
            }
        }
        Command::Fit(args) => {
            let cfg = resolve_config(&cli.global)?;
            let (results, failure) = fit::run(args.model, &args.input, args.floor)?;
            let report = output::Report {
                config: &cfg,
                results: &results,
                provenance: output::Provenance::new(cfg.seed, format!("fit {}", fit::name(args.model))),
            }
            .to_json();
            if let Some(out) = &cli.global.out {
                write_text(&out.join(format!("fit_{}.json", fit::name(args.model))), &report)?;
            }
            write!(stdout, "{report}")?;
            match failure {
                Some(e) => Err(e),
                None => Ok(()),
            }
        }
        Command::ReproducePaper => {
            let mut cfg = match &cli.global.config {
                Some(path) => RunConfig::load(path)?,
                None => reproduce::reference_config(config::DEFAULT_SEED),
            };
            if let Some(seed) = cli.global.seed {
                cfg.seed = seed;
            }
            if let Some(out) = &cli.global.out {
                cfg.out_dir = out.to_string_lossy().into_owned();
            }
            let report = reproduce::reproduce_paper(&cfg, &PathBuf::from(&cfg.out_dir), cli.global.plot)?;
            write!(stdout, "{}", report.markdown)?;
            if report.all_pass() {
                Ok(())
            } else if let Some(e) = report.errors.first() {
                Err(CliError::Check(format!("pipeline failed: {e}")))
            } else {
                let failed: Vec<&str> = report.rows.iter().filter(|r| !r.pass).map(|r| r.quantity).collect();
                Err(CliError::Check(format!("rows outside tolerance: {}", failed.join(", "))))
            }
        }
    }
}

/// Parses arguments and runs; returns the process exit code. Errors are
/// written to stderr as one JSON record.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let err = CliError::Schema(e.render().to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            let _ = lock.flush();
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
