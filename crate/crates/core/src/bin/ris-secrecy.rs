//! Command-line front end: evaluate, sweep, validate and dump samples.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ris_secrecy::cli::{self, exit_code, SweepSpec, ValidateOptions};
use ris_secrecy::montecarlo::{simulate_batch_with, write_samples_csv, CascadeModel, McOptions};
use ris_secrecy::snrdist::{derive_constants, LogBase, ScenarioConfig};
use ris_secrecy::specfun::ContourSpec;
use ris_secrecy::{Error, Execution};

#[derive(Parser)]
#[command(name = "ris-secrecy", version, about = "Secrecy capacity and outage of RIS-aided backscatter links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file, or one of the bundled names (paper_default, operating, crossed_snr).
    #[arg(long, default_value = "paper_default")]
    scenario: String,
    /// Override the logarithm base of the scenario.
    #[arg(long, value_parser = ["bits", "nats"])]
    base: Option<String>,
    /// Override the direct-link flag of the scenario.
    #[arg(long)]
    direct: Option<bool>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run every loop on the calling thread.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn scenario(&self) -> Result<ScenarioConfig, Error> {
        let mut cfg = cli::load_scenario(&self.scenario)?;
        match self.base.as_deref() {
            Some("nats") => cfg.base = LogBase::Nats,
            Some("bits") => cfg.base = LogBase::Bits,
            _ => {}
        }
        if let Some(d) = self.direct {
            cfg.direct_links = d;
        }
        Ok(cfg)
    }

    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    fn output(&self) -> Result<Box<dyn Write>, Error> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

#[derive(Args)]
struct Engines {
    /// asc, sop or both.
    #[arg(long, default_value = "both")]
    metric: String,
    /// Comma-separated list of exact, asymptotic, mc, or all.
    #[arg(long, default_value = "exact")]
    engine: String,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    /// Leave elapsed_ms empty so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the metrics of one scenario.
    Eval {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        engines: Engines,
        /// Also print the derived constants to standard error.
        #[arg(long)]
        constants: bool,
    },
    /// Sweep one parameter and write one CSV row per point, metric and engine.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        engines: Engines,
        /// gammabar_R2 or gammabar_E2 (dB), N, d_thetar, R_s, or m_<link>[+<link>...].
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
    /// Compare every analytic law and metric with Monte-Carlo.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1_000_000)]
        trials: usize,
        /// Nodes of the tabulated analytic CDFs.
        #[arg(long, default_value_t = 160)]
        grid: usize,
        /// Draw every surface element instead of the moment-matched cascade.
        #[arg(long)]
        elementwise: bool,
        /// Stop at the first failing check.
        #[arg(long)]
        fail_fast: bool,
    },
    /// Write raw Monte-Carlo SNR samples as CSV.
    DumpSamples {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
}

fn sweep(common: &Common, engines: &Engines, param: Option<(&str, &str)>) -> Result<i32, Error> {
    let cfg = common.scenario()?;
    let (param, values) = match param {
        Some((p, v)) => (Some(p.parse()?), cli::parse_values(v)?),
        None => (None, Vec::new()),
    };
    let mut spec = SweepSpec::new(cfg, param, values);
    spec.metrics = cli::parse_metrics(&engines.metric)?;
    spec.engines = cli::parse_engines(&engines.engine)?;
    spec.trials = engines.trials;
    spec.seed = common.seed;
    spec.execution = common.execution();
    let record = cli::run_sweep(&spec)?;
    record.write_csv(common.output()?, !engines.no_timing)?;
    if let Some(p) = &common.out {
        let mut meta = p.clone().into_os_string();
        meta.push(".run.toml");
        std::fs::write(meta, record.metadata())?;
    }
    let failed = record.rows.iter().filter(|r| r.result.is_none()).count();
    if failed > 0 {
        log::warn!("{failed} of {} points failed; see the flags column", record.rows.len());
        return Ok(3);
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Eval { common, engines, constants } => {
            if constants {
                eprintln!("{:#?}", derive_constants(&common.scenario()?)?);
            }
            sweep(&common, &engines, None)
        }
        Command::Sweep { common, engines, param, values } => sweep(&common, &engines, Some((&param, &values))),
        Command::Validate { common, trials, grid, elementwise, fail_fast } => {
            let cfg = common.scenario()?;
            let opts = ValidateOptions {
                trials,
                seed: common.seed,
                grid_points: grid,
                cascade: if elementwise { CascadeModel::Elementwise } else { CascadeModel::MomentMatched },
                contour: ContourSpec::default().with_rel_tol(1e-7),
                execution: common.execution(),
                stop_on_failure: fail_fast,
                ..ValidateOptions::default()
            };
            if trials < cli::LOW_POWER_TRIALS {
                log::warn!("{trials} trials is low power; verdicts are unreliable");
            }
            let report = cli::validate(&cfg, &opts)?;
            report.write_csv(common.output()?)?;
            eprintln!(
                "{} ({} trials{}, scenario {})",
                if report.passed() { "validation passed" } else { "validation FAILED" },
                report.trials,
                if report.low_power { ", low power" } else { "" },
                report.fingerprint
            );
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::DumpSamples { common, trials } => {
            if trials == 0 {
                return Err(Error::Config("trials must be positive".into()));
            }
            let cfg = common.scenario()?;
            let opts = McOptions { execution: common.execution(), ..McOptions::default() };
            let batch = simulate_batch_with(&cfg, trials, common.seed, opts)?;
            write_samples_csv(&batch, common.output()?)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}

