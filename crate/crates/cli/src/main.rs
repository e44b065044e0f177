use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use will_testing::{Observation, QuadratureSpec};
use will_testing_cli::commands::{
    self, parse_number, parse_observation, GraphSource, InitSource, SimulateConfig,
    VerifyTolerances,
};

/// Tools for the war-of-attrition testing game and its mixed equilibrium.
#[derive(Parser)]
#[command(name = "willtest", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the equilibrium density for one or more rho values.
    Density(DensityArgs),
    /// Check normalization, constant pay, residuals and CDF inversion.
    Verify(VerifyArgs),
    /// Run best-response dynamics on a finite population.
    Simulate(SimulateArgs),
    /// Monte Carlo checks of the strategy guarantees.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct Common {
    /// Horizon T.
    #[arg(long = "big-t", default_value = "1", value_parser = parse_number)]
    big_t: f64,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DensityArgs {
    /// Defaults to 0.2, 1/3, 0.5, 2/3, 0.8. Accepts fractions like 1/3.
    #[arg(long = "rho", value_parser = parse_number)]
    rho: Vec<f64>,
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 512)]
    grid: usize,
    /// Also write an SVG plot here.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Plot ceiling for the density axis (default 10 / T).
    #[arg(long, value_parser = parse_number)]
    clip: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Defaults to 0.05, 0.10, ..., 0.95.
    #[arg(long = "rho", value_parser = parse_number)]
    rho: Vec<f64>,
    #[command(flatten)]
    common: Common,
    /// Starting Simpson panel count.
    #[arg(long, default_value_t = QuadratureSpec::default().panels)]
    panels: usize,
    /// Fraction of [0, T] next to T handled in closed form.
    #[arg(long, default_value_t = QuadratureSpec::default().tail_fraction)]
    tail_fraction: f64,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value = "0.5", value_parser = parse_number)]
    rho: f64,
    #[command(flatten)]
    common: Common,
    /// Number of players (ignored when --graph names a file).
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    rounds: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// `complete` or a path to an edge-list file.
    #[arg(long, default_value = "complete")]
    graph: GraphSource,
    /// `equal`, `uniform`, `equilibrium` or a path to a strategy file.
    #[arg(long, default_value = "equilibrium")]
    init: InitSource,
    /// Common starting strategy for `--init equal` (default T / 2).
    #[arg(long, value_parser = parse_number)]
    equal_value: Option<f64>,
    /// `full` or the number of opponents each reviser samples.
    #[arg(long, default_value = "full", value_parser = parse_observation)]
    observe: Observation,
    /// Players revising per round.
    #[arg(long, default_value_t = 1)]
    revisions: usize,
    /// Revisers respond to the start-of-round profile instead of in turn.
    #[arg(long)]
    simultaneous: bool,
    /// Best-response undercut margin (default 1e-9 T).
    #[arg(long, value_parser = parse_number)]
    epsilon: Option<f64>,
    /// Write the JSON summary here (stderr when omitted).
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long, default_value = "0.5", value_parser = parse_number)]
    rho: f64,
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = will_testing::analysis::DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

/// Command finished but a check it ran did not pass.
struct ChecksFailed;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(ChecksFailed)) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn run(cli: Cli) -> Result<Result<(), ChecksFailed>> {
    match cli.command {
        Command::Density(a) => {
            let rhos = if a.rho.is_empty() {
                commands::DEFAULT_DENSITY_RHOS.to_vec()
            } else {
                a.rho
            };
            let table = commands::density_table(&rhos, a.common.big_t, a.grid)?;
            emit(a.common.out.as_deref(), &table.to_csv())?;
            if let Some(path) = a.svg {
                let ceiling = a.clip.unwrap_or_else(|| commands::default_ceiling(a.common.big_t));
                anyhow::ensure!(ceiling > 0.0, "--clip must be positive");
                std::fs::write(&path, table.to_svg(ceiling))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(Ok(()))
        }
        Command::Verify(a) => {
            let rhos = if a.rho.is_empty() {
                commands::default_verify_rhos()
            } else {
                a.rho
            };
            let quad = QuadratureSpec {
                panels: a.panels,
                tail_fraction: a.tail_fraction,
                ..QuadratureSpec::default()
            };
            let report = commands::verify(&rhos, a.common.big_t, &quad, &VerifyTolerances::default())?;
            emit(a.common.out.as_deref(), &json(&report)?)?;
            Ok(if report.pass { Ok(()) } else { Err(ChecksFailed) })
        }
        Command::Simulate(a) => {
            let cfg = SimulateConfig {
                rho: a.rho,
                horizon: a.common.big_t,
                n: a.n,
                rounds: a.rounds,
                seed: a.seed,
                epsilon: a.epsilon,
                observe: a.observe,
                graph: a.graph,
                init: a.init,
                equal_value: a.equal_value,
                revisions_per_round: a.revisions,
                simultaneous: a.simultaneous,
            };
            let out = commands::simulate(&cfg)?;
            emit(a.common.out.as_deref(), &out.csv)?;
            let summary = json(&out.summary)?;
            match a.summary {
                Some(path) => std::fs::write(&path, summary)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => eprint!("{summary}"),
            }
            Ok(Ok(()))
        }
        Command::Analyze(a) => {
            let report = commands::analyze(a.rho, a.common.big_t, a.samples, a.seed)?;
            emit(a.common.out.as_deref(), &json(&report)?)?;
            Ok(if report.all_consistent { Ok(()) } else { Err(ChecksFailed) })
        }
    }
}
