//! Pipeline driver: simulate, screen, fit, assemble, sweep-threshold,
//! evaluate, diagnose, tune. Defaults follow the reference configuration
//! (lambda = 20, k = 1, 10^4 iterations after 10^3 burn-in); a TOML config
//! file provides per-command sections and every flag overrides its key.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Config;
use tvnet::gibbs::{ModelHyperparams, SamplerConfig};
use tvnet::screening::ScreenBudget;
use tvnet::simulate::SimulationSpec;

const DEFAULT_LAMBDA: f64 = 20.0;
const DEFAULT_K: f64 = 1.0;
const DEFAULT_ITERATIONS: usize = 10_000;
const DEFAULT_BURN_IN: usize = 1_000;

#[derive(Parser)]
#[command(name = "tvnet", version, about = "Time-varying network inference pipeline")]
struct Cli {
    /// TOML configuration file with one section per command.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with known network structure.
    Simulate(SimulateArgs),
    /// Rank candidate predictors per target by mean HOLP magnitude.
    Screen(ScreenArgs),
    /// Run the per-target Gibbs sampler and write draws + summaries.
    Fit(FitArgs),
    /// Threshold and min-symmetrise summaries into an edge list.
    Assemble(AssembleArgs),
    /// Re-assemble across a grid of thresholds, reporting edge counts.
    SweepThreshold(SweepArgs),
    /// Score summaries against a ground-truth file (ROC curve and AUC).
    Evaluate(EvaluateArgs),
    /// Convergence diagnostics for every persisted chain.
    Diagnose(DiagnoseArgs),
    /// Grid-search the (lambda, k) hyperparameters.
    Tune(TuneArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Dropout rate parameter omega; omitted = no dropout.
    #[arg(long)]
    omega: Option<f64>,
    /// Observation noise standard deviation.
    #[arg(long)]
    noise_sd: Option<f64>,
}

#[derive(Args)]
struct ScreenArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// `auto` (N/ln N) or a fixed count.
    #[arg(long)]
    screen_budget: Option<String>,
    /// Comma-separated target node names (default: all nodes).
    #[arg(long)]
    targets: Option<String>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker pool size (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    targets: Option<String>,
    /// Screen inline before fitting: `auto` or a fixed count.
    #[arg(long)]
    screen_budget: Option<String>,
    /// Use a previously written screen.csv instead of inline screening.
    #[arg(long)]
    screen_file: Option<PathBuf>,
}

#[derive(Args)]
struct AssembleArgs {
    /// Summaries directory from `fit`.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Edge threshold phi.
    #[arg(long)]
    phi: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Comma-separated thresholds.
    #[arg(long)]
    phi_grid: Option<String>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Summaries directory from `fit`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Ground-truth JSON from `simulate`.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Draws directory from `fit`.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct TuneArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Comma-separated lambda grid.
    #[arg(long)]
    lambda_grid: Option<String>,
    /// Comma-separated k grid.
    #[arg(long)]
    k_grid: Option<String>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    targets: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // machine-readable error report on stderr
            let report = serde_json::json!({ "error": format!("{e:#}") });
            eprintln!("{report}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Simulate(args) => {
            let defaults = SimulationSpec::default();
            let spec = SimulationSpec {
                t_len: cfg.simulate.t_len.unwrap_or(defaults.t_len),
                n_per_time: cfg.simulate.n_per_time.unwrap_or(defaults.n_per_time),
                nodes_per_archetype: cfg
                    .simulate
                    .nodes_per_archetype
                    .unwrap_or(defaults.nodes_per_archetype),
                noise_sd: args
                    .noise_sd
                    .or(cfg.simulate.noise_sd)
                    .unwrap_or(defaults.noise_sd),
                chain_len: cfg.simulate.chain_len.unwrap_or(defaults.chain_len),
                thin: cfg.simulate.thin.unwrap_or(defaults.thin),
                keep: cfg
                    .simulate
                    .keep
                    .or(cfg.simulate.n_per_time)
                    .unwrap_or(defaults.keep),
                dropout_omega: args.omega.or(cfg.simulate.omega),
                seed: args.seed.or(cfg.simulate.seed).unwrap_or(0),
            };
            let output_dir = args
                .output_dir
                .or(cfg.simulate.output_dir.map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("."));
            commands::simulate(&commands::SimulateOpts { spec, output_dir })
        }
        Command::Screen(args) => {
            let input = require(
                args.input.or(cfg.screen.input.map(PathBuf::from)),
                "input",
            )?;
            let output_dir = args
                .output_dir
                .or(cfg.screen.output_dir.map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("."));
            let budget = commands::screen_budget_from(
                args.screen_budget
                    .as_deref()
                    .or(cfg.screen.screen_budget.as_deref()),
            )?
            .unwrap_or(ScreenBudget::Auto);
            commands::screen(&commands::ScreenOpts {
                input,
                output_dir,
                budget,
                targets: args.targets.or(cfg.screen.targets),
            })
        }
        Command::Fit(args) => {
            let input = require(args.input.or(cfg.fit.input.map(PathBuf::from)), "input")?;
            let output_dir = args
                .output_dir
                .or(cfg.fit.output_dir.map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("."));
            let hyper = ModelHyperparams::new(
                args.lambda.or(cfg.fit.lambda).unwrap_or(DEFAULT_LAMBDA),
                args.k.or(cfg.fit.k).unwrap_or(DEFAULT_K),
            )?;
            let sampler = SamplerConfig::new(
                args.iterations
                    .or(cfg.fit.iterations)
                    .unwrap_or(DEFAULT_ITERATIONS),
                args.burn_in.or(cfg.fit.burn_in).unwrap_or(DEFAULT_BURN_IN),
                args.thin.or(cfg.fit.thin).unwrap_or(1),
                args.seed.or(cfg.fit.seed).unwrap_or(0),
            )?;
            let workers = args
                .workers
                .or(cfg.fit.workers)
                .unwrap_or_else(|| {
                    std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1)
                })
                .max(1);
            let screen_budget = commands::screen_budget_from(
                args.screen_budget
                    .as_deref()
                    .or(cfg.fit.screen_budget.as_deref()),
            )?;
            commands::fit(&commands::FitOpts {
                input,
                output_dir,
                hyper,
                sampler,
                workers,
                targets: args.targets.or(cfg.fit.targets),
                screen_budget,
                screen_file: args
                    .screen_file
                    .or(cfg.fit.screen_file.map(PathBuf::from)),
            })
        }
        Command::Assemble(args) => {
            let input = require(
                args.input.or(cfg.assemble.input.map(PathBuf::from)),
                "input",
            )?;
            let output_dir = args
                .output_dir
                .or(cfg.assemble.output_dir.map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("."));
            let phi = require(args.phi.or(cfg.assemble.phi), "phi")?;
            commands::assemble(&commands::AssembleOpts {
                input,
                output_dir,
                phi,
            })
        }
        Command::SweepThreshold(args) => {
            let input = require(
                args.input.or(cfg.sweep_threshold.input.map(PathBuf::from)),
                "input",
            )?;
            let output_dir = args
                .output_dir
                .or(cfg.sweep_threshold.output_dir.map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("."));
            let phi_grid = commands::parse_phi_grid(&require(
                args.phi_grid.or(cfg.sweep_threshold.phi_grid),
                "phi-grid",
            )?)?;
            commands::sweep_threshold(&commands::SweepOpts {
                input,
                output_dir,
                phi_grid,
            })
        }
        Command::Evaluate(args) => {
            let input = require(
                args.input.or(cfg.evaluate.input.map(PathBuf::from)),
                "input",
            )?;
            let truth = require(
                args.truth.or(cfg.evaluate.truth.map(PathBuf::from)),
                "truth",
            )?;
            let output_dir = args
                .output_dir
                .or(cfg.evaluate.output_dir.map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("."));
            commands::evaluate(&commands::EvaluateOpts {
                input,
                truth,
                output_dir,
            })
        }
        Command::Diagnose(args) => {
            let input = require(
                args.input.or(cfg.diagnose.input.map(PathBuf::from)),
                "input",
            )?;
            let output_dir = args
                .output_dir
                .or(cfg.diagnose.output_dir.map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("."));
            commands::diagnose(&commands::DiagnoseOpts { input, output_dir })
        }
        Command::Tune(args) => {
            let input = require(args.input.or(cfg.tune.input.map(PathBuf::from)), "input")?;
            let output_dir = args
                .output_dir
                .or(cfg.tune.output_dir.map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("."));
            let (lambda_grid, k_grid) = commands::tune_grids(
                args.lambda_grid
                    .as_deref()
                    .or(cfg.tune.lambda_grid.as_deref()),
                args.k_grid.as_deref().or(cfg.tune.k_grid.as_deref()),
            )?;
            let sampler = SamplerConfig::new(
                args.iterations
                    .or(cfg.tune.iterations)
                    .unwrap_or(DEFAULT_ITERATIONS / 10),
                args.burn_in
                    .or(cfg.tune.burn_in)
                    .unwrap_or(DEFAULT_BURN_IN / 10),
                args.thin.or(cfg.tune.thin).unwrap_or(1),
                args.seed.or(cfg.tune.seed).unwrap_or(0),
            )?;
            commands::tune(&commands::TuneOpts {
                input,
                output_dir,
                lambda_grid,
                k_grid,
                sampler,
                targets: args.targets.or(cfg.tune.targets),
            })
        }
    }
}

fn require<T>(value: Option<T>, field: &str) -> anyhow::Result<T> {
    value.ok_or_else(|| anyhow::anyhow!("{field}: required (flag --{field} or config key)"))
}
