use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tivc::commands;
use tivc::{CliError, CliResult, Context, ExperimentConfig, Overrides};
use tivc_core::costs::CostKind;
use tivc_core::env::TaskKind;

#[derive(Debug, Parser)]
#[command(name = "tivc", version, about = "Learn time-invariant costs from demonstrations and evaluate them")]
struct Cli {
    /// Experiment config (JSON); built-in defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated seeds.
    #[arg(long, global = true, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Cost kinds: poly, rbf, lrbf, mlp, lmlp.
    #[arg(long, global = true, value_delimiter = ',')]
    cost: Option<Vec<CostKind>>,
    #[arg(long, global = true, value_delimiter = ',')]
    context: Option<Vec<Context>>,
    /// Environments: placement, peg.
    #[arg(long, global = true, value_delimiter = ',')]
    env: Option<Vec<TaskKind>>,
    /// Inner steps for training (and for testing unless --test-updates is set).
    #[arg(long, global = true)]
    inner_steps: Option<usize>,
    /// Inner steps when extracting policies at test time.
    #[arg(long, global = true, value_parser = parse_test_updates)]
    test_updates: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write demonstration files for every environment and context.
    GenDemos,
    /// Train every cost kind and seed on the demonstration files.
    Train,
    /// Meta-test trained checkpoints and write reports.
    Eval {
        /// Evaluate the expert demonstrator instead of learned costs.
        #[arg(long)]
        expert: bool,
    },
    /// Inner-steps by demo-count training grid.
    Ablate,
    /// Check analytic gradients against finite differences.
    GradCheck,
}

fn parse_test_updates(s: &str) -> Result<usize, String> {
    match s {
        "1" => Ok(1),
        "5" => Ok(5),
        _ => Err("must be 1 or 5".into()),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply(Overrides {
        out: cli.out,
        seeds: cli.seeds,
        costs: cli.cost,
        contexts: cli.context,
        envs: cli.env,
        inner_steps: cli.inner_steps,
        test_updates: cli.test_updates,
    });
    let manifest = match cli.command {
        Command::GenDemos => commands::gen_demos(&cfg)?,
        Command::Train => commands::train(&cfg)?,
        Command::Eval { expert } => commands::eval(&cfg, expert)?,
        Command::Ablate => commands::ablate(&cfg)?,
        Command::GradCheck => {
            let seed = cfg.seeds.first().copied().unwrap_or(0);
            let rows = commands::grad_check(seed)?;
            print!("{}", commands::format_suite(&rows));
            let failed = rows.iter().filter(|r| !r.passed()).count();
            if failed > 0 {
                return Err(CliError::Core(tivc_core::Error::NumericDomain {
                    what: "gradient check",
                    index: None,
                }));
            }
            return Ok(());
        }
    };
    println!(
        "{}: {} files written to {}",
        manifest.command,
        manifest.artifacts.len(),
        cfg.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
