use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dqj::bench::{emit, ExperimentConfig, OutputFormat, Runner, SubstepPolicy};
use dqj::grid::{count_trajectories, generated_trajectory_count};
use dqj::Error;

#[derive(Parser)]
#[command(name = "dqj-bench", version, about = "Run DQJ / SQJ / master-equation benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single experiment
    Run(RunArgs),
    /// Run every point of the config's sweep block
    Sweep(RunArgs),
    /// Check a config file without running it
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the trajectory-count table
    Counts {
        #[arg(long, default_value_t = 64)]
        max_grid: u64,
        #[arg(long, default_value_t = 5)]
        max_jumps: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Substep h = dt / div
    #[arg(long)]
    substep_div: Option<usize>,
    /// Overrides the SQJ base seed
    #[arg(long)]
    seed: Option<u64>,
}

fn load(args: &RunArgs) -> dqj::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(div) = args.substep_div {
        cfg.substep = SubstepPolicy::Div(div);
    }
    if let Some(s) = args.seed {
        if let dqj::bench::MethodConfig::Sqj { seed, .. } = &mut cfg.method {
            *seed = s;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: &RunArgs, sweep: bool) -> dqj::Result<()> {
    let cfg = load(args)?;
    if sweep && cfg.sweep.is_none() {
        return Err(Error::Config("sweep: config has no sweep block".into()));
    }
    let mut runner = Runner::new();
    let rows = if sweep { runner.sweep(&cfg)? } else { runner.run(&cfg)? };
    let format = match &args.format {
        Some(f) => f.parse()?,
        None => cfg.output.as_ref().map(|o| o.format).unwrap_or(OutputFormat::Csv),
    };
    let path = args.out.clone().or_else(|| cfg.output.as_ref().map(|o| o.path.clone()));
    emit(&rows, format, path.as_deref())
}

fn counts(max_grid: u64, max_jumps: u64, out: Option<PathBuf>) -> dqj::Result<()> {
    let mut text = String::from("order,n_grid,n_jumps,closed_form,generated\n");
    for order in 1..=3 {
        for n in 1..=max_grid {
            for j in 1..=max_jumps {
                let closed = count_trajectories(order, n, j)?;
                let generated = generated_trajectory_count(order, n, j)?;
                text.push_str(&format!("{order},{n},{j},{closed},{generated}\n"));
            }
        }
    }
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(&args, false),
        Command::Sweep(args) => run(&args, true),
        Command::Validate { config } => ExperimentConfig::load(&config).map(|_| println!("ok")),
        Command::Counts { max_grid, max_jumps, out } => counts(max_grid, max_jumps, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
