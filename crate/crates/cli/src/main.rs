use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gradnorm_cli::config::{ExperimentConfig, Solver};
use gradnorm_cli::error::Result;
use gradnorm_cli::output::write_experiment;
use gradnorm_cli::runner::run_experiment;
use gradnorm_cli::sweep::run_sweep;

#[derive(Parser)]
#[command(
    name = "gradnorm",
    version,
    about = "Run gradient-norm solvers on test problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        solver: Option<Solver>,
        /// Problem seed; repetition r uses `seed + r`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one experiment per tolerance and report the scaling.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Strictly decreasing, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        epsilons: Vec<f64>,
    },
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run {
            config,
            epsilon,
            solver,
            seed,
            out,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(e) = epsilon {
                cfg.run.epsilon = e;
            }
            if let Some(s) = solver {
                cfg.run.solver = s;
            }
            if let Some(s) = seed {
                cfg.problem.seed = s;
            }
            if out.is_some() {
                cfg.run.out = out;
            }
            cfg.validate()?;
            let (summary, trace) = run_experiment(&cfg, cfg.run.epsilon, cfg.name())?;
            let written = write_experiment(&cfg.out_dir(), cfg.name(), &summary, &trace)?;
            for run in &summary.runs {
                println!(
                    "{}: grad_norm {:e}, {} gradient evaluations, {}",
                    run.run_id,
                    run.grad_norm,
                    run.gradient_evals,
                    if run.success() { "ok" } else { "FAILED" }
                );
                for c in run.checks.iter().filter(|c| !c.pass) {
                    println!("  failed: {} ({} > {})", c.name, c.observed, c.bound);
                }
            }
            println!("{}", written.summary.display());
            Ok(summary.success)
        }
        Command::Sweep { config, epsilons } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = run_sweep(&cfg, &epsilons, &cfg.out_dir())?;
            print!("{}", out.table.to_csv());
            let t = &out.table;
            println!(
                "evals vs log2(1/eps): slope {:.4}, R^2 {:.4}; log-log slope {:.4}",
                t.log_fit.slope, t.log_fit.r_squared, t.log_log_fit.slope
            );
            println!("{}", out.table_json.display());
            Ok(t.success)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("gradnorm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
