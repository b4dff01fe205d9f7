use clap::{Parser, Subcommand};
use recover_cli::runner::{
    run_comparison, run_experiment, tune_tau, write_run, RunOutput, SolverChoice,
};
use recover_cli::spec::ExperimentSpec;
use recover_cli::{data, metrics};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "recover",
    about = "Image recovery benchmarks: constrained-splitting solver vs. thresholding baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment with one solver and write its outputs.
    Run {
        /// Experiment description file (key = value lines).
        #[arg(long)]
        spec: PathBuf,
        /// Solver: salsa, ist, or fista.
        #[arg(long, default_value = "salsa")]
        solver: String,
        /// Output directory for trace.csv, estimate.pgm, metrics.txt.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run several solvers on the same problem instance. When salsa is
    /// listed it runs first and its final objective becomes the stopping
    /// target for the others.
    Compare {
        #[arg(long)]
        spec: PathBuf,
        /// Comma-separated solvers, e.g. salsa,ist,fista.
        #[arg(long, default_value = "salsa,ist,fista")]
        solvers: String,
        /// Output root; each solver writes into a subdirectory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Search the regularization weight that maximizes reconstruction
    /// quality for a spec (golden section on log tau).
    TuneTau {
        #[arg(long)]
        spec: PathBuf,
        /// Lower end of the search interval.
        #[arg(long, default_value_t = 1e-4)]
        lo: f64,
        /// Upper end of the search interval.
        #[arg(long, default_value_t = 10.0)]
        hi: f64,
        /// Number of solver runs to spend.
        #[arg(long, default_value_t = 16)]
        evals: usize,
    },
    /// Write a test image to a 16-bit PGM file.
    Phantom {
        /// Square size in pixels.
        #[arg(long, default_value_t = 128)]
        size: usize,
        /// Which image: shepp-logan or scene.
        #[arg(long, default_value = "shepp-logan")]
        kind: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> recover_core::Result<()> {
    match cli.command {
        Command::Run { spec, solver, out } => {
            let spec = load_spec(&spec)?;
            let choice = SolverChoice::parse(&solver)?;
            let result = run_experiment(&spec, choice)?;
            write_run(&out, &result)?;
            print_summary(&result);
            Ok(())
        }
        Command::Compare { spec, solvers, out } => {
            let spec = load_spec(&spec)?;
            let choices = SolverChoice::parse_list(&solvers)?;
            let results = run_comparison(&spec, &choices)?;
            for result in &results {
                write_run(&out.join(result.solver.name()), result)?;
                print_summary(result);
            }
            Ok(())
        }
        Command::TuneTau {
            spec,
            lo,
            hi,
            evals,
        } => {
            let spec = load_spec(&spec)?;
            let tuned = tune_tau(&spec, lo, hi, evals)?;
            for (tau, score) in &tuned.probes {
                println!("probe tau = {tau:.6e}  score = {score:.6}");
            }
            println!("best tau = {:.6e}  score = {:.6}", tuned.tau, tuned.score);
            Ok(())
        }
        Command::Phantom { size, kind, out } => {
            let image = match kind.as_str() {
                "shepp-logan" => data::shepp_logan(size)?,
                "scene" => data::make_scene(size)?,
                _ => {
                    return Err(recover_core::Error::Format(format!(
                        "unknown phantom kind {kind:?} (expected shepp-logan or scene)"
                    )))
                }
            };
            recover_core::io::write_pgm16(&out, &image)?;
            println!("wrote {} ({size}x{size})", out.display());
            Ok(())
        }
    }
}

fn load_spec(path: &PathBuf) -> recover_core::Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path)?;
    ExperimentSpec::parse(&text)
}

fn print_summary(result: &RunOutput) {
    let metrics::Metrics {
        mse,
        isnr_db,
        final_objective,
        iterations,
    } = &result.metrics;
    let mut line = format!("{:<6} mse = {mse:.6e}", result.solver.name());
    if let Some(isnr) = isnr_db {
        line.push_str(&format!("  isnr_db = {isnr:.3}"));
    }
    if let Some(obj) = final_objective {
        line.push_str(&format!("  objective = {obj:.6e}"));
    }
    if let Some(iters) = iterations {
        line.push_str(&format!("  iterations = {iters}"));
    }
    if let Some(row) = result.trace.last() {
        line.push_str(&format!("  seconds = {:.3}", row.seconds));
    }
    println!("{line}");
}
