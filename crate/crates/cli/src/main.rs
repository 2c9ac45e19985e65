use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tavis_bench::{fit_scaling, BenchMethod, SweepSpec};
use tavis_cli::run::{bench, simulate, write_trajectory};
use tavis_cli::validate::validate;
use tavis_cli::{load_config, CliError, EXIT_OK};

#[derive(Parser, Debug)]
#[command(version, about = "Split-operator propagation of the driven Tavis-Cummings model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Propagate from the ground state and write the sampled trajectory as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check the propagators against the dense oracle at the configured parameters.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Time single steps over a dimension sweep and fit scaling exponents.
    Bench {
        /// e.g. `d=1e3..1e5;points=6;methods=linear,exp`
        #[arg(long)]
        sweep: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { config } => {
            let config = load_config(&config)?;
            for note in config.notes() {
                eprintln!("note: {note}");
            }
            let output = simulate(&config)?;
            for w in &output.warnings {
                eprintln!("warning: {w}");
            }
            write_trajectory(&config.out, &config, &output)?;
            println!("wrote {} rows to {}", output.record.rows.len(), config.out.display());
            Ok(())
        }
        Command::Validate { config } => {
            let config = load_config(&config)?;
            for note in config.notes() {
                eprintln!("note: {note}");
            }
            let checks = validate(&config)?;
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(CliError::ValidationFailed { failed, total: checks.len() });
            }
            Ok(())
        }
        Command::Bench { sweep, out } => {
            let spec: SweepSpec = sweep.parse()?;
            let output = bench(&spec, &out)?;
            for s in &output.result.samples {
                println!(
                    "{:>6} D = {:>8}  step {:>14.1} ns  precompute {:>10.3} ms",
                    s.method, s.dim, s.step_time_ns_median, s.precompute_ms
                );
            }
            for s in &output.result.skipped {
                println!("{:>6} D = {:>8}  skipped: {}", s.method, s.dim, s.reason);
            }
            for method in [BenchMethod::Linear, BenchMethod::Exp, BenchMethod::Dense] {
                if !spec.methods.contains(&method) {
                    continue;
                }
                match fit_scaling(&output.result.for_method(method)) {
                    Ok(fit) => println!("{method}: exponent {:.3}, R^2 {:.4}", fit.exponent, fit.r_squared),
                    Err(e) => println!("{method}: no fit ({e})"),
                }
            }
            println!("wrote {} and {}", output.samples_path.display(), output.report_path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(hint) = e.hint() {
                eprintln!("hint: {hint}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
