//! `riccati` command-line front end.

pub mod commands;
pub mod error;
pub mod figures;
pub mod report;
pub mod scenario;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::commands::CommandOutput;
use crate::error::{CliError, EXIT_INPUT, EXIT_OK};
use crate::figures::Grid;

#[derive(Debug, Parser)]
#[command(
    name = "riccati",
    version,
    about = "Riccati difference / Newton-Hewer iterations and monotonicity probes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Write outputs into this directory instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Comparison tolerance override.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Horizon override.
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the DARE for the first slice of a scenario.
    Solve {
        /// Scenario JSON file or built-in name.
        #[arg(long)]
        scenario: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run a trajectory and emit it as CSV.
    Iterate {
        #[arg(long)]
        scenario: String,
        #[command(flatten)]
        common: Common,
    },
    /// Compare two trajectories in the Loewner order.
    Compare {
        /// Give twice (scenario JSON, trajectory CSV or built-in), or once
        /// with a built-in pair name.
        #[arg(long = "scenario", required = true, num_args = 1)]
        scenarios: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Random search for monotonicity counterexamples.
    Search {
        /// Search config JSON file or built-in name.
        #[arg(long)]
        config: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sample budget override.
        #[arg(long)]
        budget: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Emit the data series behind the standard plots as CSV.
    Figures {
        /// Figures to emit (1-4); all when omitted.
        #[arg(long, value_delimiter = ',')]
        which: Vec<u8>,
        #[arg(long, default_value_t = 0.0)]
        grid_min: f64,
        #[arg(long, default_value_t = 6.0)]
        grid_max: f64,
        #[arg(long, default_value_t = 601)]
        grid_points: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn execute(command: Command) -> Result<(CommandOutput, Option<PathBuf>), CliError> {
    let started = Instant::now();
    let (mut output, out) = match command {
        Command::Solve { scenario, common } => {
            let mut s = scenario::load(&scenario)?;
            if let Some(h) = common.horizon {
                s = s.with_horizon(h);
            }
            (commands::solve(&s)?, common.out)
        }
        Command::Iterate { scenario, common } => {
            let mut s = scenario::load(&scenario)?;
            if let Some(h) = common.horizon {
                s = s.with_horizon(h);
            }
            if let Some(t) = common.tol {
                s = s.with_tolerance(t);
            }
            (commands::iterate(&s)?, common.out)
        }
        Command::Compare { scenarios, common } => {
            let (a, b) = commands::compare_sides(&scenarios)?;
            (
                commands::compare(a, b, common.tol, common.horizon)?,
                common.out,
            )
        }
        Command::Search {
            config,
            seed,
            budget,
            common,
        } => {
            let cfg = commands::load_search_config(&config)?;
            (
                commands::search(cfg, seed, common.tol, budget, common.horizon)?,
                common.out,
            )
        }
        Command::Figures {
            which,
            grid_min,
            grid_max,
            grid_points,
            common,
        } => {
            let out = common
                .out
                .ok_or_else(|| CliError::input("figures needs --out DIR"))?;
            let which = if which.is_empty() {
                vec![1, 2, 3, 4]
            } else {
                which
            };
            let grid = Grid {
                min: grid_min,
                max: grid_max,
                points: grid_points,
            };
            let horizon = common.horizon.unwrap_or(riccati_core::DEFAULT_HORIZON);
            (commands::figures(&which, &grid, horizon)?, Some(out))
        }
    };
    if let Some(report) = output.report.as_mut() {
        report.wall_clock_seconds = started.elapsed().as_secs_f64();
    }
    Ok((output, out))
}

fn write_outputs(output: &CommandOutput, dir: &Path) -> Result<(), CliError> {
    let fail = |e: std::io::Error| CliError::input(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(fail)?;
    for (name, contents) in &output.files {
        std::fs::write(dir.join(name), contents).map_err(fail)?;
    }
    if let (Some(report), Some(name)) = (&output.report, &output.report_file) {
        std::fs::write(dir.join(name), report.to_json()).map_err(fail)?;
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let result = execute(cli.command).and_then(|(output, out)| {
        match out {
            Some(dir) => write_outputs(&output, &dir)?,
            None => {
                let payload = output
                    .stdout
                    .clone()
                    .or_else(|| output.report.as_ref().map(|r| r.to_json()))
                    .unwrap_or_default();
                let _ = stdout.write_all(payload.as_bytes());
            }
        }
        Ok(output)
    });
    match result {
        Ok(output) => {
            let _ = writeln!(stderr, "{}", output.summary);
            output.exit_code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.code
        }
    }
}
