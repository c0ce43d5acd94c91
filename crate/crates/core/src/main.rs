use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use perfspline::app::{self, EXIT_ERROR, EXIT_FAILED};
use perfspline::Error;

#[derive(Parser)]
#[command(name = "perfspline", version, about = "Periodic perfect splines interpolating in the mean")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one config and write the spline and report files.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_spline: Option<PathBuf>,
        #[arg(long)]
        out_report: Option<PathBuf>,
    },
    /// Check a stored spline against a config; prints the report as JSON.
    Verify {
        #[arg(long)]
        spline: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
    /// Write plot CSV, knot sidecar and optionally an SVG chart.
    Plot {
        #[arg(long)]
        spline: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: bool,
    },
    /// Solve every config in a directory; outputs go to <dir>/results.
    Batch {
        #[arg(long)]
        dir: PathBuf,
    },
}

fn status(passed: bool) -> u8 {
    if passed {
        0
    } else {
        EXIT_FAILED as u8
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Solve {
            config,
            out_spline,
            out_report,
        } => {
            let run = app::run_solve(&config, out_spline.as_deref(), out_report.as_deref())?;
            let rep = &run.report.report;
            println!(
                "{}: xi = {}, knots = {}, max residual = {:e}, ||f^(r)|| = {}",
                if rep.passed { "passed" } else { "FAILED" },
                rep.xi,
                rep.knot_count,
                rep.max_residual,
                rep.f_r_norm
            );
            if !rep.passed {
                println!("diagnosis: {}", rep.diagnosis);
            }
            println!("spline: {}", run.spline_path.display());
            println!("report: {}", run.report_path.display());
            if let Some(p) = &run.plot {
                println!("plot: {}", p.csv.display());
            }
            Ok(status(rep.passed))
        }
        Command::Verify { spline, config } => {
            let rep = app::run_verify(&spline, &config)?;
            println!("{}", serde_json::to_string_pretty(&rep)?);
            Ok(status(rep.passed))
        }
        Command::Plot {
            spline,
            config,
            out,
            svg,
        } => {
            let files = app::run_plot(&spline, &config, &out, svg)?;
            println!("{}", files.csv.display());
            println!("{}", files.knots.display());
            if let Some(p) = files.svg {
                println!("{}", p.display());
            }
            Ok(0)
        }
        Command::Batch { dir } => {
            let entries = app::run_batch(&dir)?;
            let mut code = 0;
            for e in &entries {
                code = code.max(e.exit_code());
                match (&e.error_code, e.xi) {
                    (Some(c), _) => println!(
                        "{}  error[{c}]: {}",
                        e.config.display(),
                        e.error.as_deref().unwrap_or("")
                    ),
                    (None, Some(xi)) => println!(
                        "{}  {}  xi = {xi}  knots = {}",
                        e.config.display(),
                        if e.passed { "passed" } else { "FAILED" },
                        e.knots.unwrap_or(0)
                    ),
                    _ => {}
                }
            }
            Ok(code as u8)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
