use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use graphheat_cli::commands::{self, EnvelopeSpec, Overrides, PlotRequest};
use graphheat_cli::CliResult;

/// Semilinear heat flow on weighted graphs: simulation, analysis and blow-up bounds.
#[derive(Parser)]
#[command(name = "graphheat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a problem file; writes a trajectory CSV and a run report.
    Simulate {
        problem: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        rtol: Option<f64>,
        #[arg(long)]
        atol: Option<f64>,
        /// Time horizon.
        #[arg(long)]
        tmax: Option<f64>,
        /// Blow-up threshold on max|u|.
        #[arg(long)]
        umax: Option<f64>,
        /// Smallest admissible step.
        #[arg(long)]
        hmin: Option<f64>,
        /// Equilibrium offset ū.
        #[arg(long, allow_hyphen_values = true)]
        ubar: Option<f64>,
    },
    /// Eigenpair, thresholds, potential-well classification and blow-up criteria as JSON.
    Analyze {
        problem: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// Base seed for the restarts of the Λ minimizer.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Principal eigenpair of −Δ + a.
    Spectrum {
        graph: PathBuf,
        /// A number, or a field spec such as '{"map": {"x1": 0.0, "x2": 2.0}}'.
        #[arg(long, short = 'a')]
        potential: String,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// SVG line chart of trajectory CSV columns.
    Plot {
        trajectory: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// Column names, e.g. u_x1,max_abs_u.
        #[arg(long, short, value_delimiter = ',')]
        columns: Vec<String>,
        #[arg(long)]
        log_y: bool,
        /// Add the small-data decay envelope for this first eigenvalue.
        #[arg(long)]
        envelope: Option<f64>,
        /// Smallest node measure, used by --envelope.
        #[arg(long, default_value_t = 1.0)]
        mu_min: f64,
        #[arg(long, default_value = "")]
        title: String,
    },
    /// Run a named scenario end to end: g25-decay, g25-blowup or single-node-suite.
    Reproduce {
        preset: String,
        out_dir: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate {
            problem,
            out,
            report,
            rtol,
            atol,
            tmax,
            umax,
            hmin,
            ubar,
        } => {
            let ov = Overrides {
                rtol,
                atol,
                tmax,
                umax,
                hmin,
                ubar,
            };
            let r = commands::simulate(&problem, &out, &report, &ov)?;
            println!(
                "status {:?}, t = {}, max|u| = {:e}",
                r.status, r.t_detect, r.final_max_abs_u
            );
        }
        Command::Analyze { problem, out, seed } => {
            let r = commands::analyze_cmd(&problem, &out, seed)?;
            match r.best_bound {
                Some(t) => println!("lambda_a = {}, blow-up by t = {t}", r.eigen.lambda_a),
                None => println!(
                    "lambda_a = {}, no blow-up criterion applies",
                    r.eigen.lambda_a
                ),
            }
        }
        Command::Spectrum {
            graph,
            potential,
            out,
        } => {
            let r = commands::spectrum(&graph, &potential, &out)?;
            println!("lambda_a = {} (residual {:e})", r.lambda_a, r.residual);
        }
        Command::Plot {
            trajectory,
            out,
            columns,
            log_y,
            envelope,
            mu_min,
            title,
        } => {
            let req = PlotRequest {
                columns: &columns,
                log_y,
                envelope: envelope.map(|lambda_a| EnvelopeSpec { lambda_a, mu_min }),
                title,
            };
            commands::plot(&trajectory, &out, &req)?;
        }
        Command::Reproduce {
            preset,
            out_dir,
            seed,
        } => {
            let summary = commands::reproduce(&preset, &out_dir, seed)?;
            for line in commands::summary_lines(&summary) {
                println!("{line}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
