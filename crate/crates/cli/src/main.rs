use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use diagnef::scalar::{parse_rational, Scalar};
use diagnef_cli::config::Config;
use diagnef_cli::pipeline::{self, PipelineError, RunOptions};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "diagnef", version, about = "Characterize bivariate exponential families with a quadratic variance diagonal")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args)]
struct Flags {
    /// Root, weight-sum and check tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Side of the parameter grid used by the variance check.
    #[arg(long, global = true, default_value_t = 11)]
    grid: usize,
    /// Total order of the series expansion.
    #[arg(long, global = true, default_value_t = 8)]
    depth: usize,
    /// Coefficient bound for the lattice search.
    #[arg(long, global = true, default_value_t = 50)]
    bound: u32,
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Draw the check grid at random from this seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline.
    Characterize { config: String },
    /// Characteristic quartic, its roots and their dual ordinates.
    Roots { config: String },
    /// Mixed-sign relation test on an explicit 3x3 matrix.
    Lattice { config: String },
    /// Series coefficients of the candidate transform.
    Expand { config: String },
    /// Search for parameters where the transform exceeds one in modulus.
    Scan { config: String },
    /// Cumulant function, mean and variance at a parameter.
    Eval {
        config: String,
        /// Parameter as `x,y`; overrides `theta` in the config.
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
    },
    /// The realized measure tilted to a parameter.
    Tilt {
        config: String,
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions {
        tol: cli.flags.tol,
        grid: cli.flags.grid,
        depth: cli.flags.depth,
        bound: cli.flags.bound,
        seed: cli.flags.seed,
    };
    match run(&cli.command, &opts, cli.flags.json) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: &Command, opts: &RunOptions, json: bool) -> Result<u8, PipelineError> {
    match command {
        Command::Characterize { config } => {
            let report = pipeline::run_characterize(&Config::load(config)?, opts)?;
            let text = if json { report.to_json() } else { report.to_string() };
            print_out(&text);
            Ok(report.exit_code())
        }
        Command::Roots { config } => {
            let r = pipeline::run_roots(&Config::load(config)?, opts)?;
            emit(&r, json, || {
                let atoms: Vec<String> = r.atoms.iter().map(|a| format!("({}, {})", a.lambda, a.nu)).collect();
                format!(
                    "quartic coefficients {}\npattern {} (n_r = {})\natoms {}",
                    r.quartic.join(" "),
                    r.pattern,
                    r.n_r,
                    atoms.join(" ")
                )
            });
            Ok(0)
        }
        Command::Lattice { config } => {
            let r = pipeline::run_lattice(&Config::load(config)?, opts)?;
            emit(&r, json, || {
                let witness = r.star.witness.as_ref().map_or("none".into(), |w| w.join(", "));
                format!("holds {}\nmethod {}\nkernel dimension {}\nwitness {witness}", r.star.holds, r.star.method, r.star.kernel_dim)
            });
            Ok(0)
        }
        Command::Expand { config } => {
            let r = pipeline::run_expand(&Config::load(config)?, opts)?;
            emit(&r, json, || {
                let mut lines = vec![format!("pivot {} ({:?}), complete {}", r.pivot, r.pivot_case, r.complete)];
                let mut terms = r.terms.clone();
                terms.sort_by(|a, b| a.order.cmp(&b.order).then(a.point[0].total_cmp(&b.point[0])));
                lines.extend(terms.iter().map(|t| {
                    format!("order {:>2}  ({}, {})  {:e}", t.order, t.point[0], t.point[1], t.coefficient)
                }));
                lines.join("\n")
            });
            Ok(0)
        }
        Command::Scan { config } => {
            let r = pipeline::run_scan(&Config::load(config)?, opts)?;
            emit(&r, json, || {
                r.forms
                    .iter()
                    .map(|f| match f.witness {
                        Some(t) => format!("{}: unbounded, witness t = {t}", f.label),
                        None => format!("{}: no witness", f.label),
                    })
                    .collect::<Vec<_>>()
                    .join("\n")
            });
            Ok(0)
        }
        Command::Eval { config, theta } => {
            let cfg = Config::load(config)?;
            let r = pipeline::run_eval(&cfg, pick_theta(&cfg, theta)?, opts)?;
            emit(&r, json, || {
                format!("k {}\nmean {:?}\nvariance {:?}", r.k, r.mean, r.variance)
            });
            Ok(0)
        }
        Command::Tilt { config, theta } => {
            let cfg = Config::load(config)?;
            let r = pipeline::run_tilt(&cfg, pick_theta(&cfg, theta)?, opts)?;
            emit(&r, json, || {
                r.points
                    .iter()
                    .zip(&r.masses)
                    .map(|(p, m)| format!("({}, {})  {m}", p[0], p[1]))
                    .collect::<Vec<_>>()
                    .join("\n")
            });
            Ok(0)
        }
    }
}

fn emit<T: Serialize>(value: &T, json: bool, human: impl FnOnce() -> String) {
    let text = if json { serde_json::to_string_pretty(value).expect("report serializes") } else { human() };
    print_out(&text);
}

/// Writes one document; a closed pipe downstream is not an error.
fn print_out(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}").and_then(|_| out.flush());
}

fn pick_theta(cfg: &Config, flag: &Option<String>) -> Result<[f64; 2], PipelineError> {
    let Some(text) = flag else {
        return Ok(cfg.theta.unwrap_or([0.0, 0.0]));
    };
    let parts: Vec<&str> = text.split(',').collect();
    let bad = || PipelineError::Input(format!("--theta expects `x,y`, got `{text}`"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let x = parse_rational(parts[0]).map_err(|_| bad())?;
    let y = parse_rational(parts[1]).map_err(|_| bad())?;
    Ok([x.to_f64(), y.to_f64()])
}
