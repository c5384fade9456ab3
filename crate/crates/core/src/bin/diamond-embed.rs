use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use diamond_embed::experiments::{
    self, write_atomic, FuzzParams, Record, TightnessParams,
};
use diamond_embed::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "diamond-embed", version, about = "Diamond graph embedding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Diamond level (maximum level for bound-table).
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Exponent p in [1, 2]; repeatable.
    #[arg(long = "p", global = true)]
    p: Vec<f64>,
    /// Target dimension; repeatable.
    #[arg(long = "d", global = true)]
    d: Vec<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 20)]
    restarts: usize,
    #[arg(long, global = true, default_value_t = 10_000)]
    trials: usize,
    /// Write output to this path instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Graph JSON of G_k.
    Generate,
    /// Certified lower bounds for k <= --k and each --p.
    BoundTable,
    /// Certified lower bound against the optimizer's best embedding.
    Tightness,
    /// Best l_1^d distortion per --d, with the chain lower bound.
    DimSweep,
    /// Exact minimum l_1 distortion via the cut LP.
    L1Exact,
    /// Randomized checks of the inequalities.
    Fuzz,
    /// Shortest-path metric CSV of G_k.
    Metric,
}

#[derive(Serialize)]
struct LevelParams {
    k: usize,
}

fn require_k(cli: &Cli) -> Result<usize> {
    cli.k
        .ok_or_else(|| Error::InvalidArgument("--k is required".into()))
}

fn single<T: Copy>(values: &[T], flag: &str) -> Result<T> {
    match values {
        [v] => Ok(*v),
        _ => Err(Error::InvalidArgument(format!(
            "exactly one --{flag} is required, got {}",
            values.len()
        ))),
    }
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// Runs the command; returns its output and whether it found a violation.
fn run(cli: &Cli) -> Result<(String, bool)> {
    match cli.command {
        Command::Generate => Ok((json(&experiments::generate(require_k(cli)?)?)?, false)),
        Command::Metric => Ok((experiments::metric_csv(require_k(cli)?)?, false)),
        Command::BoundTable => Ok((experiments::bound_table(require_k(cli)?, &cli.p)?, false)),
        Command::Tightness => {
            let params = TightnessParams {
                k: require_k(cli)?,
                p: single(&cli.p, "p")?,
                d: single(&cli.d, "d")?,
                seed: cli.seed,
                restarts: cli.restarts,
            };
            let result = experiments::tightness(&params)?;
            Ok((json(&Record::new("tightness", params, result))?, false))
        }
        Command::DimSweep => {
            let k = require_k(cli)?;
            if cli.d.is_empty() {
                return Err(Error::InvalidArgument("at least one --d is required".into()));
            }
            let sweep = experiments::dim_sweep(k, &cli.d, cli.seed, cli.restarts)?;
            if sweep.l1_constant.is_none() {
                eprintln!("chain bound check unvalidated: G_{k} too large for the cut LP");
            }
            Ok((sweep.to_csv(), false))
        }
        Command::L1Exact => {
            let k = require_k(cli)?;
            let result = experiments::l1_exact(k)?;
            Ok((json(&Record::new("l1-exact", LevelParams { k }, result))?, false))
        }
        Command::Fuzz => {
            let params = FuzzParams {
                trials: cli.trials,
                seed: cli.seed,
                exponents: (!cli.p.is_empty()).then(|| cli.p.clone()),
            };
            let summary = experiments::fuzz(&params)?;
            let failed = !summary.passed();
            if let Some(v) = &summary.violation {
                eprintln!("violation: {}", serde_json::to_string(v)?);
            }
            Ok((json(&Record::new("fuzz", params, summary))?, failed))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|(text, failed)| {
        match &cli.out {
            Some(path) => write_atomic(path, &text)?,
            None => print!("{text}"),
        }
        Ok(failed)
    });
    match outcome {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
