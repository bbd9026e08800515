//! Command-line front end for the sieve-network simulation studies.

mod config;
mod output;
mod run;

use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or config file; exit code 1.
    Usage(String),
    /// Filesystem failure; exit code 2.
    Io(String),
    /// A report invariant broke; exit code 3.
    Invariant(String),
}

const USAGE: &str = "\
nn-sieve - sieve-network simulation studies

USAGE:
  nn-sieve <COMMAND> [FLAGS]

COMMANDS:
  inconsistency   Fit a two-unit network and compare fitted parameters with
                  the generating ones (function fits, parameters do not)
  consistency     Fit error and loss across growing sample sizes
  normality       Replicate fits and test the scaled fit-error statistic
                  against the standard normal
  diagnostics     Tabulate growth-rate ratios and the covering-rate terms
                  for a schedule over a sample-size grid

FLAGS:
  --command NAME      Alternative to the positional command
  --truth KIND        nn | trig | nd | all
  --n N               Single sample size (shorthand for a one-point grid)
  --n-grid A,B,...    Increasing sample-size grid
  --noise-sd F        Noise standard deviation
  --r-exponent F      Hidden units grow as floor(n^F)
  --v-scale F         Output-weight budget scale (must exceed 4)
  --v-exponent F      Output-weight budget grows as v-scale * n^F
  --iterations N      Training iterations per fit
  --replicates N      Replicates per (truth, n) cell
  --seed U64          Master seed; replicates derive their own seeds from it
  --out DIR           Output directory (default .)
  --format csv|json   Result table format (Q-Q data is always CSV)
  --workers N         Worker threads for replicate fan-out (0 = default)
  --config PATH       Flat key-value JSON config; flags override its values

Each command's defaults are the standard setup of its study.
Exit codes: 0 ok, 1 usage error, 2 I/O error, 3 internal invariant violation.
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--help" || a == "-h") {
        print!("{USAGE}");
        return ExitCode::SUCCESS;
    }
    match try_main(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n\n{USAGE}");
            ExitCode::from(1)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("I/O error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Invariant(msg)) => {
            eprintln!("invariant violation: {msg}");
            ExitCode::from(3)
        }
    }
}

fn try_main(args: &[String]) -> Result<(), CliError> {
    let config = config::parse_config(args)?;
    if config.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build_global()
            .map_err(|e| CliError::Usage(format!("worker pool: {e}")))?;
    }
    run::execute(&config)
}
