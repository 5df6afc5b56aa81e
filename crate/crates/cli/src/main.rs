//! `harmpadic`: p-adic valuations of harmonic numbers from the command line.
//!
//! Every flag can also be supplied through an environment variable with the
//! `HARMPADIC_` prefix (for example `HARMPADIC_CACHE_DIR`); an explicit flag
//! always wins. Exit codes are stable: 0 success, 1 a verification suite
//! reported failures, 2 usage or domain error, 3 undetermined result,
//! 4 capacity exceeded.

mod cache;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use harmonic_padic::Error;

#[derive(Parser)]
#[command(
    name = "harmpadic",
    version,
    about = "p-adic valuations of harmonic numbers: evaluation, J_p search, Wolstenholme scans"
)]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
    Text,
}

/// Run-wide configuration, available on every subcommand.
#[derive(Args, Debug, Clone)]
struct ConfigArgs {
    /// Working precision in base-p digits (default: 12 for evaluation, 96
    /// for the J_p search)
    #[arg(long, global = true, env = "HARMPADIC_PRECISION")]
    precision: Option<u32>,

    /// Digit-count budget for the J_p lifting search
    #[arg(long, global = true, default_value_t = harmonic_padic::jp::DEFAULT_LEVEL_CAP, env = "HARMPADIC_LEVEL_CAP")]
    level_cap: u32,

    /// Largest Bernoulli index kept in the exact table
    #[arg(long, global = true, default_value_t = harmonic_padic::bernoulli::DEFAULT_BERNOULLI_CAP, env = "HARMPADIC_BERNOULLI_CAP")]
    bernoulli_cap: u64,

    /// Largest n admitted to exact streaming scans
    #[arg(long, global = true, default_value_t = harmonic_padic::harmonic::EXACT_MODE_BOUND, env = "HARMPADIC_EXACT_MODE_BOUND")]
    exact_mode_bound: u64,

    /// Scan worker threads (default: available parallelism)
    #[arg(long, global = true, env = "HARMPADIC_WORKERS")]
    workers: Option<usize>,

    /// Result cache directory
    #[arg(long, global = true, default_value = ".harmpadic-cache", env = "HARMPADIC_CACHE_DIR")]
    cache_dir: PathBuf,

    /// Output format where a command supports more than one
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text, env = "HARMPADIC_FORMAT")]
    format: OutputFormat,

    /// Skip the result cache entirely
    #[arg(long, global = true, env = "HARMPADIC_NO_CACHE")]
    no_cache: bool,
}

impl ConfigArgs {
    fn validate(&self) -> Result<(), Error> {
        let positive: [(&str, u64); 3] = [
            ("--level-cap", self.level_cap as u64),
            ("--bernoulli-cap", self.bernoulli_cap),
            ("--exact-mode-bound", self.exact_mode_bound),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Domain(format!("{name} must be positive")));
            }
        }
        if self.precision == Some(0) {
            return Err(Error::Domain("--precision must be positive".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Domain("--workers must be positive".into()));
        }
        Ok(())
    }

    fn eval_precision(&self) -> u32 {
        self.precision
            .unwrap_or(harmonic_padic::harmonic::DEFAULT_WORKING_PRECISION)
    }

    fn search_precision(&self) -> u32 {
        self.precision
            .unwrap_or(harmonic_padic::jp::DEFAULT_SEARCH_PRECISION)
    }

    fn worker_count(&self) -> usize {
        self.workers.unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print nu_p(H(n)); "inf" for n = 0
    Valuation {
        /// The prime p
        #[arg(long, env = "HARMPADIC_P")]
        p: u64,
        /// n as a decimal integer of any size
        #[arg(long, env = "HARMPADIC_N")]
        n: String,
        /// Also print the unit to this many base-p digits
        #[arg(long, env = "HARMPADIC_DIGITS")]
        digits: Option<u32>,
        /// Shorthand for --format json
        #[arg(long, env = "HARMPADIC_JSON")]
        json: bool,
    },
    /// Enumerate J_p = { n : p | numerator(H(n)) }
    Jp {
        /// The prime p
        #[arg(long, env = "HARMPADIC_P")]
        p: u64,
        /// Exhaustive streaming scan instead of the lifting search
        #[arg(long, env = "HARMPADIC_SCAN")]
        scan: bool,
        /// Scan window upper bound (scan mode; default: --exact-mode-bound)
        #[arg(long, env = "HARMPADIC_BOUND")]
        bound: Option<u64>,
        /// Digit-count budget override (search mode; default: --level-cap)
        #[arg(long, env = "HARMPADIC_CAP")]
        cap: Option<u32>,
    },
    /// Test primes for the Wolstenholme property
    Wolstenholme {
        /// A single prime to test
        #[arg(long, env = "HARMPADIC_P", conflicts_with = "range")]
        p: Option<u64>,
        /// Scan an inclusive prime range
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], env = "HARMPADIC_RANGE")]
        range: Option<Vec<u64>>,
        /// Continue a previously checkpointed scan of the same range
        #[arg(long, env = "HARMPADIC_RESUME")]
        resume: bool,
    },
    /// Measure and classify the valuation tower nu_p(H(p^m n))
    Tower {
        /// The prime p
        #[arg(long, env = "HARMPADIC_P")]
        p: u64,
        /// Tower base n (decimal, any size, coprime to p)
        #[arg(long, env = "HARMPADIC_N")]
        n: String,
        /// Highest tower level to measure
        #[arg(long, default_value_t = harmonic_padic::wolstenholme::DEFAULT_TOWER_LEVELS, env = "HARMPADIC_MMAX")]
        mmax: u32,
    },
    /// Emit the valuation table nu_p(H(pm+k)) for m = 0..rows
    Table {
        /// The prime p
        #[arg(long, env = "HARMPADIC_P")]
        p: u64,
        /// Number of table rows
        #[arg(long, env = "HARMPADIC_ROWS")]
        rows: u32,
    },
    /// Run a named verification suite
    Verify {
        /// One of: lemmas, kummer, vonstaudt, formula1, oracle
        #[arg(long, env = "HARMPADIC_SUITE")]
        suite: String,
    },
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Undetermined { .. } | Error::NotComplete { .. } => 3,
        Error::Capacity { .. } | Error::ExactBoundExceeded { .. } | Error::PrecisionExhausted { .. } => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    // die quietly when the read end of a pipe closes (e.g. `... | head`)
    // instead of panicking on the next print
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let run = cli
        .config
        .validate()
        .and_then(|()| commands::dispatch(&cli.config, cli.command));
    match run {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
