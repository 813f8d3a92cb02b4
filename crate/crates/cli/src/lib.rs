//! Command-line front end for `partition-crt`.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 usage error, 3 construction
//! violation. With `--format json` (the default) every path, failures
//! included, writes a single JSON document to standard output.

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use partition_crt_core::{Bound, Preset, ProgressionClaim};

mod commands;
mod error;
pub mod sweep;

pub use error::CliError;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_CONSTRUCTION: u8 = 3;

/// Caps the number of worker threads used by `sweep`.
pub const THREADS_ENV: &str = "PARTITION_CRT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "partition-crt", version)]
#[command(about = "Build partition identities P(A; n) = Q(B; n) and check them exactly")]
pub struct Cli {
    /// Output format. `csv` applies to count tables only.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an identity and print it as JSON
    Gen {
        #[command(subcommand)]
        builder: GenCommand,
    },
    /// Check an identity by series and by enumeration
    Verify(VerifyArgs),
    /// Print a table of p(n), P(A; n) or Q(B; n)
    Count(CountArgs),
    /// Transfer a congruence for p(n) to P(A; n) and check it on a window
    Congruence(CongruenceArgs),
    /// Build and verify a seeded sample of parameter tuples
    Sweep(SweepArgs),
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Chinese-remainder construction
    Crt {
        /// Pairwise coprime moduli m_1..m_s
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<u64>,
        /// Offsets a_i, each coprime to m_i
        #[arg(long, value_delimiter = ',', required = true)]
        a: Vec<u64>,
        #[arg(long, default_value_t = 1)]
        k: u64,
        /// Positive integer or `inf`
        #[arg(long)]
        l: Bound,
        /// Replacement residues r_i (must satisfy the same congruences)
        #[arg(long, value_delimiter = ',')]
        r: Option<Vec<u64>>,
    },
    /// Divisibility-chain construction
    Chain {
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<u64>,
        /// r_1..r_{s+1} with r_i | r_{i+1}
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<u64>,
        /// Positive integer or `inf`
        #[arg(long)]
        l: Bound,
    },
    /// Classical identity: euler, glaisher=d, macmahon, andrews=r, subbarao=l,r, nm=l,r,a,p
    Preset { preset: Preset },
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Instance JSON file, or `-` for standard input
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 300)]
    pub n_max: u64,
    #[arg(long, default_value_t = 40)]
    pub oracle_max: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CountWhat {
    /// Unrestricted partitions
    #[value(name = "p")]
    Partitions,
    /// Multiplicities in A
    #[value(name = "P")]
    Multiplicities,
    /// Parts in B
    #[value(name = "Q")]
    Parts,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[arg(value_enum)]
    pub what: CountWhat,
    /// Instance JSON file, or `-` for standard input
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub n_max: u64,
    /// Reduce modulo d
    #[arg(long = "mod")]
    pub modulus: Option<u64>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("claims_source").required(true).args(["claim", "claims"])))]
pub struct CongruenceArgs {
    /// Instance JSON file, or `-` for standard input. Without it the claim is
    /// checked on p(n).
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// 1-based CRT factor index
    #[arg(long, conflicts_with = "chain")]
    pub factor: Option<usize>,
    /// Transfer through the chain construction
    #[arg(long)]
    pub chain: bool,
    /// Base claim `m,c,d` meaning p(m n + c) = 0 mod d
    #[arg(long)]
    pub claim: Option<ProgressionClaim>,
    /// JSON-lines file of base claims {"m":..,"c":..,"d":..}
    #[arg(long)]
    pub claims: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub n_max: u64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 3)]
    pub s_max: usize,
    #[arg(long, default_value_t = 7)]
    pub m_max: u64,
    #[arg(long, default_value_t = 2)]
    pub k_max: u64,
    #[arg(long, default_value_t = 3)]
    pub l_max: u64,
    #[arg(long, default_value_t = 120)]
    pub n_max: u64,
    #[arg(long, default_value_t = 30)]
    pub oracle_max: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of distinct tuples to sample
    #[arg(long, default_value_t = 200)]
    pub count: usize,
    /// Window for transferred Ramanujan congruences
    #[arg(long, default_value_t = 100)]
    pub window: u64,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Results and JSON errors go to `out`; human-readable diagnostics go
/// to `err`.
pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{}", e.render());
                return EXIT_PASS;
            }
            let text = e.render().to_string();
            let text = text.trim_end();
            let e = CliError::Usage(text.strip_prefix("error: ").unwrap_or(text).to_owned());
            error::report(&e, sniff_format(&args), out, err);
            return e.exit_code();
        }
    };
    match commands::execute(&cli, input, out) {
        Ok(code) => code,
        Err(e) => {
            error::report(&e, cli.format, out, err);
            e.exit_code()
        }
    }
}

/// Best-effort `--format` lookup for arguments clap rejected.
fn sniff_format(args: &[OsString]) -> Format {
    let args: Vec<String> = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let csv = args.windows(2).any(|w| w[0] == "--format" && w[1] == "csv")
        || args.iter().any(|a| a == "--format=csv");
    if csv {
        Format::Csv
    } else {
        Format::Json
    }
}
