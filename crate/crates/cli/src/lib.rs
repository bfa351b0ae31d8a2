//! `ufatou`: gallery runs, checks of user-supplied sequences and the
//! randomized enumeration oracle.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;
use uniform_fatou::{theorem1_report, Consistency, ExampleId, GalleryEntry, Grids, Rational};

pub mod oracle;
pub mod report;
pub mod spec;

use report::Report;
use spec::SequenceSpecFile;

pub mod exit {
    /// Closed forms match, or the report is consistent.
    pub const OK: i32 = 0;
    /// Some verdict could not be decided from the prefix.
    pub const UNDETERMINED: i32 = 1;
    /// Closed form disagrees with a computed value, or the gap disagrees
    /// with the two conditions under total-variation convergence.
    pub const MISMATCH: i32 = 2;
    pub const HYPOTHESIS_NOT_MET: i32 = 3;
    pub const USAGE: i32 = 64;
    pub const DATA: i32 = 65;
    pub const IO: i32 = 74;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Data { path: String, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Core(#[from] uniform_fatou::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use uniform_fatou::Error as E;
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Data { .. } => exit::DATA,
            CliError::Io { .. } => exit::IO,
            CliError::Core(
                E::InvalidGrid(_)
                | E::UnknownExample(_)
                | E::NonPositive { .. }
                | E::EmptyRange(_)
                | E::InvalidTermIndex(_),
            ) => exit::USAGE,
            CliError::Core(E::ExpectationMismatch { .. }) => exit::MISMATCH,
            CliError::Core(_) => exit::DATA,
        }
    }
}

/// Inclusive index range written `a..b`, or a single index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NRange {
    pub first: u64,
    pub last: u64,
}

impl FromStr for NRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<u64>().map_err(|e| format!("bad index {t:?}: {e}"));
        let (first, last) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
            None => {
                let n = parse(s)?;
                (n, n)
            }
        };
        if first == 0 || first > last {
            return Err(format!("range {s:?} must satisfy 1 <= a <= b"));
        }
        Ok(NRange { first, last })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Md,
}

#[derive(Debug, Parser)]
#[command(name = "ufatou", version, about = "Exact uniform Fatou gap diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Comma-separated eps values, e.g. 1,1/2
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<Rational>>,
    /// Comma-separated K values, e.g. 1,2,4
    #[arg(long = "K", value_delimiter = ',')]
    k: Option<Vec<Rational>>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write the report here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report on one of the built-in counterexamples
    Gallery {
        /// 3.1, 3.2, 3.3 or 3.4
        #[arg(long)]
        example: String,
        #[arg(long, default_value = "1..64")]
        n: NRange,
        #[command(flatten)]
        grids: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Report on a sequence read from a JSON spec file
    Check {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 64)]
        prefix: u64,
        #[command(flatten)]
        grids: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare closed forms with subset enumeration on random instances
    Oracle {
        #[arg(long, default_value_t = 12)]
        max_cells: usize,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Offset every closed-form gap_inf (harness self-test)
        #[arg(long, hide = true)]
        corrupt: bool,
    },
}

fn grids(g: GridArgs, prefix: u64) -> Grids {
    let d = Grids::default();
    Grids {
        eps: g.eps.unwrap_or(d.eps),
        k: g.k.unwrap_or(d.k),
        prefix,
    }
}

fn emit(text: &str, out: Option<&PathBuf>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => report.to_json(),
        Format::Md => report.to_markdown(),
    }
}

fn gallery(example: &str, n: NRange, g: GridArgs, output: OutputArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let id: ExampleId = example.parse()?;
    let grids = grids(g, n.last);
    let entry = GalleryEntry::new(id, &grids.eps, &grids.k)?;
    let v = theorem1_report(entry.sequence(), &grids)?;
    let report = Report::new("gallery", format!("example {id}"), n.first, v);
    emit(&render(&report, output.format), output.out.as_ref(), stdout)?;
    Ok(if report.mismatches.is_empty() {
        exit::OK
    } else {
        exit::MISMATCH
    })
}

fn check(spec: PathBuf, prefix: u64, g: GridArgs, output: OutputArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let origin = spec.display().to_string();
    let seq = SequenceSpecFile::load(&spec)?.to_sequence(&origin)?;
    let v = theorem1_report(&seq, &grids(g, prefix))?;
    let report = Report::new("check", origin, 1, v);
    emit(&render(&report, output.format), output.out.as_ref(), stdout)?;
    if !report.mismatches.is_empty() {
        return Ok(exit::MISMATCH);
    }
    Ok(match report.verdicts.consistency {
        Consistency::Consistent => exit::OK,
        Consistency::Undetermined => exit::UNDETERMINED,
        Consistency::Inconsistent => exit::MISMATCH,
        Consistency::HypothesisNotMet => exit::HYPOTHESIS_NOT_MET,
    })
}

fn oracle_cmd(
    max_cells: usize,
    trials: u64,
    seed: u64,
    out: Option<PathBuf>,
    corrupt: bool,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    if max_cells == 0 || max_cells > uniform_fatou::fatou::BRUTE_FORCE_MAX_CELLS {
        return Err(CliError::Usage(format!(
            "--max-cells must be between 1 and {}",
            uniform_fatou::fatou::BRUTE_FORCE_MAX_CELLS
        )));
    }
    let summary = oracle::run_oracle(max_cells, trials, seed, corrupt)?;
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    emit(&text, out.as_ref(), stdout)?;
    Ok(if summary.failed == 0 { exit::OK } else { exit::MISMATCH })
}

/// Runs one invocation and returns its exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Gallery {
            example,
            n,
            grids,
            output,
        } => gallery(&example, n, grids, output, stdout),
        Command::Check {
            spec,
            prefix,
            grids,
            output,
        } => check(spec, prefix, grids, output, stdout),
        Command::Oracle {
            max_cells,
            trials,
            seed,
            out,
            corrupt,
        } => oracle_cmd(max_cells, trials, seed, out, corrupt, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "ufatou: {e}");
            e.exit_code()
        }
    }
}
