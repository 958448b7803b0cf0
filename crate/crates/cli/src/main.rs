//! `finfreq` binary: exact-arithmetic workbench for frequentist inference
//! over finite parameter spaces.
//!
//! Exit codes: 0 = command ran (verdicts live inside the report),
//! 2 = invalid input, 3 = enumeration budget refusal.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use finfreq::oracle::EnumerationBudget;
use finfreq::ratio::parse_ratio;
use finfreq::{Error, Ratio, Result};
use finfreq_cli::commands::{
    cmd_decide, cmd_estimate, cmd_evaluate, cmd_justify, cmd_power_table, DecideMode,
};
use finfreq_cli::doc::ProblemDocument;

#[derive(Parser)]
#[command(name = "finfreq")]
#[command(about = "Exact-arithmetic workbench for frequentist inference over finite parameter spaces")]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Args)]
struct Common {
    /// Problem document (JSON)
    doc: PathBuf,

    /// Override the document's significance level (rational, e.g. "1/20")
    #[arg(long)]
    alpha: Option<String>,

    /// Write the output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Commands {
    /// Evaluate a declared test: power function, size, level, unbiasedness
    Evaluate {
        #[command(flatten)]
        common: Common,

        /// Id of a declared test
        #[arg(long)]
        test: String,
    },

    /// Decide UMP/UMPU existence, or scan the whole hierarchy
    Decide {
        #[command(flatten)]
        common: Common,

        /// Which decision to run
        #[arg(long, value_enum, default_value_t = RungArg::Hierarchy)]
        rung: RungArg,

        /// Cross-check the power envelope against every deterministic test
        #[arg(long)]
        certify: bool,

        /// Cap on enumerated deterministic tests for --certify
        #[arg(long)]
        max_enumeration: Option<u128>,
    },

    /// Judge whether a declared test meets the highest achievable standard
    Justify {
        #[command(flatten)]
        common: Common,

        /// Id of a declared test
        #[arg(long)]
        test: String,
    },

    /// Tabulate power functions as CSV (exact and decimal columns)
    PowerTable {
        #[command(flatten)]
        common: Common,

        /// Comma-separated test ids (default: all declared)
        #[arg(long, value_delimiter = ',')]
        tests: Vec<String>,
    },

    /// Evaluate declared estimators: MSE, bias, domination, coverage
    Estimate {
        #[command(flatten)]
        common: Common,

        /// Comma-separated estimator ids (default: all declared)
        #[arg(long, value_delimiter = ',')]
        estimators: Vec<String>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RungArg {
    Ump,
    Umpu,
    Hierarchy,
}

fn read_document(path: &Path) -> Result<ProblemDocument> {
    let json = std::fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
    ProblemDocument::from_json(&json)
}

fn parse_alpha(alpha: &Option<String>) -> Result<Option<Ratio>> {
    alpha.as_deref().map(parse_ratio).transpose()
}

fn emit(output: &str, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, output)
            .map_err(|e| Error::Validation(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{output}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Commands::Evaluate { common, test } => {
            let doc = read_document(&common.doc)?;
            let alpha = parse_alpha(&common.alpha)?;
            let out = cmd_evaluate(&doc, &test, alpha.as_ref())?;
            emit(&out, &common.out)
        }
        Commands::Decide { common, rung, certify, max_enumeration } => {
            let doc = read_document(&common.doc)?;
            let alpha = parse_alpha(&common.alpha)?;
            let mode = match rung {
                RungArg::Ump => DecideMode::Ump,
                RungArg::Umpu => DecideMode::Umpu,
                RungArg::Hierarchy => DecideMode::Hierarchy,
            };
            let budget = match max_enumeration {
                Some(cap) => Some(EnumerationBudget::new(cap)?),
                None => Some(EnumerationBudget::default()),
            }
            .filter(|_| certify);
            let out = cmd_decide(&doc, mode, alpha.as_ref(), budget.as_ref())?;
            emit(&out, &common.out)
        }
        Commands::Justify { common, test } => {
            let doc = read_document(&common.doc)?;
            let alpha = parse_alpha(&common.alpha)?;
            let out = cmd_justify(&doc, &test, alpha.as_ref())?;
            emit(&out, &common.out)
        }
        Commands::PowerTable { common, tests } => {
            let doc = read_document(&common.doc)?;
            let alpha = parse_alpha(&common.alpha)?;
            let out = cmd_power_table(&doc, &tests, alpha.as_ref())?;
            emit(&out, &common.out)
        }
        Commands::Estimate { common, estimators } => {
            let doc = read_document(&common.doc)?;
            let alpha = parse_alpha(&common.alpha)?;
            let out = cmd_estimate(&doc, &estimators, alpha.as_ref())?;
            emit(&out, &common.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Budget { required, budget }) => {
            eprintln!("error: enumeration would visit {required} tests, over the budget of {budget}; raise --max-enumeration to proceed");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
