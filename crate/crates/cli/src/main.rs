//! `opprog`: batch tools for operation programs and the annotation service.

mod commands;
mod config;

use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::builder::NonEmptyStringValueParser;
use clap::{CommandFactory, Parser, Subcommand};
use serde_json::json;

use config::{CliConfig, GlobalArgs};

#[derive(Debug, Parser)]
#[command(name = "opprog", version, about = "Operation programs for math word problems")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute a program and print every step value
    Exec {
        /// Program text, or `-` for stdin
        #[arg(value_parser = NonEmptyStringValueParser::new())]
        program: String,
        /// Problem numbers n0, n1, ...
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "text")]
        numbers: Vec<f64>,
        /// Problem text to take the numbers from
        #[arg(long)]
        text: Option<String>,
    },
    /// Parse a program and check its references
    Parse {
        #[arg(value_parser = NonEmptyStringValueParser::new())]
        program: String,
        /// How many problem numbers exist (default: enough for the program)
        #[arg(long)]
        numbers_count: Option<usize>,
    },
    /// Assign a domain category to problem text
    Categorize {
        /// Problem text, or `-` for stdin
        #[arg(value_parser = NonEmptyStringValueParser::new())]
        text: String,
    },
    /// Derive candidate programs from worked solutions
    Annotate {
        #[arg(long, requires_all = ["rationale", "answer"], conflicts_with = "dataset")]
        problem: Option<String>,
        #[arg(long)]
        rationale: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        answer: Option<f64>,
        /// Annotate every record of a dataset file
        #[arg(long, env = "OPPROG_DATASET")]
        dataset: Option<PathBuf>,
        #[arg(long, env = "OPPROG_ANNOTATE_MAX_LEN")]
        max_len: Option<usize>,
        /// Constant names to search with (default: all)
        #[arg(long, value_delimiter = ',')]
        constants: Option<Vec<String>>,
    },
    /// Brute-force every program reaching a target value
    Enumerate {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "text")]
        numbers: Vec<f64>,
        #[arg(long)]
        text: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        target: f64,
        #[arg(long, env = "OPPROG_ENUMERATE_MAX_LEN")]
        max_len: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        constants: Option<Vec<String>>,
        /// Emit both argument orders of commutative operations
        #[arg(long)]
        order_variants: bool,
    },
    /// Corpus statistics per category
    Stats {
        #[arg(env = "OPPROG_DATASET")]
        dataset: Option<PathBuf>,
    },
    /// Check that each record's program reaches its correct option
    Validate {
        #[arg(env = "OPPROG_DATASET")]
        dataset: Option<PathBuf>,
        /// Write only the valid records to this file
        #[arg(long)]
        fix: Option<PathBuf>,
    },
    /// Near-duplicate clusters by word edit distance
    Duplicates {
        #[arg(env = "OPPROG_DATASET")]
        dataset: Option<PathBuf>,
        /// Also label each record's solvability
        #[arg(long)]
        solvability: bool,
    },
    /// Copy programs onto unannotated near-duplicates
    Expand {
        #[arg(long)]
        annotated: PathBuf,
        #[arg(long)]
        unannotated: PathBuf,
        /// Where to write the accepted records
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score prediction beams against a dataset
    Eval {
        #[arg(long, env = "OPPROG_DATASET")]
        dataset: Option<PathBuf>,
        /// JSON-lines beam file, or `empty` for no predictions
        #[arg(long)]
        beams: String,
    },
    /// Run the annotation HTTP service
    Serve {
        /// Service TOML file
        #[arg(long, env = "OPPROG_SERVICE_CONFIG")]
        service_config: Option<PathBuf>,
        #[arg(long)]
        host: Option<String>,
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        problems: Option<PathBuf>,
        #[arg(long)]
        event_log: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::new("io", format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            if e.use_stderr() && !e.to_string().contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return ExitCode::from(code as u8);
        }
    };
    let result = CliConfig::resolve(&cli.global).and_then(|cfg| commands::run(cli.command, &cfg, cli.global.json));
    match result {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", json!({"error": {"code": e.code, "message": e.message}}));
            ExitCode::from(if e.code == "usage" { 2 } else { 1 })
        }
    }
}
