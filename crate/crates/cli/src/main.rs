use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use tabledsl::Target;
use tabledsl_cli::corpus::{self, Corpus};
use tabledsl_cli::transpile::{transpile, Status};
use tabledsl_cli::{check, complete, write_atomically};
use tabledsl_lsp::HubConfig;

/// Transpile, check and complete the dataframe DSL written in `##` comments.
#[derive(Parser)]
#[command(name = "tabledsl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Insert generated code below each DSL comment.
    Transpile {
        file: PathBuf,
        #[arg(long, value_enum)]
        target: TargetArg,
        /// Rewrite the file instead of printing the result.
        #[arg(long)]
        in_place: bool,
        #[arg(long, default_value = "##")]
        prefix: String,
    },
    /// Report DSL lines that do not parse.
    Check {
        file: PathBuf,
        #[arg(long, default_value = "##")]
        prefix: String,
    },
    /// Print completions at a 0-based line and byte column.
    Complete {
        file: PathBuf,
        #[arg(long)]
        line: usize,
        #[arg(long)]
        col: usize,
        #[arg(long, value_enum, default_value = "pandas")]
        target: TargetArg,
        #[arg(long, default_value = "##")]
        prefix: String,
    },
    /// Classify a coverage corpus and print the category counts.
    CorpusReport { corpus: PathBuf },
    /// Run the language server on stdin/stdout.
    Serve {
        /// Key=value configuration file; defaults to $TABLEDSL_CONFIG.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Pandas,
    Spark,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Target {
        match t {
            TargetArg::Pandas => Target::Pandas,
            TargetArg::Spark => Target::Spark,
        }
    }
}

/// Exit codes: 0 ok, 1 DSL errors or classification mismatch, 2 I/O or usage.
fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("tabledsl: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn run(command: Command) -> anyhow::Result<u8> {
    match command {
        Command::Transpile {
            file,
            target,
            in_place,
            prefix,
        } => {
            let source = read(&file)?;
            let (output, report) = transpile(&source, target.into(), &prefix);
            for record in &report.records {
                match &record.status {
                    Status::ParseError(e) => eprintln!(
                        "{}:{}:{}: {e}",
                        file.display(),
                        record.line_no,
                        record.payload_offset + e.position + 1
                    ),
                    Status::EmptyEmission(why) => {
                        eprintln!(
                            "{}:{}: warning: no code generated: {why}",
                            file.display(),
                            record.line_no
                        )
                    }
                    Status::Generated(_) => {}
                }
            }
            if report.has_errors() {
                return Ok(1);
            }
            if in_place {
                if output != source {
                    write_atomically(&file, output.as_bytes())
                        .with_context(|| format!("cannot write {}", file.display()))?;
                }
            } else {
                print!("{output}");
            }
            Ok(0)
        }
        Command::Check { file, prefix } => {
            let diags = check::check(&read(&file)?, &prefix);
            for d in &diags {
                println!("{}:{}:{}: {}", file.display(), d.line, d.col, d.message);
            }
            Ok(u8::from(!diags.is_empty()))
        }
        Command::Complete {
            file,
            line,
            col,
            target,
            prefix,
        } => {
            let items = complete::complete_at(&read(&file)?, line, col, target.into(), &prefix)?;
            print!("{}", complete::format_items(&items));
            Ok(0)
        }
        Command::CorpusReport { corpus } => {
            let text = read(&corpus)?;
            let parsed = Corpus::parse(&text)
                .with_context(|| format!("malformed corpus {}", corpus.display()))?;
            let report = corpus::report(&parsed);
            println!("{report}");
            Ok(u8::from(report.has_failures()))
        }
        Command::Serve { config } => {
            let config = HubConfig::resolve(config.as_deref())?;
            let code = tabledsl_lsp::serve_stdio(config);
            Ok(u8::try_from(code).unwrap_or(1))
        }
    }
}
