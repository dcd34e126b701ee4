use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use tql_core::dynamic::DEFAULT_BUDGET;

use crate::corpus::run_corpus;
use crate::load::{load_program, load_queries};
use crate::report::{render, run_queries, EngineKind, Format};

pub const EXIT_CLEAN: u8 = 0;
pub const EXIT_FINDINGS: u8 = 1;
pub const EXIT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "tql")]
#[command(about = "Run taint-flow queries against TQL-Lite programs")]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one program with every query of a query file
    Analyze {
        /// Program source (.tl)
        #[arg(long)]
        program: PathBuf,
        /// Query file (.tq)
        #[arg(long)]
        queries: PathBuf,
        #[arg(long, value_enum, default_value_t = EngineKind::Static)]
        engine: EngineKind,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Entry function; `main` when present, else the first function
        #[arg(long)]
        entry: Option<String>,
        /// Statement budget of the dynamic engine
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Check every `*.manifest.json` below a directory
    Corpus {
        dir: PathBuf,
        /// Restrict to one engine
        #[arg(long, value_enum)]
        engine: Option<EngineKind>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

/// Runs the command line and returns the process exit code: 0 without
/// findings, 1 with findings (or a failing corpus), 2 on errors.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_CLEAN };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match cli.command {
        Command::Analyze {
            program,
            queries,
            engine,
            format,
            entry,
            budget,
        } => {
            let loaded = load_program(&program, entry.as_deref())
                .and_then(|p| load_queries(&queries).map(|q| (p, q)));
            let (p, root) = match loaded {
                Ok(v) => v,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return EXIT_ERROR;
                }
            };
            let name = program.to_string_lossy().replace('\\', "/");
            match run_queries(&root, &p, &name, engine.engine(budget).as_ref()) {
                Ok(report) => {
                    let _ = out.write_all(render(&report, format).as_bytes());
                    if report.findings.is_empty() {
                        EXIT_CLEAN
                    } else {
                        EXIT_FINDINGS
                    }
                }
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    EXIT_ERROR
                }
            }
        }
        Command::Corpus { dir, engine, format } => match run_corpus(&dir, engine) {
            Ok(report) => {
                let text = match format {
                    Format::Text => report.render_text(),
                    Format::Json => report.render_json(),
                };
                let _ = out.write_all(text.as_bytes());
                if report.passed() {
                    EXIT_CLEAN
                } else {
                    EXIT_FINDINGS
                }
            }
            Err(e) => {
                let _ = writeln!(err, "error: {}: {e}", dir.display());
                EXIT_ERROR
            }
        },
    }
}
