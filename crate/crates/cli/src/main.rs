use std::io::{self, BufRead, IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use semnet_core::factbase::FactError;
use semnet_core::qa::{Outcome, Session, SessionError, DEFAULT_DEPTH};
use semnet_core::Lexicon;

const EXIT_INPUT: u8 = 2;
const EXIT_CORRUPT: u8 = 3;

#[derive(Parser)]
#[command(name = "semnet", version, about = "Controlled-English fact base with question answering")]
struct Cli {
    /// Directory holding paradigm.dic, noun.dic and verb.dic
    #[arg(long)]
    lexicon: PathBuf,
    /// Fact store file; created on first save
    #[arg(long)]
    facts: PathBuf,
    /// Directory of *.kb article files
    #[arg(long)]
    kb: PathBuf,
    /// Resolution depth limit
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    depth: usize,
    /// Print the clauses behind each `yes`
    #[arg(long)]
    trace: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Read commands from standard input
    Repl,
    /// Represent the sentences of a text file and save the store
    Ingest { file: PathBuf },
    /// Answer one question
    Ask { question: String },
    /// Print the fact store
    Dump,
    /// Check a word set against a definition graph
    Primitives { defs: PathBuf, s0: PathBuf },
}

fn print(out: &Outcome) -> io::Result<()> {
    let mut stdout = io::stdout().lock();
    for l in &out.lines {
        writeln!(stdout, "{l}")?;
    }
    stdout.flush()
}

fn repl(session: &mut Session) -> anyhow::Result<bool> {
    let tty = io::stdin().is_terminal();
    let mut failed = false;
    let stdin = io::stdin();
    loop {
        if tty {
            print!("> ");
            io::stdout().flush()?;
        }
        let mut line = String::new();
        if stdin.lock().read_line(&mut line)? == 0 {
            break;
        }
        let out = session.execute(&line);
        failed |= out.input_error;
        print(&out)?;
        if out.quit {
            break;
        }
    }
    Ok(failed)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let lexicon = match Lexicon::load_dir(&cli.lexicon) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(EXIT_INPUT));
        }
    };
    let mut session = Session::new(lexicon);
    session.depth = cli.depth;
    session.trace = cli.trace;
    match session.open_facts(&cli.facts) {
        Ok(()) => {}
        Err(SessionError::Store(e @ FactError::CorruptStore { .. })) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(EXIT_CORRUPT));
        }
        Err(e) => return Err(e).context("opening the fact store"),
    }
    let kb_lines = session.load_kb_dir(&cli.kb).context("loading the knowledge base")?;
    let kb_errors: Vec<&String> = kb_lines.iter().filter(|l| l.starts_with("error")).collect();
    if !kb_errors.is_empty() {
        for l in kb_errors {
            eprintln!("{l}");
        }
        return Ok(ExitCode::from(EXIT_INPUT));
    }

    let out = match cli.command.unwrap_or(Command::Repl) {
        Command::Repl => {
            let failed = repl(&mut session)?;
            return Ok(if failed { ExitCode::from(EXIT_INPUT) } else { ExitCode::SUCCESS });
        }
        Command::Ingest { file } => {
            let text = std::fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let out = session.ingest_text(&text);
            session.save().context("saving the fact store")?;
            out
        }
        Command::Ask { question } => session.ask(&question),
        Command::Dump => session.dump(),
        Command::Primitives { defs, s0 } => {
            let d = std::fs::read_to_string(&defs).with_context(|| format!("reading {}", defs.display()))?;
            let s = std::fs::read_to_string(&s0).with_context(|| format!("reading {}", s0.display()))?;
            session.primitives(&d, &s)
        }
    };
    print(&out)?;
    Ok(if out.input_error { ExitCode::from(EXIT_INPUT) } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
