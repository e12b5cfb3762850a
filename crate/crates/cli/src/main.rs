mod commands;
mod descriptors;
mod document;

use std::fs;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use pwcert::certificate::Verdict;
use pwcert::CertError;

use commands::{execute, Command};
use document::{exit_code, is_computational, render, Document, ErrorDocument, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Json,
    Csv,
}

/// Sampling and interpolation certificates for Paley–Wiener and Bernstein
/// spaces with convex spectrum.
///
/// Exit status: 0 proved or consistent, 1 refuted, 2 inconclusive, 3 input error.
#[derive(Parser, Debug, Serialize)]
#[command(name = "pwcert", version)]
struct Cli {
    /// Write the output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

/// Everything a run prints or writes.
struct Emitted {
    text: String,
    dumps: Vec<(String, String)>,
    code: i32,
}

fn failure(command: Option<String>, argv: &[String], e: &CertError) -> Emitted {
    let code = if is_computational(e) { 2 } else { 3 };
    let doc = ErrorDocument::new(command, argv.to_vec(), e.kind(), e.to_string(), code);
    Emitted { text: render(&doc), dumps: Vec::new(), code }
}

/// Parses and runs one command line (without the program name).
fn run(argv: &[String]) -> Emitted {
    let cli = match Cli::try_parse_from(std::iter::once("pwcert".to_string()).chain(argv.iter().cloned())) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return Emitted { text: e.to_string(), dumps: Vec::new(), code: 0 };
        }
        Err(e) => {
            let doc = ErrorDocument::new(None, argv.to_vec(), "usage", e.to_string(), 3);
            return Emitted { text: render(&doc), dumps: Vec::new(), code: 3 };
        }
    };
    let name = cli.command.name();
    let outcome = match &cli.command {
        Command::Replay(a) => replay(&a.document),
        c => execute(c),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => return failure(Some(name), argv, &e),
    };
    let code = exit_code(outcome.verdict);
    let text = match cli.format {
        Format::Csv => match &outcome.csv {
            Some(c) => c.clone(),
            None => {
                let e = CertError::InvalidSpec(format!("{name} has no CSV form"));
                return failure(Some(name), argv, &e);
            }
        },
        Format::Json => {
            let input = serde_json::to_value(&cli).unwrap_or(serde_json::Value::Null);
            render(&Document::new(name, argv.to_vec(), input, &outcome))
        }
    };
    Emitted { text, dumps: outcome.dumps, code }
}

/// Re-executes the command recorded in a document and compares results.
fn replay(path: &str) -> pwcert::Result<Outcome> {
    let text = fs::read_to_string(path).map_err(|e| CertError::InvalidSpec(format!("cannot read {path}: {e}")))?;
    let doc: Document =
        serde_json::from_str(&text).map_err(|e| CertError::InvalidSpec(format!("{path} is not a result document: {e}")))?;
    let cli = Cli::try_parse_from(std::iter::once("pwcert".to_string()).chain(doc.argv.iter().cloned()))
        .map_err(|e| CertError::InvalidSpec(format!("recorded arguments do not parse: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(CertError::InvalidSpec("replay cannot be nested".into()));
    }
    // dumps are not rewritten
    let again = execute(&cli.command)?;
    let identical = render(&again.result) == render(&doc.result) && again.verdict == doc.verdict;
    let out = json!({
        "document": path,
        "command": doc.command,
        "identical": identical,
        "recorded_exit_code": doc.exit_code,
        "replayed_exit_code": exit_code(again.verdict),
    });
    Ok(Outcome::new(&out)?.verdict(if identical { Verdict::Consistent } else { Verdict::Refuted }))
}

fn out_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--out" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--out=") {
            return Some(p.to_string());
        }
    }
    None
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let mut emitted = run(&argv);
    for (path, contents) in &emitted.dumps {
        if let Err(e) = fs::write(path, contents) {
            let err = CertError::InvalidSpec(format!("cannot write {path}: {e}"));
            emitted = failure(None, &argv, &err);
            break;
        }
    }
    match out_path(&argv) {
        Some(p) => {
            if let Err(e) = fs::write(&p, &emitted.text) {
                eprintln!("cannot write {p}: {e}");
                return ExitCode::from(3);
            }
        }
        None => print!("{}", emitted.text),
    }
    ExitCode::from(emitted.code as u8)
}
