use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::Value;
use toral::io::{
    job_from_value, run, to_canonical_json, Command, Diagnostic, JobSpec, EXIT_INVALID,
};
use toral::Error;

/// Exact dynamics of toral automorphisms on subtori.
///
/// Reads a JSON job (or a previously written report, for `verify`) and
/// writes a JSON report. Exit status: 0 success, 2 invalid input,
/// 3 inconclusive within budget, 4 verification failure.
#[derive(Parser, Debug)]
#[command(name = "toral", version)]
struct Cli {
    /// Command to run; overrides the `command` field of the job.
    #[arg(value_parser = parse_command)]
    command: Option<Command>,

    /// Job file, or `-` for standard input.
    #[arg(long, short, default_value = "-")]
    input: String,

    /// Report destination, or `-` for standard output.
    #[arg(long, short)]
    output: Option<String>,

    /// Largest candidate covector norm.
    #[arg(long)]
    budget_norm: Option<u64>,

    /// Largest orbit window radius.
    #[arg(long)]
    budget_window: Option<u64>,

    /// Number of family members to certify.
    #[arg(long)]
    count: Option<usize>,

    /// Metric resolution.
    #[arg(long)]
    resolution: Option<f64>,

    /// Recorded in the report; results never depend on it.
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_command(s: &str) -> Result<Command, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn read_input(path: &str) -> Result<String, Error> {
    let mut text = String::new();
    let res = if path == "-" {
        io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        fs::read_to_string(PathBuf::from(path)).map(|t| text = t)
    };
    res.map_err(|e| Error::InvalidParameter(format!("cannot read {path}: {e}")))?;
    Ok(text)
}

fn build_job(cli: &Cli, text: &str) -> Result<JobSpec, Error> {
    let mut v: Value =
        serde_json::from_str(text).map_err(|e| Error::MalformedJson(e.to_string()))?;
    let is_report = v.get("payload").is_some();
    if is_report {
        if !matches!(cli.command, None | Some(Command::Verify)) {
            return Err(Error::InvalidParameter(
                "a report can only be passed to `verify`".into(),
            ));
        }
        v = serde_json::json!({ "command": "verify", "certificate": v });
    }
    let obj = v
        .as_object_mut()
        .ok_or_else(|| Error::MalformedJson("job must be a JSON object".into()))?;
    if let Some(c) = cli.command {
        obj.insert("command".into(), Value::String(c.name().into()));
    }
    let overrides = [
        ("budget_norm", cli.budget_norm.map(Value::from)),
        ("budget_window", cli.budget_window.map(Value::from)),
        ("count", cli.count.map(Value::from)),
        ("resolution", cli.resolution.map(Value::from)),
        ("seed", cli.seed.map(Value::from)),
    ];
    for (k, val) in overrides {
        if let Some(val) = val {
            obj.insert(k.into(), val);
        }
    }
    job_from_value(v)
}

fn write_output(dest: Option<&str>, body: &str) -> io::Result<()> {
    match dest {
        None | Some("-") => io::stdout().write_all(body.as_bytes()),
        Some(path) => fs::write(path, body),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = read_input(&cli.input)
        .and_then(|text| build_job(&cli, &text))
        .and_then(|job| run(&job).map(|env| (job, env)));
    match outcome {
        Ok((job, env)) => {
            let dest = cli.output.as_deref().or(job.output.as_deref());
            if let Err(e) = write_output(dest, &to_canonical_json(&env)) {
                eprintln!("toral: cannot write report: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(env.exit_code() as u8)
        }
        Err(e) => {
            eprint!("{}", to_canonical_json(&Diagnostic::from(&e)));
            ExitCode::from(EXIT_INVALID as u8)
        }
    }
}
