use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cmap_cli::eval::{evaluate, PointSpec, Route};
use cmap_cli::{suite, Config, EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE};

#[derive(Parser)]
#[command(
    name = "cmap",
    version,
    about = "Checks and evaluates c-map quaternion-Kähler metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
enum Format {
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full check suite and write a JSON report.
    Check {
        #[arg(long)]
        config: PathBuf,
        /// Report path; the report goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print metric matrices at one point.
    Eval {
        #[arg(long)]
        config: PathBuf,
        /// Point as inline JSON or a path to a JSON file.
        #[arg(long)]
        point: String,
        #[arg(long, value_enum, default_value = "fs")]
        route: Route,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

fn parse_point(arg: &str) -> anyhow::Result<PointSpec> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| anyhow::anyhow!("cannot read point file {arg}: {e}"))?
    };
    serde_json::from_str(&text).map_err(|e| anyhow::anyhow!("invalid point: {e}"))
}

fn check(config: PathBuf, out: Option<PathBuf>) -> ExitCode {
    let cfg = match Config::load(&config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return code(EXIT_USAGE);
        }
    };
    let report = match suite::run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return code(EXIT_USAGE);
        }
    };
    let text = to_json(&report);
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return code(EXIT_USAGE);
            }
        }
        None => print!("{text}"),
    }
    for c in &report.checks {
        eprintln!("{:<30} {:?}", c.name, c.status);
    }
    if report.passed() {
        code(EXIT_OK)
    } else {
        eprintln!("failed: {}", report.summary.first_failure.unwrap_or("unknown"));
        code(EXIT_CHECK_FAILED)
    }
}

fn eval(config: PathBuf, point: String, route: Route) -> ExitCode {
    let parsed = Config::load(&config).and_then(|cfg| Ok((cfg, parse_point(&point)?)));
    let (cfg, spec) = match parsed {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return code(EXIT_USAGE);
        }
    };
    match evaluate(&cfg, &spec, route) {
        Err(e) => {
            eprintln!("error: {e}");
            code(EXIT_USAGE)
        }
        Ok(Ok(out)) => {
            print!("{}", to_json(&out));
            code(EXIT_OK)
        }
        Ok(Err(failure)) => {
            print!("{}", to_json(&failure));
            match &failure.verdict {
                Some(v) => eprintln!("outside domain: {v}"),
                None => eprintln!("error: {}", failure.message),
            }
            code(EXIT_CHECK_FAILED)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Check { config, out } => check(config, out),
        Command::Eval {
            config,
            point,
            route,
            format: Format::Json,
        } => eval(config, point, route),
    }
}
