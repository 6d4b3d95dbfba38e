//! `cavmirror`: runs cavity–mirror scenarios and writes their CSV outputs.

mod output;
mod presets;
mod run;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::scenario::{Plan, ScenarioError};

/// Environment variable fixing the worker thread count.
const THREADS_ENV: &str = "CAVMIRROR_THREADS";

#[derive(Parser)]
#[command(name = "cavmirror", version, about = "Cavity field and movable mirror: scenario runner and CSV exporter")]
struct Cli {
    /// Reserved for stochastic paths; currently nothing is random.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run {
        file: PathBuf,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a scenario file without computing anything.
    Validate { file: PathBuf },
    /// Run a built-in preset.
    Preset {
        name: String,
        /// Output directory (overrides the preset's `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the preset's scenario file instead of running it.
        #[arg(long)]
        print: bool,
    },
    /// List the built-in presets.
    ListPresets,
}

enum Failure {
    /// Bad scenario or usage: exit status 2.
    Invalid(String),
    /// The computation failed: exit status 1.
    Run(String),
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Invalid(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Run(format!("thread pool: {e}")))
}

fn read(file: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(file).map_err(|e| Failure::Invalid(format!("{}: {e}", file.display())))
}

fn plan_from(source: &str, text: &str) -> Result<Plan, Failure> {
    scenario::load(text).map_err(|e| match e {
        ScenarioError::Parse(msg) => Failure::Invalid(format!("{source}: {}", msg.trim_end())),
        ScenarioError::Invalid(errors) => {
            let lines: Vec<String> = errors.iter().map(|e| format!("{source}: {e}")).collect();
            Failure::Invalid(lines.join("\n"))
        }
    })
}

fn mib(bytes: u64) -> String {
    format!("{:.1} MiB", bytes as f64 / (1024.0 * 1024.0))
}

fn validate(source: &str, text: &str) -> Result<(), Failure> {
    let plan = plan_from(source, text)?;
    for w in &plan.warnings {
        println!("warning: {w}");
    }
    let (dims, bytes) = plan.footprint();
    let jobs = plan.cases.len().max(1);
    println!(
        "ok: {} (mode {}): {jobs} case(s) × {} time(s); dims {dims}; predicted peak memory {} per case",
        plan.name,
        plan.mode.as_str(),
        plan.times.len(),
        mib(bytes)
    );
    Ok(())
}

fn execute(source: &str, text: &str, out: Option<PathBuf>) -> Result<(), Failure> {
    let plan = plan_from(source, text)?;
    for w in &plan.warnings {
        println!("warning: {w}");
    }
    let dir = out.unwrap_or_else(|| PathBuf::from(&plan.outputs.dir));
    let start = Instant::now();
    let reports = run::execute(&plan).map_err(|e| Failure::Run(format!("{source}: {e}")))?;
    let mut written = 0usize;
    println!("scenario {} (mode {})", plan.name, plan.mode.as_str());
    if let Some(d) = &plan.description {
        println!("  {d}");
    }
    for note in run::global_notes(&plan).map_err(|e| Failure::Run(e.to_string()))? {
        println!("  {note}");
    }
    for report in &reports {
        let label = if report.label.is_empty() { "case" } else { &report.label };
        println!("  [{label}] max truncation loss {:.3e} (renormalized), {:.3} s", report.loss, report.elapsed.as_secs_f64());
        for note in &report.notes {
            println!("    {note}");
        }
        for a in &report.artifacts {
            output::write_atomic(&dir, &a.file, &a.contents)
                .map_err(|e| Failure::Run(format!("writing {}: {e}", dir.join(&a.file).display())))?;
            written += 1;
        }
    }
    println!("wrote {written} file(s) to {} in {:.3} s", dir.display(), start.elapsed().as_secs_f64());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    // `--seed` is accepted for forward compatibility; no code path is random.
    let _ = cli.seed;
    match cli.command {
        Command::Run { file, out } => execute(&file.display().to_string(), &read(&file)?, out),
        Command::Validate { file } => validate(&file.display().to_string(), &read(&file)?),
        Command::Preset { name, out, print } => {
            let text = presets::find(&name).ok_or_else(|| {
                Failure::Invalid(format!("unknown preset {name:?}; see `cavmirror list-presets`"))
            })?;
            if print {
                print!("{text}");
                Ok(())
            } else {
                execute(&format!("preset {name}"), text, out)
            }
        }
        Command::ListPresets => {
            for (name, text) in presets::PRESETS {
                println!("{name:<6} {}", presets::description(text));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            for line in msg.lines() {
                eprintln!("error: {line}");
            }
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
