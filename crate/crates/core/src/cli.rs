//! Command-line front end.
//!
//! Exit codes: `0` success (a `diverge` verdict is a result, not an error),
//! `2` input problems (parse or validation errors, unknown files, labels,
//! builtins, bad flag values), `3` engine errors (enumeration overflow,
//! empty admissible sets, zero-support restrictions).

use std::io::Read;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::enumerate::ParameterGrid;
use crate::error::Error;
use crate::report::{
    audit_report_text, audit_scenario, comparison_text, compare_scenario, run_report_csv,
    run_report_text, run_scenario, to_json, AuditReport, ComparisonReport,
};
use crate::scenario::{parse_scenario, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_ENGINE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "evistate",
    version,
    about = "Evidential-state calculus: operator pipelines over binary causal models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every pipeline of a scenario and report all metrics.
    Run {
        /// Scenario file, `builtin:<name>`, or `-` for stdin.
        input: String,
        #[command(flatten)]
        engine: EngineFlags,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// Compare two pipeline orders from the same initial state.
    Compare {
        input: String,
        /// Label of the first pipeline.
        a: String,
        /// Label of the second pipeline.
        b: String,
        #[command(flatten)]
        engine: EngineFlags,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// Audit the causal-breadth constraint for every pipeline.
    Audit {
        input: String,
        #[command(flatten)]
        engine: EngineFlags,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// Print a builtin scenario to stdout.
    Builtin {
        /// One of: fig1, s2, trial, independent.
        name: String,
    },
}

/// Engine overrides; flag values take precedence over scenario `settings`.
#[derive(Debug, Args)]
struct EngineFlags {
    /// Replace the scenario grid with {0, step, 2*step, .., 1}.
    #[arg(long)]
    grid_step: Option<f64>,
    /// Law-matching total-variation tolerance.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Identifiability threshold on identified-set width.
    #[arg(long)]
    eps_id: Option<f64>,
    /// Effect-histogram bin count over [-1, 1].
    #[arg(long)]
    bins: Option<usize>,
    /// Observed-law fingerprint quantum.
    #[arg(long)]
    quantum: Option<f64>,
    /// Enumeration cap.
    #[arg(long)]
    cap: Option<u64>,
    /// Worker thread cap.
    #[arg(long)]
    parallel: Option<usize>,
}

#[derive(Debug, Args)]
struct OutputFlags {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

/// Entry point used by the binary: parses `std::env::args`.
pub fn run() -> i32 {
    main_with_args(std::env::args())
}

/// Testable entry point.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INPUT,
            };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Run { input, engine, output } => command_run(&input, &engine, &output),
        Command::Compare { input, a, b, engine, output } => {
            command_compare(&input, &a, &b, &engine, &output)
        }
        Command::Audit { input, engine, output } => command_audit(&input, &engine, &output),
        Command::Builtin { name } => command_builtin(&name),
    }
}

fn load_text(input: &str) -> Result<String, String> {
    if let Some(name) = input.strip_prefix("builtin:") {
        return crate::builtin::text(name)
            .map(str::to_string)
            .ok_or_else(|| format!("unknown builtin `{name}`"));
    }
    if input == "-" {
        let mut buf = String::new();
        return std::io::stdin()
            .read_to_string(&mut buf)
            .map(|_| buf)
            .map_err(|e| format!("cannot read stdin: {e}"));
    }
    std::fs::read_to_string(input).map_err(|e| format!("cannot read `{input}`: {e}"))
}

fn load_scenario(input: &str, engine: &EngineFlags) -> Result<Scenario, String> {
    let text = load_text(input)?;
    let mut scenario = parse_scenario(&text).map_err(|e| e.to_string())?;
    if let Some(step) = engine.grid_step {
        scenario.grid = ParameterGrid::from_step(step).map_err(|e| e.to_string())?;
    }
    if let Some(v) = engine.epsilon {
        if v.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(format!("--epsilon {v} must be positive"));
        }
        scenario.settings.epsilon = v;
    }
    if let Some(v) = engine.eps_id {
        if v.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(format!("--eps-id {v} must be positive"));
        }
        scenario.settings.eps_id = v;
    }
    if let Some(v) = engine.bins {
        if v == 0 {
            return Err("--bins must be positive".into());
        }
        scenario.settings.bins = v;
    }
    if let Some(v) = engine.quantum {
        if v.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(format!("--quantum {v} must be positive"));
        }
        scenario.settings.quantum = v;
    }
    if let Some(v) = engine.cap {
        if v == 0 {
            return Err("--cap must be positive".into());
        }
        scenario.settings.cap = v;
    }
    Ok(scenario)
}

fn with_pool<T: Send>(
    parallel: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, String> {
    match parallel {
        None => Ok(f()),
        Some(0) => Err("--parallel must be positive".into()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| format!("cannot build thread pool: {e}"))?;
            Ok(pool.install(f))
        }
    }
}

fn emit(rendered: String, output: &OutputFlags) -> i32 {
    match &output.out {
        None => {
            print!("{rendered}");
            EXIT_OK
        }
        Some(path) => match std::fs::write(path, rendered) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                eprintln!("error: cannot write `{}`: {e}", path.display());
                EXIT_INPUT
            }
        },
    }
}

fn input_error(message: String) -> i32 {
    eprintln!("error: {message}");
    EXIT_INPUT
}

fn engine_error(e: Error) -> i32 {
    eprintln!("engine error: {e}");
    EXIT_ENGINE
}

fn command_run(input: &str, engine: &EngineFlags, output: &OutputFlags) -> i32 {
    let scenario = match load_scenario(input, engine) {
        Ok(s) => s,
        Err(m) => return input_error(m),
    };
    let report = match with_pool(engine.parallel, || run_scenario(&scenario)) {
        Ok(Ok(r)) => r,
        Ok(Err(e)) => return engine_error(e),
        Err(m) => return input_error(m),
    };
    let rendered = match output.format {
        Format::Json => to_json(&report),
        Format::Csv => run_report_csv(&report),
        Format::Text => run_report_text(&report),
    };
    emit(rendered, output)
}

fn command_compare(input: &str, a: &str, b: &str, engine: &EngineFlags, output: &OutputFlags) -> i32 {
    let scenario = match load_scenario(input, engine) {
        Ok(s) => s,
        Err(m) => return input_error(m),
    };
    for label in [a, b] {
        if scenario.pipeline(label).is_none() {
            return input_error(format!("unknown pipeline label `{label}`"));
        }
    }
    let report = match with_pool(engine.parallel, || compare_scenario(&scenario, a, b)) {
        Ok(Ok(r)) => r,
        Ok(Err(e)) => return engine_error(e),
        Err(m) => return input_error(m),
    };
    let rendered = match output.format {
        Format::Json => to_json(&report),
        Format::Csv => comparison_csv(&report),
        Format::Text => comparison_text(&report),
    };
    emit(rendered, output)
}

fn command_audit(input: &str, engine: &EngineFlags, output: &OutputFlags) -> i32 {
    let scenario = match load_scenario(input, engine) {
        Ok(s) => s,
        Err(m) => return input_error(m),
    };
    let report = match with_pool(engine.parallel, || audit_scenario(&scenario)) {
        Ok(Ok(r)) => r,
        Ok(Err(e)) => return engine_error(e),
        Err(m) => return input_error(m),
    };
    let rendered = match output.format {
        Format::Json => to_json(&report),
        Format::Csv => audit_csv(&report),
        Format::Text => audit_report_text(&report),
    };
    emit(rendered, output)
}

fn command_builtin(name: &str) -> i32 {
    match crate::builtin::text(name) {
        Some(text) => {
            print!("{text}");
            EXIT_OK
        }
        None => input_error(format!(
            "unknown builtin `{name}` (available: {})",
            crate::builtin::NAMES.join(", ")
        )),
    }
}

fn comparison_csv(c: &ComparisonReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["pair", "metric", "value"]).unwrap();
    let pair = format!("{}|{}", c.a, c.b);
    let mut row = |metric: &str, value: String| {
        w.write_record([pair.as_str(), metric, value.as_str()]).unwrap();
    };
    row("verdict", c.verdict.to_string());
    row("table_tv", c.table_tv.map(|v| v.to_string()).unwrap_or_default());
    row("set_jaccard", c.set_jaccard.to_string());
    row("members_equal", c.members_equal.to_string());
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

fn audit_csv(r: &AuditReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scenario", "pipeline", "metric", "value"]).unwrap();
    let scenario = r.scenario.as_str();
    let mut row = |pipeline: &str, metric: &str, value: String| {
        w.write_record([scenario, pipeline, metric, value.as_str()]).unwrap();
    };
    row("", "k", r.k.to_string());
    for c in &r.pipelines {
        let l = c.pipeline.as_str();
        row(l, "delta_cause", c.delta_cause.to_string());
        row(l, "delta_breadth", c.delta_breadth.map(|v| v.to_string()).unwrap_or_default());
        row(l, "product", c.product.map(|v| v.to_string()).unwrap_or_default());
        row(l, "satisfied", c.satisfied.map(|s| s.to_string()).unwrap_or_else(|| "na".into()));
        for s in &c.steps {
            row(l, &format!("step{}_h_state", s.step), s.h_state.to_string());
            row(
                l,
                &format!("step{}_kl_bits", s.step),
                s.kl_bits.map(|v| v.to_string()).unwrap_or_default(),
            );
        }
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}
