use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

mod commands;
mod expr;
mod output;

use commands::*;
use output::Format;

#[derive(Parser, Debug)]
#[command(
    name = "theta",
    version,
    about = "Experiments on theta-expansions and sparse digit insertion"
)]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Write to a file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads (defaults to all cores); never changes the output.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Fractional digits for decimal renderings of field elements.
    #[arg(long, default_value_t = 20, global = true)]
    precision: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Digits of a field element.
    Expand(ExpandArgs),
    /// Running digit statistics along an orbit.
    Orbit(OrbitArgs),
    /// Synthesize a constructed word and its ratio series with envelopes.
    Construct(ConstructArgs),
    /// Ratio series of an arbitrary word.
    Ratio(RatioArgs),
    /// Scan the sparse-sequence conditions for N0.
    Conditions(ConditionsArgs),
    /// Exact growth, length and sensitivity bounds on random words.
    VerifyMetric(VerifyMetricArgs),
    /// Monotonicity of inserted digits.
    VerifyMonotone(VerifyMonotoneArgs),
    /// Hölder witness bounds, empirical exponents and the deletion round trip.
    VerifyHolder(VerifyHolderArgs),
    /// Moran brackets for bounded-digit sets.
    Dimension(DimensionArgs),
    /// Jarník-type dimension bounds.
    Jarnik(JarnikArgs),
    /// Gauss measure, digit law and invariance.
    Measure(MeasureArgs),
    /// Samples from the Gauss measure and first-digit frequencies.
    Sample(SampleArgs),
}

/// Everything that determines the output; thread count and destination are
/// deliberately left out.
#[derive(Serialize)]
struct RunConfig<'a> {
    tool: &'static str,
    version: &'static str,
    format: Format,
    precision: usize,
    #[serde(flatten)]
    command: &'a Command,
}

fn dispatch(cmd: &Command, ctx: &Ctx) -> theta_core::Result<output::Report> {
    match cmd {
        Command::Expand(a) => expand(a, ctx),
        Command::Orbit(a) => orbit(a, ctx),
        Command::Construct(a) => construct(a, ctx),
        Command::Ratio(a) => ratio(a, ctx),
        Command::Conditions(a) => conditions(a, ctx),
        Command::VerifyMetric(a) => verify_metric(a, ctx),
        Command::VerifyMonotone(a) => verify_monotone(a, ctx),
        Command::VerifyHolder(a) => verify_holder(a, ctx),
        Command::Dimension(a) => dimension(a, ctx),
        Command::Jarnik(a) => jarnik(a, ctx),
        Command::Measure(a) => measure(a, ctx),
        Command::Sample(a) => sample(a, ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let ctx = Ctx {
        precision: cli.precision,
    };
    let report = match pool.install(|| dispatch(&cli.command, &ctx)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let config = serde_json::to_value(RunConfig {
        tool: "theta",
        version: env!("CARGO_PKG_VERSION"),
        format: cli.format,
        precision: cli.precision,
        command: &cli.command,
    })
    .expect("serializable config");
    let written = match &cli.output {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            report.write(&config, cli.format, &mut w)?;
            w.flush()
        }),
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            report
                .write(&config, cli.format, &mut w)
                .and_then(|_| w.flush())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    for c in report.checks.iter().filter(|c| !c.ok) {
        eprintln!("check failed: {}", c.name);
    }
    if report.all_ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
