use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use poslab::config::{Format, Group, SuiteConfig};
use poslab::runner::{self, EXIT_ERROR};

#[derive(Parser)]
#[command(
    name = "poslab",
    version,
    about = "Numerical checks for positivity of differences of Kahler classes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON suite config; the shipped default is used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Run independent suites concurrently.
    #[arg(long, global = true)]
    parallel: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Pointwise and combinatorial inequalities.
    Verify,
    /// Psef and nef thresholds and intersection profiles in the class models.
    Thresholds,
    /// Volume lower bounds, the chain and the g/f analysis.
    Bounds,
    /// Monge-Ampere solves and the integrated inequalities.
    Ma,
    /// Every suite in the config.
    All,
}

#[derive(ValueEnum, Clone, Copy)]
enum FormatArg {
    Json,
    Csv,
    Both,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
            FormatArg::Both => Format::Both,
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("POSLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .map_err(|_| format!("POSLAB_THREADS={value} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| format!("cannot size the thread pool: {e}"))
}

fn run(cli: Cli) -> Result<i32, String> {
    configure_threads()?;
    let mut config = match &cli.config {
        Some(path) => SuiteConfig::load(path).map_err(|e| e.to_string())?,
        None => SuiteConfig::default_config(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = cli.out {
        config.output.dir = out;
    }
    if let Some(f) = cli.format {
        config.output.format = f.into();
    }
    let group = match cli.command {
        Command::Verify => Some(Group::Verify),
        Command::Thresholds => Some(Group::Thresholds),
        Command::Bounds => Some(Group::Bounds),
        Command::Ma => Some(Group::Ma),
        Command::All => None,
    };
    if let Some(g) = group {
        config = config.restricted(g);
    }
    let outcome = runner::run(&config, cli.parallel).map_err(|e| e.to_string())?;
    for r in outcome.reports() {
        let verdict = if r.passed() { "ok" } else { "FAIL" };
        println!(
            "{verdict:4} {:<48} margin {:>11.3e}  tol {:.0e}  {:?}",
            r.inequality_id, r.worst_margin, r.tolerance, r.status
        );
    }
    let format = config.output.format;
    let written =
        runner::write_outputs(&outcome, &config.output.dir, format.json(), format.csv()).map_err(|e| e.to_string())?;
    for path in written {
        eprintln!("wrote {}", path.display());
    }
    let violations = outcome.violations();
    if !violations.is_empty() {
        eprintln!("{} violation(s):", violations.len());
        for r in violations {
            eprintln!(
                "  {} margin {:e} at {:?}",
                r.inequality_id, r.worst_margin, r.worst_input
            );
        }
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
