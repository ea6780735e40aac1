use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use frackpz::config::{parse_config, LoadedConfig, RunConfig};
use frackpz::run::{cmd_info, cmd_solve, cmd_sweep, cmd_verify, CliError, VerifyTarget, EXIT_CONFIG};

#[derive(Parser)]
#[command(
    name = "frackpz",
    version,
    about = "Solvers and diagnostics for (-Δ)^s u = |∇u|^q + λf"
)]
struct Cli {
    /// Run configuration (dotted `key = value` lines or JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, global = true, env = "FRACKPZ_OUT")]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for sampled diagnostics; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Grid size; overrides `grid_n` from the config.
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve at the configured λ.
    Solve,
    /// Run a diagnostic.
    Verify {
        #[arg(value_enum)]
        target: VerifyTarget,
    },
    /// Solve over a λ grid and locate the existence threshold.
    Sweep,
    /// Print exponents, regime and routing.
    Info,
}

fn load(cli: &Cli) -> Result<LoadedConfig, CliError> {
    let mut loaded = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => RunConfig::default().loaded(),
    };
    if let Some(seed) = cli.seed {
        loaded.config.seed = seed;
    }
    if let Some(n) = cli.grid {
        loaded.config.grid_n = n;
    }
    Ok(loaded)
}

fn run(cli: Cli) -> Result<i32, CliError> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let loaded = load(&cli)?;
    let out = cli
        .out
        .clone()
        .or_else(|| loaded.config.output_dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    match cli.command {
        Command::Solve => cmd_solve(&loaded, &out),
        Command::Verify { target } => cmd_verify(&loaded, target, &out),
        Command::Sweep => cmd_sweep(&loaded, &out),
        Command::Info => {
            let info = cmd_info(&loaded)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&info).map_err(|e| CliError::Io(e.to_string()))?
            );
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
