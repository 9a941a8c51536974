use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rossbylab_cli::{load_config, run_experiment, RunConfig, Subcommand};

/// Experiments on the low Rossby / low Mach limit of rotating compressible
/// fluids. Exit codes: 0 all criteria pass, 1 hard error, 2 a criterion fails.
#[derive(Debug, Parser)]
#[command(name = "rossbylab", version)]
struct Cli {
    /// Experiment to run; overrides the `subcommand` key of the config file.
    #[arg(value_enum)]
    subcommand: Option<Subcommand>,
    /// TOML configuration with sections [grid], [regime], [experiment], [output].
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output directory; overrides `[output] dir`.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Print the normalised configuration and exit.
    #[arg(long)]
    print_config: bool,
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("ROSSBYLAB_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| format!("ROSSBYLAB_THREADS must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err("ROSSBYLAB_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn resolve(cli: &Cli) -> Result<RunConfig, String> {
    let mut cfg = match (&cli.config, cli.subcommand) {
        (Some(path), sub) => {
            let mut cfg = load_config(path).map_err(|e| format!("{}: {e}", path.display()))?;
            if let Some(sub) = sub.filter(|s| *s != cfg.subcommand) {
                let mut fresh = RunConfig::defaults(sub);
                fresh.grid = cfg.grid;
                fresh.regime = cfg.regime;
                fresh.experiment = cfg.experiment;
                cfg = fresh;
            }
            cfg
        }
        (None, Some(sub)) => RunConfig::defaults(sub),
        (None, None) => return Err("give a subcommand or --config".into()),
    };
    if let Some(dir) = &cli.output {
        cfg.output.dir = dir.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match init_threads().and_then(|_| resolve(&cli)) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if cli.print_config {
        print!("{}", cfg.to_toml());
        return ExitCode::SUCCESS;
    }
    match run_experiment(&cfg) {
        Ok(summary) => {
            for (name, c) in &summary.criteria {
                println!("{} {name}: {}", if c.passed { "PASS" } else { "FAIL" }, c.detail);
            }
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            println!("summary written to {}", cfg.output.dir.join("summary.json").display());
            if summary.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
