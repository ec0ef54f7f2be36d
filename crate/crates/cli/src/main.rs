use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qtn_cli::commands::{execute, fit_csv, plot_csvs, Command};
use qtn_cli::config::LoadedConfig;
use qtn_cli::error::CliError;

#[derive(Parser)]
#[command(name = "qtn", version, about = "Transport experiments in white-noise random potentials")]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default: the configured `out`, else `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Check the correlation hypotheses.
    Validate,
    /// Closed-form continuum MSD.
    AnalyticMsd,
    /// Closed-form lattice MSD law.
    LatticeLaw,
    /// Deterministic lattice hierarchy.
    EvolveLattice,
    /// Continuum Monte Carlo ensemble.
    McContinuum,
    /// Lattice Monte Carlo ensemble.
    McLattice,
    /// Classical stochastic-acceleration ensemble.
    Classical,
    /// Colored-noise convergence study.
    ColoredStudy,
    /// Runs several routes and reports their agreement.
    Compare,
    /// Runs the configured route.
    Run,
    /// Power-law fit of a `t,msd` CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        window: Vec<f64>,
    },
    /// Plot data for one or more `t,msd` CSVs.
    Plot {
        #[arg(long = "input", required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        window: Option<Vec<f64>>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(format!("--threads: {e}")))?;
    }
    let command = match cli.command {
        Sub::Fit { input, window } => {
            let fit = fit_csv(&input, (window[0], window[1]))?;
            let text = serde_json::to_string_pretty(&fit).expect("fit serializes");
            match cli.out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
                        path: dir.clone(),
                        source,
                    })?;
                    let path = dir.join("fit.json");
                    std::fs::write(&path, text + "\n").map_err(|source| CliError::Io { path, source })?;
                }
                None => println!("{text}"),
            }
            return Ok(());
        }
        Sub::Plot { inputs, window } => {
            let out = cli.out.unwrap_or_else(|| PathBuf::from("out"));
            plot_csvs(&inputs, window.map(|w| (w[0], w[1])), &out)?;
            println!("wrote {}", out.display());
            return Ok(());
        }
        Sub::Validate => Command::Validate,
        Sub::AnalyticMsd => Command::AnalyticMsd,
        Sub::LatticeLaw => Command::LatticeLaw,
        Sub::EvolveLattice => Command::EvolveLattice,
        Sub::McContinuum => Command::McContinuum,
        Sub::McLattice => Command::McLattice,
        Sub::Classical => Command::Classical,
        Sub::ColoredStudy => Command::ColoredStudy,
        Sub::Compare => Command::Compare,
        Sub::Run => Command::Run,
    };
    let path = cli.config.ok_or_else(|| CliError::usage(format!("{} needs --config", command.name())))?;
    let mut cfg = LoadedConfig::load(&path)?;
    if let Some(seed) = cli.seed {
        cfg.config.seed = seed;
    }
    let out = cli
        .out
        .or_else(|| cfg.config.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let (_, lines) = execute(command, &cfg, &out)?;
    for l in lines {
        println!("{l}");
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
