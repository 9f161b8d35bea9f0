//! `invertor`: run and compare Monte Carlo inversion experiments.
//!
//! Exit codes: 0 on success, 1 on validation errors, 2 on particle-weight
//! degeneracy. Set `INVERTOR_LOG` (e.g. `info`, `debug`) for progress logs.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand, ValueEnum};

use invertor_cli::{
    compare_methods, histogram, make_dataset, parse_config, read_summary_scores, run_experiment,
    write_comparison_csv, write_histogram_csv, write_plot_script, SimulatorKind,
};

#[derive(Parser)]
#[command(
    name = "invertor",
    about = "Bayesian inversion of sequential simulators: MH, sequential MH, particle Gibbs, and hybrid engines",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimulatorArg {
    Lobe,
    Oracle,
}

impl From<SimulatorArg> for SimulatorKind {
    fn from(value: SimulatorArg) -> Self {
        match value {
            SimulatorArg::Lobe => SimulatorKind::Lobe,
            SimulatorArg::Oracle => SimulatorKind::Oracle,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// For oracle runs: assert pooled site marginals are within
        /// total-variation 0.05 of exact enumeration.
        #[arg(long)]
        check_oracle: bool,
    },
    /// Run several configs on one shared problem and rank the methods.
    Compare {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Also write the ranking table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an oracle config and check its marginals against enumeration.
    OracleCheck { config: PathBuf },
    /// Generate a synthetic dataset with held-out ground truth.
    MakeData {
        #[arg(long)]
        seed: u64,
        /// Number of simulation steps in the hidden forward run.
        #[arg(long)]
        lobes: usize,
        /// Number of wells (lobe simulator only).
        #[arg(long)]
        wells: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "lobe")]
        simulator: SimulatorArg,
        /// Where to write the ground truth (default: `<out>.truth.json`).
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Histogram final log-scores from summary.jsonl files.
    Hist {
        #[arg(required = true)]
        summaries: Vec<PathBuf>,
        #[arg(long)]
        bins: usize,
        /// Output directory for histogram.csv and plot_histogram.py.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn check_oracle_tv(tv: Option<f64>) -> Result<()> {
    match tv {
        Some(tv) => {
            println!("oracle check: max site TV distance to enumeration = {tv:.4}");
            if tv >= 0.05 {
                bail!("oracle check failed: TV {tv:.4} >= 0.05");
            }
            Ok(())
        }
        None => bail!("--check-oracle requires an oracle-simulator config"),
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            check_oracle,
        } => {
            let config = parse_config(&config)?;
            let output = run_experiment(&config)?;
            println!(
                "wrote {} runs to {}",
                output.outcomes.len(),
                config.output_dir.display()
            );
            if check_oracle {
                check_oracle_tv(output.oracle_marginal_tv)?;
            }
            Ok(())
        }
        Command::Compare { configs, out } => {
            let parsed = configs
                .iter()
                .map(|p| parse_config(p))
                .collect::<Result<Vec<_>>>()?;
            let report = compare_methods(&parsed)?;
            print!("{report}");
            if let Some(path) = out {
                write_comparison_csv(&report, &path)?;
            }
            Ok(())
        }
        Command::OracleCheck { config } => {
            let config = parse_config(&config)?;
            if config.simulator != SimulatorKind::Oracle {
                bail!("oracle-check requires an oracle-simulator config");
            }
            let output = run_experiment(&config)?;
            check_oracle_tv(output.oracle_marginal_tv)
        }
        Command::MakeData {
            seed,
            lobes,
            wells,
            out,
            simulator,
            truth,
        } => {
            let truth_path = truth.unwrap_or_else(|| {
                let mut p = out.clone().into_os_string();
                p.push(".truth.json");
                PathBuf::from(p)
            });
            let truth_value = make_dataset(simulator.into(), seed, lobes, wells, &out)?;
            std::fs::write(&truth_path, serde_json::to_string_pretty(&truth_value)?)?;
            println!("wrote {} and {}", out.display(), truth_path.display());
            Ok(())
        }
        Command::Hist {
            summaries,
            bins,
            out,
        } => {
            let scores = read_summary_scores(&summaries)?;
            let table = histogram(&scores, bins)?;
            std::fs::create_dir_all(&out)?;
            let csv_path = out.join("histogram.csv");
            write_histogram_csv(&table, &csv_path)?;
            write_plot_script(&out.join("plot_histogram.py"), "histogram.csv")?;
            println!(
                "wrote {} ({} scores, {} bins)",
                csv_path.display(),
                scores.len(),
                bins
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("INVERTOR_LOG", "warn"))
        .format_timestamp(None)
        .init();

    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let degenerate = err
                .chain()
                .any(|cause| matches!(cause.downcast_ref::<invertor_core::Error>(),
                    Some(e) if e.is_degeneracy()));
            if degenerate {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
