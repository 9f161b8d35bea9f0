//! Experiment execution: seeded multi-run orchestration, diagnostics, and
//! plot-ready output files.
//!
//! Outputs are deterministic: chain `k` always uses `base_seed + k`, results
//! are keyed by run index regardless of worker scheduling, and nothing
//! time-dependent is written to disk (wall-clock timings go to the log).

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use invertor_core::stats::MarginalAccumulator;
use invertor_core::{
    enumerate_posterior, run_method, run_method_with, ChainResult, DiscreteOracle, EngineOptions,
    LobeConfig, LobeSimulator, MhOptions, OracleData, Simulator, WellLogSet,
};

use crate::config::{ExperimentConfig, SimulatorKind};

/// Per-run record serialized to `summary.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: usize,
    pub seed: u64,
    pub method: String,
    pub final_log_score: f64,
    pub iterations: usize,
    pub acceptance_count: u64,
    pub acceptance_rate: f64,
    pub simulator_calls: u64,
}

/// Everything one run produced. Wall-clock stays in memory and in the log;
/// output files must be byte-identical across re-runs.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub trajectory: Vec<f64>,
    pub wall_seconds: f64,
}

/// The result of a whole experiment.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub outcomes: Vec<RunOutcome>,
    /// Largest per-site total-variation distance between pooled chain
    /// marginals and exact enumeration; oracle runs only.
    pub oracle_marginal_tv: Option<f64>,
}

impl ExperimentOutput {
    pub fn final_scores(&self) -> Vec<f64> {
        self.outcomes
            .iter()
            .map(|o| o.summary.final_log_score)
            .collect()
    }
}

/// Build the lobe simulator an experiment config describes, taking well
/// locations from the data.
pub fn build_lobe_simulator(
    config: &ExperimentConfig,
    data: &WellLogSet,
) -> Result<LobeSimulator> {
    let lobe_config = LobeConfig {
        grid_cells: config.grid_cells,
        sample_spacing_m: config.sample_spacing_m,
        compensation: 0.5,
        horizon: config.horizon,
        wells: data.wells.iter().map(|w| w.x).collect(),
        terminal_surface_penalty: config.terminal_penalty,
        length_normalized_distance: false,
        segment_norm: config.segment_norm,
        porosity_span: config.porosity_span,
        lamination_wavelength_m: config.lamination_wavelength_m,
    };
    Ok(LobeSimulator::new(lobe_config)?)
}

pub fn build_oracle_simulator(config: &ExperimentConfig) -> Result<DiscreteOracle> {
    Ok(DiscreteOracle::new(
        vec![0.125, 0.375, 0.625, 0.875],
        config.horizon,
        0.0,
    )?)
}

fn engine_options(config: &ExperimentConfig) -> EngineOptions {
    EngineOptions {
        mh: MhOptions {
            site_mode: config.site_mode,
        },
        csmc: invertor_core::CsmcOptions {
            resampling: config.resampling,
        },
    }
}

fn summarize<S, E>(config: &ExperimentConfig, run: usize, result: &ChainResult<S, E>) -> RunSummary {
    RunSummary {
        run,
        seed: result.seed,
        method: config.method.kind_name().to_string(),
        final_log_score: result.final_logscore(),
        iterations: result.iterations(),
        acceptance_count: result.acceptance_count,
        acceptance_rate: result.acceptance_rate(),
        simulator_calls: result.simulator_calls(),
    }
}

fn worker_pool(config: &ExperimentConfig) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallel_chains)
        .build()
        .context("cannot build worker pool")
}

/// Run every chain of a lobe experiment.
fn run_lobe_chains(
    config: &ExperimentConfig,
    sim: &LobeSimulator,
    data: &WellLogSet,
) -> Result<Vec<RunOutcome>> {
    let kernel = config.kernel();
    let options = engine_options(config);
    let pool = worker_pool(config)?;
    pool.install(|| {
        (0..config.runs)
            .into_par_iter()
            .map(|run| {
                let seed = config.base_seed + run as u64;
                let start = Instant::now();
                let result = run_method(sim, data, &kernel, &config.method, seed, &options)?;
                Ok(RunOutcome {
                    summary: summarize(config, run, &result),
                    trajectory: result.logscore_trajectory,
                    wall_seconds: start.elapsed().as_secs_f64(),
                })
            })
            .collect::<Result<Vec<_>>>()
    })
}

/// Run every chain of an oracle experiment, pooling full-posterior site
/// marginals for the enumeration check.
fn run_oracle_chains(
    config: &ExperimentConfig,
    sim: &DiscreteOracle,
    data: &OracleData,
) -> Result<(Vec<RunOutcome>, MarginalAccumulator)> {
    let kernel = config.kernel();
    let options = engine_options(config);
    let horizon = sim.horizon();
    let grid_len = sim.grid().len();
    let pool = worker_pool(config)?;
    let per_run = pool.install(|| {
        (0..config.runs)
            .into_par_iter()
            .map(|run| {
                let seed = config.base_seed + run as u64;
                let start = Instant::now();
                let mut acc = MarginalAccumulator::new(horizon, grid_len);
                let result = run_method_with(
                    sim,
                    data,
                    &kernel,
                    &config.method,
                    seed,
                    &options,
                    |info| {
                        if info.incorporated_steps == horizon {
                            if let Ok(tuple) = sim.trace_tuple(info.trace) {
                                acc.observe(&tuple);
                            }
                        }
                    },
                )?;
                let outcome = RunOutcome {
                    summary: summarize(config, run, &result),
                    trajectory: result.logscore_trajectory,
                    wall_seconds: start.elapsed().as_secs_f64(),
                };
                Ok((outcome, acc))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut pooled = MarginalAccumulator::new(horizon, grid_len);
    let mut outcomes = Vec::with_capacity(per_run.len());
    for (outcome, acc) in per_run {
        pooled.merge(&acc);
        outcomes.push(outcome);
    }
    Ok((outcomes, pooled))
}

/// Execute a config: run all chains, write trajectory CSVs, the final-score
/// CSV, and the summary JSON Lines file into `output_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let started = Instant::now();

    let (outcomes, oracle_tv) = match config.simulator {
        SimulatorKind::Lobe => {
            let data = WellLogSet::read_csv(&config.data_path)?;
            let sim = build_lobe_simulator(config, &data)?;
            (run_lobe_chains(config, &sim, &data)?, None)
        }
        SimulatorKind::Oracle => {
            let data = OracleData::read_csv(&config.data_path)?;
            let sim = build_oracle_simulator(config)?;
            let (outcomes, pooled) = run_oracle_chains(config, &sim, &data)?;
            let table = enumerate_posterior(&sim, &data, &config.kernel())?;
            let tv = pooled.max_tv(&table.site_marginals())?;
            (outcomes, Some(tv))
        }
    };

    write_outputs(config, &outcomes)?;

    let total_calls: u64 = outcomes.iter().map(|o| o.summary.simulator_calls).sum();
    log::info!(
        "{}: {} runs of {} in {:.2}s ({} simulator calls)",
        config.output_dir.display(),
        config.runs,
        config.method.kind_name(),
        started.elapsed().as_secs_f64(),
        total_calls
    );
    for o in &outcomes {
        log::debug!(
            "run {:03} seed {} final {:.4} wall {:.3}s",
            o.summary.run,
            o.summary.seed,
            o.summary.final_log_score,
            o.wall_seconds
        );
    }

    Ok(ExperimentOutput {
        outcomes,
        oracle_marginal_tv: oracle_tv,
    })
}

fn write_outputs(config: &ExperimentConfig, outcomes: &[RunOutcome]) -> Result<()> {
    let dir = &config.output_dir;
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output dir {}", dir.display()))?;

    for outcome in outcomes {
        let path = dir.join(format!("trajectory_run{:03}.csv", outcome.summary.run));
        let mut writer = csv::Writer::from_path(&path)?;
        writer.write_record(["iteration", "log_score"])?;
        for (i, score) in outcome.trajectory.iter().enumerate() {
            writer.write_record([(i + 1).to_string(), score.to_string()])?;
        }
        writer.flush()?;
    }

    let mut writer = csv::Writer::from_path(dir.join("final_scores.csv"))?;
    writer.write_record(["run", "seed", "final_log_score"])?;
    for outcome in outcomes {
        writer.write_record([
            outcome.summary.run.to_string(),
            outcome.summary.seed.to_string(),
            outcome.summary.final_log_score.to_string(),
        ])?;
    }
    writer.flush()?;

    let mut jsonl = fs::File::create(dir.join("summary.jsonl"))?;
    for outcome in outcomes {
        let line = serde_json::to_string(&outcome.summary)?;
        jsonl.write_all(line.as_bytes())?;
        jsonl.write_all(b"\n")?;
    }

    Ok(())
}

/// Read final log-scores back from one or more `summary.jsonl` files.
pub fn read_summary_scores(paths: &[std::path::PathBuf]) -> Result<Vec<f64>> {
    let mut scores = Vec::new();
    for path in paths {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read summary {}", path.display()))?;
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let summary: RunSummary = serde_json::from_str(line)
                .with_context(|| format!("{}:{}: bad summary line", path.display(), n + 1))?;
            scores.push(summary.final_log_score);
        }
    }
    Ok(scores)
}

/// Generate a synthetic dataset (and its held-out truth) for the given
/// simulator kind. Returns the truth serialized as a JSON value.
pub fn make_dataset(
    kind: SimulatorKind,
    seed: u64,
    horizon: usize,
    wells: usize,
    out: &Path,
) -> Result<serde_json::Value> {
    match kind {
        SimulatorKind::Lobe => {
            let sim = LobeSimulator::new(LobeConfig::standard(horizon, wells))?;
            let (data, truth) = sim.make_synthetic_dataset(seed);
            data.write_csv(out)?;
            Ok(serde_json::json!({
                "simulator": "lobe",
                "seed": truth.seed,
                "params": truth.params.iter().map(|p| p.values().to_vec()).collect::<Vec<_>>(),
                "final_surface": truth.final_surface,
            }))
        }
        SimulatorKind::Oracle => {
            let sim = DiscreteOracle::new(vec![0.125, 0.375, 0.625, 0.875], horizon, 0.0)?;
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let tuple: Vec<usize> = (0..horizon).map(|_| rng.gen_range(0..4)).collect();
            let data = sim.data_for_tuple(&tuple);
            data.write_csv(out)?;
            Ok(serde_json::json!({
                "simulator": "oracle",
                "seed": seed,
                "tuple": tuple,
                "targets": data.targets,
            }))
        }
    }
}
