//! The four inference strategies: single-site random-scan MH, sequential
//! MH, particle Gibbs (conditional SMC), and the alternating hybrid.
//!
//! Every engine targets the same posterior — parameters, states, and
//! emissions of a simulator-contract model conditioned on distance-kernel
//! observations — and works against any [`Simulator`](crate::Simulator).

pub mod csmc;
pub mod hybrid;
pub mod mh;
pub mod resample;
pub mod seq_mh;

pub use csmc::{csmc_sweep, csmc_sweep_detailed, run_particle_gibbs, run_particle_gibbs_with, CsmcOptions, CsmcSweepOutcome};
pub use hybrid::{run_hybrid, run_hybrid_with};
pub use mh::{mh_transition, run_mh, run_mh_with, MhOptions, SiteMode};
pub use resample::{
    effective_sample_size, multinomial_resample, normalized_weights, resample,
    systematic_resample, ResampleScheme,
};
pub use seq_mh::{run_sequential_mh, run_sequential_mh_with};

use serde::{Deserialize, Serialize};

use crate::contract::{CallCounter, Simulator};
use crate::error::{Error, Result};
use crate::likelihood::KernelConfig;
use crate::trace::Trace;

/// One inference method and its hyperparameters.
///
/// Reference configurations: particle Gibbs with 10 particles and 50 sweeps;
/// single-site MH for 500 iterations; sequential MH with 10 transitions per
/// incorporated step; a hybrid cycling 10 sweeps then 50 MH transitions for
/// 10 cycles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MethodSpec {
    /// Single-site random-scan Metropolis-Hastings.
    Mh { iterations: usize },
    /// MH interleaved with incremental data incorporation: after step `t`
    /// is observed, `per_step_transitions * t` transitions run over the
    /// sites incorporated so far.
    SeqMh { per_step_transitions: usize },
    /// Particle Gibbs: repeated conditional SMC sweeps.
    ParticleGibbs { particles: usize, sweeps: usize },
    /// Alternating particle Gibbs and MH.
    Hybrid {
        particles: usize,
        pg_sweeps: usize,
        mh_per_cycle: usize,
        cycles: usize,
    },
}

impl MethodSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            MethodSpec::Mh { .. } => "mh",
            MethodSpec::SeqMh { .. } => "seq-mh",
            MethodSpec::ParticleGibbs { .. } => "particle-gibbs",
            MethodSpec::Hybrid { .. } => "hybrid",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Precondition(msg.into()));
        match *self {
            MethodSpec::Mh { iterations } => {
                if iterations == 0 {
                    return fail("mh: iterations must be >= 1");
                }
            }
            MethodSpec::SeqMh {
                per_step_transitions,
            } => {
                if per_step_transitions == 0 {
                    return fail("seq-mh: per_step_transitions must be >= 1");
                }
            }
            MethodSpec::ParticleGibbs { particles, sweeps } => {
                if particles < 2 {
                    return fail("particle-gibbs: particles must be >= 2");
                }
                if sweeps == 0 {
                    return fail("particle-gibbs: sweeps must be >= 1");
                }
            }
            MethodSpec::Hybrid {
                particles,
                pg_sweeps,
                mh_per_cycle,
                cycles,
            } => {
                if particles < 2 {
                    return fail("hybrid: particles must be >= 2");
                }
                if pg_sweeps == 0 || mh_per_cycle == 0 || cycles == 0 {
                    return fail("hybrid: pg_sweeps, mh_per_cycle, and cycles must be >= 1");
                }
            }
        }
        Ok(())
    }

    /// Number of recorded iterations a chain of this method produces.
    pub fn trajectory_len(&self, horizon: usize) -> usize {
        match *self {
            MethodSpec::Mh { iterations } => iterations,
            MethodSpec::SeqMh {
                per_step_transitions,
            } => per_step_transitions * horizon * (horizon + 1) / 2,
            MethodSpec::ParticleGibbs { sweeps, .. } => sweeps,
            MethodSpec::Hybrid {
                pg_sweeps,
                mh_per_cycle,
                cycles,
                ..
            } => cycles * (pg_sweeps + mh_per_cycle),
        }
    }
}

/// Shared engine knobs beyond the method hyperparameters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EngineOptions {
    pub mh: MhOptions,
    pub csmc: CsmcOptions,
}

/// A snapshot handed to iteration observers: the current trace, how many
/// observations it incorporates, and whether an MH proposal was accepted.
pub struct IterationInfo<'a, S, E> {
    pub index: usize,
    pub incorporated_steps: usize,
    pub trace: &'a Trace<S, E>,
    pub accepted: Option<bool>,
}

/// Everything a finished chain reports.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainResult<S, E> {
    pub final_trace: Trace<S, E>,
    /// Trace log-score after every recorded iteration.
    pub logscore_trajectory: Vec<f64>,
    /// Accepted MH transitions plus sweeps that changed the retained trace.
    pub acceptance_count: u64,
    pub calls: CallCounter,
    pub seed: u64,
}

impl<S, E> ChainResult<S, E> {
    pub fn iterations(&self) -> usize {
        self.logscore_trajectory.len()
    }

    /// Total state-producing simulator calls (initialize + simulate).
    pub fn simulator_calls(&self) -> u64 {
        self.calls.state_calls()
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.logscore_trajectory.is_empty() {
            0.0
        } else {
            self.acceptance_count as f64 / self.logscore_trajectory.len() as f64
        }
    }

    pub fn final_logscore(&self) -> f64 {
        self.final_trace.total_logscore()
    }
}

/// Run one chain of the given method from the given seed.
pub fn run_method<M: Simulator>(
    sim: &M,
    data: &M::Data,
    kernel: &KernelConfig,
    spec: &MethodSpec,
    seed: u64,
    options: &EngineOptions,
) -> Result<ChainResult<M::State, M::Emission>> {
    run_method_with(sim, data, kernel, spec, seed, options, |_| {})
}

/// [`run_method`] with a per-iteration observer.
pub fn run_method_with<M, F>(
    sim: &M,
    data: &M::Data,
    kernel: &KernelConfig,
    spec: &MethodSpec,
    seed: u64,
    options: &EngineOptions,
    observe: F,
) -> Result<ChainResult<M::State, M::Emission>>
where
    M: Simulator,
    F: FnMut(IterationInfo<'_, M::State, M::Emission>),
{
    spec.validate()?;
    match *spec {
        MethodSpec::Mh { iterations } => {
            run_mh_with(sim, data, kernel, iterations, seed, &options.mh, observe)
        }
        MethodSpec::SeqMh {
            per_step_transitions,
        } => run_sequential_mh_with(
            sim,
            data,
            kernel,
            per_step_transitions,
            seed,
            &options.mh,
            observe,
        ),
        MethodSpec::ParticleGibbs { particles, sweeps } => run_particle_gibbs_with(
            sim,
            data,
            kernel,
            particles,
            sweeps,
            seed,
            &options.csmc,
            observe,
        ),
        MethodSpec::Hybrid {
            particles,
            pg_sweeps,
            mh_per_cycle,
            cycles,
        } => run_hybrid_with(
            sim,
            data,
            kernel,
            particles,
            pg_sweeps,
            mh_per_cycle,
            cycles,
            seed,
            options,
            observe,
        ),
    }
}
