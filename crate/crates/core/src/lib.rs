//! Inversion of sequential software simulators by approximate Bayesian
//! inference.
//!
//! A simulator is any type implementing the nine-procedure [`Simulator`]
//! contract: a deterministic Markovian transition over an opaque state,
//! per-step parameters drawn from a fixed prior, deterministic emissions,
//! and a distance-based pseudo-likelihood comparing emissions against real
//! data through the exponential kernel `exp(-gamma * ||o - r||)`.
//!
//! Four interchangeable Monte Carlo engines target the resulting posterior:
//! single-site random-scan Metropolis-Hastings, sequential MH with
//! incremental data incorporation, particle Gibbs (conditional SMC), and a
//! hybrid cycle alternating the two. Two reference simulators are included:
//! a synthetic geological lobe model and a discrete simulator small enough
//! for exact posterior enumeration, which anchors the correctness suite.

pub mod contract;
pub mod engines;
pub mod error;
pub mod likelihood;
pub mod sim;
pub mod stats;
pub mod trace;

pub use contract::{CallCounter, ParamStep, Simulator, Site};
pub use engines::{
    csmc_sweep, csmc_sweep_detailed, effective_sample_size, mh_transition, multinomial_resample,
    run_hybrid, run_hybrid_with, run_method, run_method_with, run_mh, run_mh_with,
    run_particle_gibbs, run_particle_gibbs_with, run_sequential_mh, run_sequential_mh_with,
    ChainResult, CsmcOptions, EngineOptions, IterationInfo, MethodSpec, MhOptions, ResampleScheme,
    SiteMode,
};
pub use error::{Error, Result};
pub use likelihood::{
    kernel_eval, log_kernel, step_log_likelihood, trace_log_score, KernelConfig, Norm,
    ObservationFlag,
};
pub use sim::{
    enumerate_posterior, DiscreteOracle, EmissionSegment, LobeConfig, LobeParams, LobeSimulator,
    LobeState, OracleData, PosteriorTable, SyntheticTruth, WellLog, WellLogSet,
};
pub use trace::Trace;
