//! Single-site random-scan Metropolis-Hastings.
//!
//! Proposals resimulate one site from the prior, so the acceptance ratio
//! reduces to the likelihood ratio of the affected suffix: every term before
//! the edited step is untouched, and the prior proposal density cancels.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::contract::{CallCounter, Simulator, Site};
use crate::engines::{ChainResult, IterationInfo};
use crate::error::{Error, Result};
use crate::likelihood::KernelConfig;
use crate::trace::Trace;

/// Granularity of an MH proposal site.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteMode {
    /// One scalar component `u_{t,i}` per proposal (the default: a
    /// `T x n`-site random scan).
    #[default]
    Scalar,
    /// A whole parameter block `u_t` per proposal.
    Block,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MhOptions {
    pub site_mode: SiteMode,
}

/// One random-scan MH transition over the trace's incorporated steps.
///
/// Picks a site uniformly, proposes from the prior, recomputes the suffix
/// (costing `len - t + 1` simulate calls), and accepts with probability
/// `min(1, exp(suffix_loglik' - suffix_loglik))`. Returns the new trace and
/// whether the proposal was accepted; on rejection the returned trace equals
/// the input.
pub fn mh_transition<M: Simulator>(
    trace: &Trace<M::State, M::Emission>,
    sim: &M,
    data: &M::Data,
    kernel: &KernelConfig,
    options: &MhOptions,
    rng: &mut dyn RngCore,
    counter: &mut CallCounter,
) -> Result<(Trace<M::State, M::Emission>, bool)> {
    let len = trace.len();
    let dim = sim.param_dim();

    let (step, edited) = match options.site_mode {
        SiteMode::Scalar => {
            let flat = rng.gen_range(0..len * dim);
            let site = Site::new(flat / dim + 1, flat % dim);
            let value = sim.sample_component(site.component, rng);
            (site.step, trace.with_edit(sim, site, value)?)
        }
        SiteMode::Block => {
            let step = rng.gen_range(0..len) + 1;
            let block = sim.sample_params(rng);
            (step, trace.with_step_params(sim, step, block)?)
        }
    };

    let candidate = edited.recompute_suffix(sim, step, data, kernel, counter)?;
    let log_alpha = (candidate.suffix_loglik(step) - trace.suffix_loglik(step)).min(0.0);
    let accepted = rng.gen::<f64>() < log_alpha.exp();
    if accepted {
        Ok((candidate, true))
    } else {
        Ok((trace.clone(), false))
    }
}

/// Run an MH chain from a fresh prior trace, recording the log-score after
/// every transition.
pub fn run_mh<M: Simulator>(
    sim: &M,
    data: &M::Data,
    kernel: &KernelConfig,
    iterations: usize,
    seed: u64,
    options: &MhOptions,
) -> Result<ChainResult<M::State, M::Emission>> {
    run_mh_with(sim, data, kernel, iterations, seed, options, |_| {})
}

/// [`run_mh`] with a per-iteration observer.
pub fn run_mh_with<M, F>(
    sim: &M,
    data: &M::Data,
    kernel: &KernelConfig,
    iterations: usize,
    seed: u64,
    options: &MhOptions,
    mut observe: F,
) -> Result<ChainResult<M::State, M::Emission>>
where
    M: Simulator,
    F: FnMut(IterationInfo<'_, M::State, M::Emission>),
{
    if iterations == 0 {
        return Err(Error::Precondition("mh: iterations must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counter = CallCounter::default();
    let mut trace = Trace::from_prior(sim, data, kernel, &mut rng, &mut counter)?;
    let mut trajectory = Vec::with_capacity(iterations);
    let mut accepted_total = 0u64;

    for index in 0..iterations {
        let (next, accepted) =
            mh_transition(&trace, sim, data, kernel, options, &mut rng, &mut counter)?;
        trace = next;
        if accepted {
            accepted_total += 1;
        }
        trajectory.push(trace.total_logscore());
        observe(IterationInfo {
            index,
            incorporated_steps: trace.len(),
            trace: &trace,
            accepted: Some(accepted),
        });
    }

    Ok(ChainResult {
        final_trace: trace,
        logscore_trajectory: trajectory,
        acceptance_count: accepted_total,
        calls: counter,
        seed,
    })
}
