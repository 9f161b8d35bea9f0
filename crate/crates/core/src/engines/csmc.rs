//! Conditional sequential Monte Carlo and particle Gibbs.
//!
//! A sweep runs a particle filter over the timesteps in order with one
//! particle pinned to the retained trajectory: particle 0 replays the
//! retained parameters, cached states, and cached log-likelihoods (costing
//! no simulator calls), while the free particles propose parameters from the
//! prior and pay one simulate call per step. Because proposals come from
//! the prior and the transition is deterministic, the incremental log-weight
//! at each step is exactly the step's distance log-likelihood.
//!
//! Ancestors of the free particles are resampled after every step except the
//! last; particle 0's ancestor is always 0, which is what keeps the retained
//! trajectory alive through the whole sweep. The sweep returns one
//! trajectory drawn from the final normalized weights.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::contract::{CallCounter, ParamStep, Simulator};
use crate::engines::resample::{
    effective_sample_size, multinomial_resample, resample, ResampleScheme,
};
use crate::engines::{ChainResult, IterationInfo};
use crate::error::{Error, Result};
use crate::likelihood::{step_log_likelihood, KernelConfig};
use crate::trace::Trace;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CsmcOptions {
    pub resampling: ResampleScheme,
}

/// Full record of one sweep: every particle's trajectory as it stood before
/// the final selection, the final log-weights, and per-step diagnostics.
pub struct CsmcSweepOutcome<S, E> {
    pub particles: Vec<Trace<S, E>>,
    pub final_log_weights: Vec<f64>,
    pub step_ess: Vec<f64>,
    pub selected: usize,
}

/// Per-step particle arrays plus the ancestry needed to rebuild paths.
struct SweepArrays<S, E> {
    initial_state: S,
    params: Vec<Vec<ParamStep>>,
    states: Vec<Vec<S>>,
    emissions: Vec<Vec<E>>,
    logliks: Vec<Vec<f64>>,
    /// `ancestors[t-1][i]`: which step-`t-1` particle the step-`t` particle
    /// `i` extends. Identity at `t = 1`.
    ancestors: Vec<Vec<usize>>,
    step_ess: Vec<f64>,
    selected: usize,
}

impl<S: Clone + PartialEq, E: Clone + PartialEq> SweepArrays<S, E> {
    fn path(&self, index: usize) -> Trace<S, E> {
        let horizon = self.params.len();
        let mut indices = vec![0usize; horizon];
        let mut cursor = index;
        for t in (1..=horizon).rev() {
            indices[t - 1] = cursor;
            cursor = self.ancestors[t - 1][cursor];
        }
        let params = (0..horizon)
            .map(|t| self.params[t][indices[t]].clone())
            .collect();
        let states = std::iter::once(self.initial_state.clone())
            .chain((0..horizon).map(|t| self.states[t][indices[t]].clone()))
            .collect();
        let emissions = (0..horizon)
            .map(|t| self.emissions[t][indices[t]].clone())
            .collect();
        let logliks = (0..horizon)
            .map(|t| self.logliks[t][indices[t]])
            .collect();
        Trace::from_parts(params, states, emissions, logliks)
    }
}

fn run_sweep<M: Simulator>(
    retained: &Trace<M::State, M::Emission>,
    particles: usize,
    sim: &M,
    data: &M::Data,
    kernel: &KernelConfig,
    options: &CsmcOptions,
    rng: &mut dyn RngCore,
    counter: &mut CallCounter,
) -> Result<SweepArrays<M::State, M::Emission>> {
    if particles < 2 {
        return Err(Error::Precondition(
            "conditional SMC needs at least 2 particles".into(),
        ));
    }
    if let Some(stale) = retained.stale_from() {
        return Err(Error::StaleTrace(stale));
    }
    let horizon = sim.horizon();
    if retained.len() != horizon {
        return Err(Error::Precondition(format!(
            "retained trace covers {} steps, horizon is {horizon}",
            retained.len()
        )));
    }
    sim.validate_data(data)?;

    let initial_state = sim.initialize();
    counter.initialize += 1;

    let mut arrays = SweepArrays {
        initial_state,
        params: Vec::with_capacity(horizon),
        states: Vec::with_capacity(horizon),
        emissions: Vec::with_capacity(horizon),
        logliks: Vec::with_capacity(horizon),
        ancestors: Vec::with_capacity(horizon),
        step_ess: Vec::with_capacity(horizon),
        selected: 0,
    };
    let mut parent_of: Vec<usize> = (0..particles).collect();

    for t in 1..=horizon {
        arrays.ancestors.push(parent_of.clone());

        let mut params_t = Vec::with_capacity(particles);
        let mut states_t = Vec::with_capacity(particles);
        let mut emissions_t = Vec::with_capacity(particles);
        let mut logliks_t = Vec::with_capacity(particles);

        // Particle 0 is pinned to the retained trajectory; its cached
        // values are reused verbatim.
        params_t.push(retained.params()[t - 1].clone());
        states_t.push(retained.states()[t].clone());
        emissions_t.push(retained.emissions()[t - 1].clone());
        logliks_t.push(retained.step_loglik()[t - 1]);

        for i in 1..particles {
            let parent_state = if t == 1 {
                &arrays.initial_state
            } else {
                &arrays.states[t - 2][parent_of[i]]
            };
            let params = sim.sample_params(rng);
            let state = sim.simulate(parent_state, &params);
            counter.simulate += 1;
            let emission = sim.emit(&state);
            counter.emit += 1;
            let distances = sim.per_well_distances(t, &emission, data)?;
            logliks_t.push(step_log_likelihood(&distances, kernel)?);
            params_t.push(params);
            states_t.push(state);
            emissions_t.push(emission);
        }

        if logliks_t.iter().all(|l| *l == f64::NEG_INFINITY) {
            return Err(Error::DegenerateSweep { step: t });
        }
        arrays.step_ess.push(effective_sample_size(&logliks_t)?);

        if t < horizon {
            let mut next = vec![0usize; particles];
            let free = resample(options.resampling, &logliks_t, particles - 1, rng)
                .map_err(|_| Error::DegenerateSweep { step: t })?;
            next[1..].copy_from_slice(&free);
            parent_of = next;
        } else {
            arrays.selected = multinomial_resample(&logliks_t, 1, rng)
                .map_err(|_| Error::DegenerateSweep { step: t })?[0];
        }

        arrays.params.push(params_t);
        arrays.states.push(states_t);
        arrays.emissions.push(emissions_t);
        arrays.logliks.push(logliks_t);
    }

    Ok(arrays)
}

/// One conditional SMC sweep: returns the newly retained trajectory, drawn
/// from the final particle weights. Costs `(particles - 1) * T` simulate
/// calls plus one initialize.
pub fn csmc_sweep<M: Simulator>(
    retained: &Trace<M::State, M::Emission>,
    particles: usize,
    sim: &M,
    data: &M::Data,
    kernel: &KernelConfig,
    options: &CsmcOptions,
    rng: &mut dyn RngCore,
    counter: &mut CallCounter,
) -> Result<Trace<M::State, M::Emission>> {
    let arrays = run_sweep(retained, particles, sim, data, kernel, options, rng, counter)?;
    Ok(arrays.path(arrays.selected))
}

/// [`csmc_sweep`] returning every particle trajectory and the final
/// weights, for diagnostics and invariant checks.
pub fn csmc_sweep_detailed<M: Simulator>(
    retained: &Trace<M::State, M::Emission>,
    particles: usize,
    sim: &M,
    data: &M::Data,
    kernel: &KernelConfig,
    options: &CsmcOptions,
    rng: &mut dyn RngCore,
    counter: &mut CallCounter,
) -> Result<CsmcSweepOutcome<M::State, M::Emission>> {
    let arrays = run_sweep(retained, particles, sim, data, kernel, options, rng, counter)?;
    let trajectories = (0..particles).map(|i| arrays.path(i)).collect();
    Ok(CsmcSweepOutcome {
        particles: trajectories,
        final_log_weights: arrays.logliks.last().cloned().unwrap_or_default(),
        step_ess: arrays.step_ess,
        selected: arrays.selected,
    })
}

/// Particle Gibbs: iterate conditional SMC sweeps from a forward-sampled
/// initial trace, recording the retained log-score after every sweep.
pub fn run_particle_gibbs<M: Simulator>(
    sim: &M,
    data: &M::Data,
    kernel: &KernelConfig,
    particles: usize,
    sweeps: usize,
    seed: u64,
    options: &CsmcOptions,
) -> Result<ChainResult<M::State, M::Emission>> {
    run_particle_gibbs_with(sim, data, kernel, particles, sweeps, seed, options, |_| {})
}

/// [`run_particle_gibbs`] with a per-sweep observer.
#[allow(clippy::too_many_arguments)]
pub fn run_particle_gibbs_with<M, F>(
    sim: &M,
    data: &M::Data,
    kernel: &KernelConfig,
    particles: usize,
    sweeps: usize,
    seed: u64,
    options: &CsmcOptions,
    mut observe: F,
) -> Result<ChainResult<M::State, M::Emission>>
where
    M: Simulator,
    F: FnMut(IterationInfo<'_, M::State, M::Emission>),
{
    if sweeps == 0 {
        return Err(Error::Precondition(
            "particle-gibbs: sweeps must be >= 1".into(),
        ));
    }
    if particles < 2 {
        return Err(Error::Precondition(
            "particle-gibbs: particles must be >= 2".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counter = CallCounter::default();
    let mut retained = Trace::from_prior(sim, data, kernel, &mut rng, &mut counter)?;
    let mut trajectory = Vec::with_capacity(sweeps);
    let mut changed_total = 0u64;

    for index in 0..sweeps {
        let next = csmc_sweep(
            &retained,
            particles,
            sim,
            data,
            kernel,
            options,
            &mut rng,
            &mut counter,
        )?;
        if next.params() != retained.params() {
            changed_total += 1;
        }
        retained = next;
        trajectory.push(retained.total_logscore());
        observe(IterationInfo {
            index,
            incorporated_steps: retained.len(),
            trace: &retained,
            accepted: None,
        });
    }

    Ok(ChainResult {
        final_trace: retained,
        logscore_trajectory: trajectory,
        acceptance_count: changed_total,
        calls: counter,
        seed,
    })
}
