//! Full realizations of the sequential model, with cached states.
//!
//! Because `simulate` and `emit` are deterministic, a trace caches every
//! intermediate state `s_0..s_T`: editing the parameters at step `t`
//! invalidates exactly the states from `t` onward, and only that suffix is
//! re-simulated. Runtime is dominated by simulator calls, so this prefix
//! reuse is the main cost lever of every engine.
//!
//! Traces have value semantics: edits and recomputation return new traces,
//! leaving the original untouched. That keeps retained-particle bookkeeping
//! in conditional SMC free of aliasing.

use rand::RngCore;

use crate::contract::{CallCounter, ParamStep, Simulator, Site};
use crate::error::{Error, Result};
use crate::likelihood::{step_log_likelihood, KernelConfig};

/// A realization of the model: parameters `u_{1:T}`, cached states
/// `s_{0:T}`, emissions `o_{1:T}`, and per-step log-likelihoods.
///
/// A trace may hold fewer steps than the simulator horizon while data is
/// being incorporated incrementally (sequential MH grows its trace one
/// observation at a time).
#[derive(Debug, Clone, PartialEq)]
pub struct Trace<S, E> {
    params: Vec<ParamStep>,
    states: Vec<S>,
    emissions: Vec<E>,
    step_loglik: Vec<f64>,
    total_logscore: f64,
    /// Earliest step whose cached suffix no longer matches `params`.
    stale_from: Option<usize>,
}

impl<S: Clone + PartialEq, E: Clone + PartialEq> Trace<S, E> {
    /// A zero-step trace holding only the initial state `s_0`.
    pub fn initial<M>(sim: &M, counter: &mut CallCounter) -> Self
    where
        M: Simulator<State = S, Emission = E>,
    {
        counter.initialize += 1;
        Self {
            params: Vec::new(),
            states: vec![sim.initialize()],
            emissions: Vec::new(),
            step_loglik: Vec::new(),
            total_logscore: 0.0,
            stale_from: None,
        }
    }

    /// Forward ancestral sampling of a full trace: `s_0` from `initialize`,
    /// each `u_t` from the prior, each state via `simulate`, each step
    /// scored against `data` through the kernel. Costs exactly `T + 1`
    /// state calls.
    pub fn from_prior<M>(
        sim: &M,
        data: &M::Data,
        kernel: &KernelConfig,
        rng: &mut dyn RngCore,
        counter: &mut CallCounter,
    ) -> Result<Self>
    where
        M: Simulator<State = S, Emission = E>,
    {
        sim.validate_data(data)?;
        let mut trace = Self::initial(sim, counter);
        for _ in 0..sim.horizon() {
            let params = sim.sample_params(rng);
            trace.append_step(sim, params, data, kernel, counter)?;
        }
        Ok(trace)
    }

    /// Incorporate one more step: simulate from the last cached state with
    /// the given parameters, emit, and score. One `simulate` call.
    pub fn append_step<M>(
        &mut self,
        sim: &M,
        params: ParamStep,
        data: &M::Data,
        kernel: &KernelConfig,
        counter: &mut CallCounter,
    ) -> Result<()>
    where
        M: Simulator<State = S, Emission = E>,
    {
        if let Some(stale) = self.stale_from {
            return Err(Error::StaleTrace(stale));
        }
        let step = self.len() + 1;
        if step > sim.horizon() {
            return Err(Error::Precondition(format!(
                "cannot append step {step}: simulator horizon is {}",
                sim.horizon()
            )));
        }
        if params.len() != sim.param_dim() {
            return Err(Error::Config(format!(
                "parameter block has {} components, simulator expects {}",
                params.len(),
                sim.param_dim()
            )));
        }
        let state = sim.simulate(self.states.last().expect("s_0 present"), &params);
        counter.simulate += 1;
        let emission = sim.emit(&state);
        counter.emit += 1;
        let distances = sim.per_well_distances(step, &emission, data)?;
        let loglik = step_log_likelihood(&distances, kernel)?;
        self.params.push(params);
        self.states.push(state);
        self.emissions.push(emission);
        self.step_loglik.push(loglik);
        self.total_logscore += loglik;
        Ok(())
    }

    /// Re-simulate states, emissions, and log-likelihoods for every step in
    /// `from_step..=len`, leaving the prefix untouched. Costs exactly
    /// `len - from_step + 1` simulate calls and clears staleness.
    pub fn recompute_suffix<M>(
        &self,
        sim: &M,
        from_step: usize,
        data: &M::Data,
        kernel: &KernelConfig,
        counter: &mut CallCounter,
    ) -> Result<Self>
    where
        M: Simulator<State = S, Emission = E>,
    {
        let len = self.len();
        if from_step == 0 || from_step > len {
            return Err(Error::StepOutOfRange {
                step: from_step,
                len,
            });
        }
        if let Some(stale) = self.stale_from {
            if stale < from_step {
                return Err(Error::Precondition(format!(
                    "trace is stale from step {stale}; recomputation must start at or before it"
                )));
            }
        }
        let mut out = self.clone();
        out.stale_from = None;
        for t in from_step..=len {
            let state = sim.simulate(&out.states[t - 1], &out.params[t - 1]);
            counter.simulate += 1;
            let emission = sim.emit(&state);
            counter.emit += 1;
            let distances = sim.per_well_distances(t, &emission, data)?;
            let loglik = step_log_likelihood(&distances, kernel)?;
            out.states[t] = state;
            out.emissions[t - 1] = emission;
            out.step_loglik[t - 1] = loglik;
        }
        out.total_logscore = out.step_loglik.iter().sum();
        Ok(out)
    }

    /// Replace the scalar component at `site` with `new_value`, returning a
    /// trace whose suffix from `site.step` is marked stale. The caller must
    /// recompute before scoring.
    pub fn with_edit<M>(&self, sim: &M, site: Site, new_value: f64) -> Result<Self>
    where
        M: Simulator<State = S, Emission = E>,
    {
        if site.step == 0 || site.step > self.len() {
            return Err(Error::StepOutOfRange {
                step: site.step,
                len: self.len(),
            });
        }
        if !sim.component_in_support(site.component, new_value) {
            return Err(Error::OutOfSupport {
                component: site.component,
                value: new_value,
            });
        }
        let mut out = self.clone();
        out.params[site.step - 1].set(site.component, new_value)?;
        out.mark_stale(site.step);
        Ok(out)
    }

    /// Replace the whole parameter block at `step` (block-site proposals).
    pub fn with_step_params<M>(&self, sim: &M, step: usize, params: ParamStep) -> Result<Self>
    where
        M: Simulator<State = S, Emission = E>,
    {
        if step == 0 || step > self.len() {
            return Err(Error::StepOutOfRange {
                step,
                len: self.len(),
            });
        }
        if params.len() != sim.param_dim() {
            return Err(Error::Config(format!(
                "parameter block has {} components, simulator expects {}",
                params.len(),
                sim.param_dim()
            )));
        }
        for (i, &v) in params.values().iter().enumerate() {
            if !sim.component_in_support(i, v) {
                return Err(Error::OutOfSupport {
                    component: i,
                    value: v,
                });
            }
        }
        let mut out = self.clone();
        out.params[step - 1] = params;
        out.mark_stale(step);
        Ok(out)
    }

    /// Assemble a trace from per-step pieces (conditional SMC path
    /// reconstruction). The caller guarantees coherence.
    pub(crate) fn from_parts(
        params: Vec<ParamStep>,
        states: Vec<S>,
        emissions: Vec<E>,
        step_loglik: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(states.len(), params.len() + 1);
        let total_logscore = step_loglik.iter().sum();
        Self {
            params,
            states,
            emissions,
            step_loglik,
            total_logscore,
            stale_from: None,
        }
    }
}

impl<S, E> Trace<S, E> {
    fn mark_stale(&mut self, step: usize) {
        self.stale_from = Some(match self.stale_from {
            Some(existing) => existing.min(step),
            None => step,
        });
    }

    /// Number of incorporated steps (equals the horizon once fully built).
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn is_stale(&self) -> bool {
        self.stale_from.is_some()
    }

    pub fn stale_from(&self) -> Option<usize> {
        self.stale_from
    }

    pub fn params(&self) -> &[ParamStep] {
        &self.params
    }

    /// Cached states `s_0..s_len`; one longer than `params`.
    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn emissions(&self) -> &[E] {
        &self.emissions
    }

    pub fn step_loglik(&self) -> &[f64] {
        &self.step_loglik
    }

    pub fn total_logscore(&self) -> f64 {
        self.total_logscore
    }

    /// Value at one scalar site.
    pub fn site_value(&self, site: Site) -> Result<f64> {
        if site.step == 0 || site.step > self.len() {
            return Err(Error::StepOutOfRange {
                step: site.step,
                len: self.len(),
            });
        }
        self.params[site.step - 1].get(site.component)
    }

    /// Sum of the step log-likelihoods from `from_step` to the end: the only
    /// terms that change when step `from_step` is edited.
    pub fn suffix_loglik(&self, from_step: usize) -> f64 {
        self.step_loglik[from_step - 1..].iter().sum()
    }

    /// Total log-score, refusing stale traces.
    pub fn log_score(&self) -> Result<f64> {
        if let Some(stale) = self.stale_from {
            return Err(Error::StaleTrace(stale));
        }
        let sum: f64 = self.step_loglik.iter().sum();
        debug_assert!(
            (sum - self.total_logscore).abs() <= 1e-9,
            "running total drifted from step sum"
        );
        Ok(sum)
    }

    /// Replay all parameters forward from `s_0` and verify the cached
    /// states, emissions, and log-likelihoods match exactly.
    pub fn check_coherent<M>(&self, sim: &M, data: &M::Data, kernel: &KernelConfig) -> Result<()>
    where
        S: Clone + PartialEq,
        E: Clone + PartialEq,
        M: Simulator<State = S, Emission = E>,
    {
        if let Some(stale) = self.stale_from {
            return Err(Error::StaleTrace(stale));
        }
        if self.states.len() != self.len() + 1
            || self.emissions.len() != self.len()
            || self.step_loglik.len() != self.len()
        {
            return Err(Error::Incoherent(format!(
                "field lengths disagree: {} params, {} states, {} emissions, {} logliks",
                self.len(),
                self.states.len(),
                self.emissions.len(),
                self.step_loglik.len()
            )));
        }
        if self.states[0] != sim.initialize() {
            return Err(Error::Incoherent("cached s_0 is not initialize()".into()));
        }
        let mut state = self.states[0].clone();
        for t in 1..=self.len() {
            state = sim.simulate(&state, &self.params[t - 1]);
            if state != self.states[t] {
                return Err(Error::Incoherent(format!("cached state differs at step {t}")));
            }
            let emission = sim.emit(&state);
            if emission != self.emissions[t - 1] {
                return Err(Error::Incoherent(format!(
                    "cached emission differs at step {t}"
                )));
            }
            let distances = sim.per_well_distances(t, &emission, data)?;
            let loglik = step_log_likelihood(&distances, kernel)?;
            if loglik != self.step_loglik[t - 1] {
                return Err(Error::Incoherent(format!(
                    "cached log-likelihood differs at step {t}"
                )));
            }
        }
        let sum: f64 = self.step_loglik.iter().sum();
        if (sum - self.total_logscore).abs() > 1e-9 {
            return Err(Error::Incoherent(
                "total log-score differs from step sum".into(),
            ));
        }
        Ok(())
    }
}
