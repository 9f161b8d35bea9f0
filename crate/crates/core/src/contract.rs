//! The procedural contract a pluggable sequential simulator must satisfy.
//!
//! A simulator advances a Markovian state `s_t = simulate(s_{t-1}, u_t)` where
//! each per-step parameter block `u_t` is drawn independently from a fixed
//! prior. Emissions `o_t = emit(s_t)` are compared against real data through a
//! distance kernel rather than an exact likelihood, because both `simulate`
//! and `emit` are deterministic (delta-distributed) and an exact likelihood
//! would vanish almost surely.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::likelihood::{step_log_likelihood, KernelConfig};

/// One step's parameter block `u_t`: a vector of raw scalar components.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamStep {
    values: Vec<f64>,
}

impl ParamStep {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, component: usize) -> Result<f64> {
        self.values
            .get(component)
            .copied()
            .ok_or(Error::ComponentOutOfRange {
                component,
                dim: self.values.len(),
            })
    }

    pub(crate) fn set(&mut self, component: usize, value: f64) -> Result<()> {
        let dim = self.values.len();
        match self.values.get_mut(component) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => Err(Error::ComponentOutOfRange { component, dim }),
        }
    }
}

/// Address of one scalar proposal site: step `t` (1-based) and component
/// index `i` (0-based) within that step's parameter block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Site {
    pub step: usize,
    pub component: usize,
}

impl Site {
    pub fn new(step: usize, component: usize) -> Self {
        Self { step, component }
    }
}

/// Tally of simulator procedure invocations. Chains own one each; runtime is
/// dominated by `simulate`, so this is the cost measure experiments report.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CallCounter {
    pub initialize: u64,
    pub simulate: u64,
    pub emit: u64,
}

impl CallCounter {
    /// State-producing calls: `initialize` plus `simulate`.
    pub fn state_calls(&self) -> u64 {
        self.initialize + self.simulate
    }

    pub fn add(&mut self, other: &CallCounter) {
        self.initialize += other.initialize;
        self.simulate += other.simulate;
        self.emit += other.emit;
    }
}

/// The simulator contract: nine procedures over an opaque state type.
///
/// `initialize`/`simulate`/`emit` must be pure and deterministic; the
/// `log_prob_*` counterparts evaluate the matching (log) densities. For
/// deterministic transitions the density is a delta: log-probability `0.0`
/// when the argument equals the deterministic image and `-inf` otherwise.
/// Inference engines only generate proposals forward, so the delta branches
/// are never hit on mismatched values during normal operation.
pub trait Simulator {
    /// Opaque simulator state `s_t`.
    type State: Clone + PartialEq;
    /// Per-step emission `o_t`.
    type Emission: Clone + PartialEq;
    /// The real data `r` the inversion conditions on.
    type Data;

    /// `n`: number of scalar components per parameter block.
    fn param_dim(&self) -> usize;

    /// `T`: number of sequential steps.
    fn horizon(&self) -> usize;

    /// The (deterministic) initial state `s_0`.
    fn initialize(&self) -> Self::State;

    /// Log-density of `state` under the initializing distribution.
    fn log_prob_init(&self, state: &Self::State) -> f64 {
        if *state == self.initialize() {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Draw one raw component of a parameter block from the prior.
    fn sample_component(&self, component: usize, rng: &mut dyn RngCore) -> f64;

    /// Log-density of a single component under the prior.
    fn log_prob_component(&self, component: usize, value: f64) -> f64;

    /// Whether `value` lies in the prior's support for `component`.
    fn component_in_support(&self, component: usize, value: f64) -> bool;

    /// Draw a full parameter block; components are independent.
    fn sample_params(&self, rng: &mut dyn RngCore) -> ParamStep {
        ParamStep::new(
            (0..self.param_dim())
                .map(|i| self.sample_component(i, rng))
                .collect(),
        )
    }

    /// Joint log-density of a block: sum of the component densities.
    fn log_prob_params(&self, params: &ParamStep) -> f64 {
        params
            .values()
            .iter()
            .enumerate()
            .map(|(i, &v)| self.log_prob_component(i, v))
            .sum()
    }

    /// Advance the state: `s_t = simulate(s_{t-1}, u_t)`. Deterministic.
    fn simulate(&self, state: &Self::State, params: &ParamStep) -> Self::State;

    /// Delta log-density of the transition.
    fn log_prob_simulate(
        &self,
        next: &Self::State,
        state: &Self::State,
        params: &ParamStep,
    ) -> f64 {
        if *next == self.simulate(state, params) {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Emission of the current state. Deterministic.
    fn emit(&self, state: &Self::State) -> Self::Emission;

    /// Delta log-density of the emission.
    fn log_prob_emit(&self, emission: &Self::Emission, state: &Self::State) -> f64 {
        if *emission == self.emit(state) {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Per-location distances `‖o_{t,l} - r_{t,l}‖` for step `t` (1-based),
    /// one entry per well/location, each nonnegative.
    fn per_well_distances(
        &self,
        step: usize,
        emission: &Self::Emission,
        data: &Self::Data,
    ) -> Result<Vec<f64>>;

    /// Check `data` is compatible with this simulator (locations, horizon).
    fn validate_data(&self, data: &Self::Data) -> Result<()>;

    /// The per-step observation probability `k_gamma(o_t, r)` in `[0, 1]`:
    /// the product of per-well kernel factors, evaluated through the log
    /// domain.
    fn distance_likelihood(
        &self,
        step: usize,
        emission: &Self::Emission,
        data: &Self::Data,
        kernel: &KernelConfig,
    ) -> Result<f64> {
        let distances = self.per_well_distances(step, emission, data)?;
        Ok(step_log_likelihood(&distances, kernel)?.exp())
    }
}
