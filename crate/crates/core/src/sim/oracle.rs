//! An exactly-enumerable discrete simulator used as a correctness oracle.
//!
//! One scalar parameter per step, drawn uniformly from a small grid; the
//! state is a running sum `s_t = s_{t-1} + (u_t - 0.5)` and the emission is
//! the state itself. With `K` grid points and horizon `T` there are only
//! `K^T` parameter tuples, so the posterior can be computed by exhaustive
//! enumeration and every inference engine checked against it.

use std::path::Path;

use rand::{Rng, RngCore};

use crate::contract::{ParamStep, Simulator};
use crate::error::{Error, Result};
use crate::likelihood::{step_log_likelihood, KernelConfig};
use crate::trace::Trace;

/// Tolerance for matching a sampled value back to its grid atom.
const GRID_EPS: f64 = 1e-9;

/// Largest tuple count `enumerate_posterior` will accept.
const ENUMERATION_LIMIT: u128 = 1_000_000;

/// The discrete oracle simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOracle {
    grid: Vec<f64>,
    horizon: usize,
    initial_state: f64,
}

impl DiscreteOracle {
    /// The standard oracle: `T = 3`, four-point grid
    /// `{0.125, 0.375, 0.625, 0.875}`, initial state 0.
    pub fn standard() -> Self {
        Self::new(vec![0.125, 0.375, 0.625, 0.875], 3, 0.0).expect("standard grid is valid")
    }

    pub fn new(grid: Vec<f64>, horizon: usize, initial_state: f64) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::Config("oracle grid must be nonempty".into()));
        }
        if horizon == 0 {
            return Err(Error::Config("oracle horizon must be >= 1".into()));
        }
        Ok(Self {
            grid,
            horizon,
            initial_state,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Grid index of a parameter value, if it is (numerically) an atom.
    pub fn grid_index(&self, value: f64) -> Option<usize> {
        self.grid.iter().position(|&g| (g - value).abs() <= GRID_EPS)
    }

    /// Map a trace's parameters to grid indices, one per step.
    pub fn trace_tuple<S, E>(&self, trace: &Trace<S, E>) -> Result<Vec<usize>> {
        trace
            .params()
            .iter()
            .map(|p| {
                let v = p.get(0)?;
                self.grid_index(v).ok_or(Error::OutOfSupport {
                    component: 0,
                    value: v,
                })
            })
            .collect()
    }

    /// Forward state trajectory for one parameter tuple (by grid index).
    pub fn states_for_tuple(&self, tuple: &[usize]) -> Vec<f64> {
        let mut s = self.initial_state;
        tuple
            .iter()
            .map(|&i| {
                s += self.grid[i] - 0.5;
                s
            })
            .collect()
    }

    /// Targets generated by a ground-truth tuple.
    pub fn data_for_tuple(&self, tuple: &[usize]) -> OracleData {
        OracleData {
            targets: self.states_for_tuple(tuple),
        }
    }
}

impl Simulator for DiscreteOracle {
    type State = f64;
    type Emission = f64;
    type Data = OracleData;

    fn param_dim(&self) -> usize {
        1
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn initialize(&self) -> f64 {
        self.initial_state
    }

    fn sample_component(&self, _component: usize, rng: &mut dyn RngCore) -> f64 {
        let i = rng.gen_range(0..self.grid.len());
        self.grid[i]
    }

    fn log_prob_component(&self, _component: usize, value: f64) -> f64 {
        if self.grid_index(value).is_some() {
            -(self.grid.len() as f64).ln()
        } else {
            f64::NEG_INFINITY
        }
    }

    fn component_in_support(&self, _component: usize, value: f64) -> bool {
        self.grid_index(value).is_some()
    }

    fn simulate(&self, state: &f64, params: &ParamStep) -> f64 {
        state + (params.values()[0] - 0.5)
    }

    fn emit(&self, state: &f64) -> f64 {
        *state
    }

    fn per_well_distances(&self, step: usize, emission: &f64, data: &OracleData) -> Result<Vec<f64>> {
        let target = data.targets.get(step - 1).ok_or_else(|| {
            Error::Config(format!(
                "oracle data has {} targets, step {step} requested",
                data.targets.len()
            ))
        })?;
        Ok(vec![(emission - target).abs()])
    }

    fn validate_data(&self, data: &OracleData) -> Result<()> {
        if data.targets.len() != self.horizon {
            return Err(Error::Config(format!(
                "oracle data has {} targets but the horizon is {}",
                data.targets.len(),
                self.horizon
            )));
        }
        Ok(())
    }
}

/// Per-step targets `r_{1:T}` for the oracle simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleData {
    pub targets: Vec<f64>,
}

impl OracleData {
    pub fn new(targets: Vec<f64>) -> Self {
        Self { targets }
    }

    /// Read targets from CSV with header `step,target`, rows ordered by step.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        {
            let headers = reader.headers()?;
            if headers.len() != 2 || &headers[0] != "step" || &headers[1] != "target" {
                return Err(Error::DataFormat(format!(
                    "expected header `step,target`, got `{}`",
                    headers.iter().collect::<Vec<_>>().join(",")
                )));
            }
        }
        let mut targets = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            let step: usize = record[0]
                .parse()
                .map_err(|_| Error::DataFormat(format!("bad step on row {}", row + 1)))?;
            let target: f64 = record[1]
                .parse()
                .map_err(|_| Error::DataFormat(format!("bad target on row {}", row + 1)))?;
            if step != row + 1 {
                return Err(Error::DataFormat(format!(
                    "steps must be 1..=T in order; row {} has step {step}",
                    row + 1
                )));
            }
            targets.push(target);
        }
        if targets.is_empty() {
            return Err(Error::DataFormat("oracle data has no rows".into()));
        }
        Ok(Self { targets })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(["step", "target"])?;
        for (i, t) in self.targets.iter().enumerate() {
            writer.write_record([(i + 1).to_string(), t.to_string()])?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// The exact posterior over parameter tuples, normalized to sum to one.
#[derive(Debug, Clone)]
pub struct PosteriorTable {
    grid_len: usize,
    horizon: usize,
    probs: Vec<f64>,
}

impl PosteriorTable {
    pub fn grid_len(&self) -> usize {
        self.grid_len
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Probabilities indexed by `tuple_index`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Row-major tuple index: the step-1 choice varies slowest.
    pub fn tuple_index(&self, tuple: &[usize]) -> usize {
        debug_assert_eq!(tuple.len(), self.horizon);
        tuple.iter().fold(0, |acc, &i| acc * self.grid_len + i)
    }

    pub fn prob(&self, tuple: &[usize]) -> f64 {
        self.probs[self.tuple_index(tuple)]
    }

    /// Marginal distribution of each site over the grid atoms.
    pub fn site_marginals(&self) -> Vec<Vec<f64>> {
        let mut marginals = vec![vec![0.0; self.grid_len]; self.horizon];
        let mut tuple = vec![0usize; self.horizon];
        for (idx, &p) in self.probs.iter().enumerate() {
            decode_tuple(idx, self.grid_len, &mut tuple);
            for (t, &atom) in tuple.iter().enumerate() {
                marginals[t][atom] += p;
            }
        }
        marginals
    }
}

fn decode_tuple(mut index: usize, grid_len: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = index % grid_len;
        index /= grid_len;
    }
}

/// Exhaustively score all `K^T` parameter tuples against the data and return
/// the normalized posterior. Refuses problems beyond one million tuples.
pub fn enumerate_posterior(
    sim: &DiscreteOracle,
    data: &OracleData,
    kernel: &KernelConfig,
) -> Result<PosteriorTable> {
    sim.validate_data(data)?;
    let grid_len = sim.grid().len();
    let horizon = sim.horizon();
    let tuples = (grid_len as u128)
        .checked_pow(horizon as u32)
        .ok_or(Error::EnumerationTooLarge {
            tuples: u128::MAX,
            limit: ENUMERATION_LIMIT,
        })?;
    if tuples > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            tuples,
            limit: ENUMERATION_LIMIT,
        });
    }

    let count = tuples as usize;
    let mut log_probs = Vec::with_capacity(count);
    let mut tuple = vec![0usize; horizon];
    for idx in 0..count {
        decode_tuple(idx, grid_len, &mut tuple);
        let states = sim.states_for_tuple(&tuple);
        let mut ll = 0.0;
        for (t, &s) in states.iter().enumerate() {
            let d = (s - data.targets[t]).abs();
            ll += step_log_likelihood(&[d], kernel)?;
        }
        log_probs.push(ll);
    }

    // Normalize via log-sum-exp; the prior is uniform so it cancels.
    let max = log_probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::DegenerateWeights);
    }
    let mut probs: Vec<f64> = log_probs.iter().map(|&l| (l - max).exp()).collect();
    let norm: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= norm;
    }
    debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);

    Ok(PosteriorTable {
        grid_len,
        horizon,
        probs,
    })
}
