//! Sequential Metropolis-Hastings: data incorporation interleaved with
//! inference.
//!
//! Observations enter one step at a time. After step `t` is incorporated the
//! chain runs `per_step_transitions * t` single-site transitions over the
//! `t * n` sites seen so far, so later (harder) prefixes get proportionally
//! more work and strong sequential dependencies are accounted for
//! incrementally. Total transitions: `per_step * T * (T + 1) / 2`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::contract::{CallCounter, Simulator};
use crate::engines::mh::{mh_transition, MhOptions};
use crate::engines::{ChainResult, IterationInfo};
use crate::error::{Error, Result};
use crate::likelihood::KernelConfig;
use crate::trace::Trace;

pub fn run_sequential_mh<M: Simulator>(
    sim: &M,
    data: &M::Data,
    kernel: &KernelConfig,
    per_step_transitions: usize,
    seed: u64,
    options: &MhOptions,
) -> Result<ChainResult<M::State, M::Emission>> {
    run_sequential_mh_with(sim, data, kernel, per_step_transitions, seed, options, |_| {})
}

/// [`run_sequential_mh`] with a per-iteration observer. Only iterations
/// whose `incorporated_steps` equals the horizon target the full posterior.
pub fn run_sequential_mh_with<M, F>(
    sim: &M,
    data: &M::Data,
    kernel: &KernelConfig,
    per_step_transitions: usize,
    seed: u64,
    options: &MhOptions,
    mut observe: F,
) -> Result<ChainResult<M::State, M::Emission>>
where
    M: Simulator,
    F: FnMut(IterationInfo<'_, M::State, M::Emission>),
{
    if per_step_transitions == 0 {
        return Err(Error::Precondition(
            "seq-mh: per_step_transitions must be >= 1".into(),
        ));
    }
    sim.validate_data(data)?;

    let horizon = sim.horizon();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counter = CallCounter::default();
    let mut trace = Trace::initial(sim, &mut counter);
    let mut trajectory =
        Vec::with_capacity(per_step_transitions * horizon * (horizon + 1) / 2);
    let mut accepted_total = 0u64;
    let mut index = 0usize;

    for t in 1..=horizon {
        let params = sim.sample_params(&mut rng);
        trace.append_step(sim, params, data, kernel, &mut counter)?;

        for _ in 0..per_step_transitions * t {
            let (next, accepted) =
                mh_transition(&trace, sim, data, kernel, options, &mut rng, &mut counter)?;
            trace = next;
            if accepted {
                accepted_total += 1;
            }
            trajectory.push(trace.total_logscore());
            observe(IterationInfo {
                index,
                incorporated_steps: t,
                trace: &trace,
                accepted: Some(accepted),
            });
            index += 1;
        }
    }

    Ok(ChainResult {
        final_trace: trace,
        logscore_trajectory: trajectory,
        acceptance_count: accepted_total,
        calls: counter,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::oracle::{DiscreteOracle, OracleData};

    #[test]
    fn schedule_length_is_triangular() {
        let sim = DiscreteOracle::new(vec![0.125, 0.375, 0.625, 0.875], 10, 0.0).unwrap();
        let data = OracleData::new(vec![0.0; 10]);
        let kernel = KernelConfig::new(1.0).unwrap();
        let result =
            run_sequential_mh(&sim, &data, &kernel, 10, 42, &MhOptions::default()).unwrap();
        assert_eq!(result.iterations(), 550);
        assert_eq!(result.final_trace.len(), 10);
    }

    #[test]
    fn transitions_only_touch_incorporated_sites() {
        let sim = DiscreteOracle::standard();
        let data = OracleData::new(vec![0.1, 0.2, 0.3]);
        let kernel = KernelConfig::new(1.0).unwrap();
        let mut max_len_at_phase = vec![0usize; 3];
        run_sequential_mh_with(&sim, &data, &kernel, 5, 7, &MhOptions::default(), |info| {
            let phase = info.incorporated_steps - 1;
            max_len_at_phase[phase] = max_len_at_phase[phase].max(info.trace.len());
            assert_eq!(info.trace.len(), info.incorporated_steps);
        })
        .unwrap();
        assert_eq!(max_len_at_phase, vec![1, 2, 3]);
    }

    #[test]
    fn zero_bandwidth_accepts_all() {
        let sim = DiscreteOracle::standard();
        let data = OracleData::new(vec![0.0, 0.0, 0.0]);
        let kernel = KernelConfig::new(0.0).unwrap();
        let result =
            run_sequential_mh(&sim, &data, &kernel, 10, 123, &MhOptions::default()).unwrap();
        assert_eq!(result.acceptance_count, result.iterations() as u64);
    }
}
