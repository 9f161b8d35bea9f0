//! The hybrid cycle: particle Gibbs sweeps alternating with single-site MH.
//!
//! Each cycle runs `pg_sweeps` conditional SMC sweeps followed by
//! `mh_per_cycle` MH transitions, all on one evolving trace. The sweeps make
//! global coordinated moves; the MH transitions polish individual sites.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::contract::{CallCounter, Simulator};
use crate::engines::csmc::csmc_sweep;
use crate::engines::mh::mh_transition;
use crate::engines::{ChainResult, EngineOptions, IterationInfo};
use crate::error::{Error, Result};
use crate::likelihood::KernelConfig;
use crate::trace::Trace;

#[allow(clippy::too_many_arguments)]
pub fn run_hybrid<M: Simulator>(
    sim: &M,
    data: &M::Data,
    kernel: &KernelConfig,
    particles: usize,
    pg_sweeps: usize,
    mh_per_cycle: usize,
    cycles: usize,
    seed: u64,
    options: &EngineOptions,
) -> Result<ChainResult<M::State, M::Emission>> {
    run_hybrid_with(
        sim,
        data,
        kernel,
        particles,
        pg_sweeps,
        mh_per_cycle,
        cycles,
        seed,
        options,
        |_| {},
    )
}

/// [`run_hybrid`] with an observer called after every sweep and transition.
#[allow(clippy::too_many_arguments)]
pub fn run_hybrid_with<M, F>(
    sim: &M,
    data: &M::Data,
    kernel: &KernelConfig,
    particles: usize,
    pg_sweeps: usize,
    mh_per_cycle: usize,
    cycles: usize,
    seed: u64,
    options: &EngineOptions,
    mut observe: F,
) -> Result<ChainResult<M::State, M::Emission>>
where
    M: Simulator,
    F: FnMut(IterationInfo<'_, M::State, M::Emission>),
{
    if pg_sweeps == 0 || mh_per_cycle == 0 || cycles == 0 {
        return Err(Error::Precondition(
            "hybrid: pg_sweeps, mh_per_cycle, and cycles must be >= 1".into(),
        ));
    }
    if particles < 2 {
        return Err(Error::Precondition("hybrid: particles must be >= 2".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counter = CallCounter::default();
    let mut trace = Trace::from_prior(sim, data, kernel, &mut rng, &mut counter)?;
    let mut trajectory = Vec::with_capacity(cycles * (pg_sweeps + mh_per_cycle));
    let mut accepted_total = 0u64;
    let mut index = 0usize;

    for _ in 0..cycles {
        for _ in 0..pg_sweeps {
            let next = csmc_sweep(
                &trace,
                particles,
                sim,
                data,
                kernel,
                &options.csmc,
                &mut rng,
                &mut counter,
            )?;
            if next.params() != trace.params() {
                accepted_total += 1;
            }
            trace = next;
            trajectory.push(trace.total_logscore());
            observe(IterationInfo {
                index,
                incorporated_steps: trace.len(),
                trace: &trace,
                accepted: None,
            });
            index += 1;
        }
        for _ in 0..mh_per_cycle {
            let (next, accepted) = mh_transition(
                &trace,
                sim,
                data,
                kernel,
                &options.mh,
                &mut rng,
                &mut counter,
            )?;
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
    fn reference_configuration_records_600_iterations() {
        let sim = DiscreteOracle::standard();
        let data = OracleData::new(vec![0.0, 0.1, 0.2]);
        let kernel = KernelConfig::new(1.0).unwrap();
        let result = run_hybrid(
            &sim,
            &data,
            &kernel,
            10,
            10,
            50,
            10,
            17,
            &EngineOptions::default(),
        )
        .unwrap();
        assert_eq!(result.iterations(), 600);
    }

    #[test]
    fn degenerate_counts_rejected() {
        let sim = DiscreteOracle::standard();
        let data = OracleData::new(vec![0.0, 0.0, 0.0]);
        let kernel = KernelConfig::new(1.0).unwrap();
        let opts = EngineOptions::default();
        assert!(matches!(
            run_hybrid(&sim, &data, &kernel, 10, 0, 5, 1, 1, &opts),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            run_hybrid(&sim, &data, &kernel, 10, 1, 0, 1, 1, &opts),
            Err(Error::Precondition(_))
        ));
    }
}
