//! Shared helpers for the integration suites.

use invertor_core::{
    enumerate_posterior, run_method_with, DiscreteOracle, EngineOptions, KernelConfig, MethodSpec,
    OracleData, Simulator,
};
use invertor_core::stats::MarginalAccumulator;

/// Pool full-posterior samples from several chains of one method and return
/// the largest per-site total-variation distance to exact enumeration.
///
/// Only iterations that have incorporated every observation are counted;
/// for sequential MH that is the final phase of each replicate.
pub fn engine_site_tv(
    sim: &DiscreteOracle,
    data: &OracleData,
    kernel: &KernelConfig,
    spec: &MethodSpec,
    seeds: impl Iterator<Item = u64>,
) -> f64 {
    let table = enumerate_posterior(sim, data, kernel).expect("enumerable");
    let exact = table.site_marginals();
    let mut acc = MarginalAccumulator::new(sim.horizon(), sim.grid().len());
    let options = EngineOptions::default();
    for seed in seeds {
        run_method_with(sim, data, kernel, spec, seed, &options, |info| {
            if info.incorporated_steps == sim.horizon() {
                let tuple = sim.trace_tuple(info.trace).expect("on-grid params");
                acc.observe(&tuple);
            }
        })
        .expect("chain runs");
    }
    acc.max_tv(&exact).expect("samples observed")
}
