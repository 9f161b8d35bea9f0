//! Distance-based likelihood: exponential kernel over per-well distances.
//!
//! Each conditioned step contributes a Bernoulli factor with success
//! probability `k_gamma(o_t, r) = exp(-gamma * ||o_t - r_t||)`, independent
//! across wells. The flag is always observed `true`, so a step's contribution
//! to the trace log-score is `-gamma * sum_l d_l`. All arithmetic stays in
//! the log domain; high-dimensional runs would underflow otherwise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::Trace;

/// Which norm turns a segment of per-sample differences into one per-well
/// distance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    /// Square root of the sum of squared differences.
    #[default]
    Euclidean,
    /// Sum of absolute differences. Grows linearly with segment length, so
    /// per-step evidence stays decisive on long segments; the lobe
    /// experiments run with this norm.
    AbsoluteSum,
}

/// Kernel bandwidth and norm choice.
///
/// `gamma = 0` turns every factor into exactly 1 and is allowed so prior
/// recovery can be tested; inference runs use `gamma > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    gamma: f64,
    norm: Norm,
}

impl KernelConfig {
    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::InvalidBandwidth(gamma));
        }
        Ok(Self {
            gamma,
            norm: Norm::Euclidean,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }
}

fn check_distance(distance: f64) -> Result<f64> {
    if !distance.is_finite() || distance < 0.0 {
        return Err(Error::InvalidDistance(distance));
    }
    Ok(distance)
}

/// `k_gamma(d) = exp(-gamma * d)`, in `[0, 1]`.
pub fn kernel_eval(distance: f64, kernel: &KernelConfig) -> Result<f64> {
    Ok(log_kernel(distance, kernel)?.exp())
}

/// `log k_gamma(d) = -gamma * d`, evaluated directly in the log domain.
pub fn log_kernel(distance: f64, kernel: &KernelConfig) -> Result<f64> {
    let d = check_distance(distance)?;
    Ok(-kernel.gamma * d)
}

/// Log-likelihood of one conditioned step: the per-well factors are
/// independent, so the product of kernels becomes `-gamma * sum_l d_l`.
pub fn step_log_likelihood(per_well_distances: &[f64], kernel: &KernelConfig) -> Result<f64> {
    let mut sum = 0.0;
    for &d in per_well_distances {
        sum += check_distance(d)?;
    }
    Ok(-kernel.gamma * sum)
}

/// Total log-score of a coherent trace: the sum of its per-step
/// log-likelihoods. Fails if the trace has a stale suffix.
pub fn trace_log_score<S, E>(trace: &Trace<S, E>) -> Result<f64> {
    trace.log_score()
}

/// The Bernoulli observation `d_t` attached to step `t`. Inversion always
/// conditions on `true`; the `false` branch exists only for completeness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObservationFlag {
    pub step: usize,
    pub value: bool,
}

impl ObservationFlag {
    /// The conditioned observation used throughout inversion: `d_t = true`.
    pub fn conditioned(step: usize) -> Self {
        Self { step, value: true }
    }

    /// Log-probability of this flag given the step's per-well distances.
    pub fn log_likelihood(
        &self,
        per_well_distances: &[f64],
        kernel: &KernelConfig,
    ) -> Result<f64> {
        let log_k = step_log_likelihood(per_well_distances, kernel)?;
        if self.value {
            Ok(log_k)
        } else {
            Ok(log1m_exp(log_k))
        }
    }
}

/// `ln(1 - exp(x))` for `x <= 0`, numerically stable on both branches.
fn log1m_exp(x: f64) -> f64 {
    debug_assert!(x <= 0.0);
    if x == 0.0 {
        f64::NEG_INFINITY
    } else if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_at_zero_distance_is_one() {
        let k = KernelConfig::new(3.7).unwrap();
        assert_eq!(kernel_eval(0.0, &k).unwrap(), 1.0);
    }

    #[test]
    fn kernel_matches_direct_formula() {
        let k = KernelConfig::new(1.0).unwrap();
        let v = kernel_eval(1.0, &k).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        assert!((v - 0.367_879_441_171_442_33).abs() < 1e-12);
    }

    #[test]
    fn zero_bandwidth_gives_unit_kernel() {
        let k = KernelConfig::new(0.0).unwrap();
        assert_eq!(kernel_eval(7.3, &k).unwrap(), 1.0);
    }

    #[test]
    fn negative_distance_rejected() {
        let k = KernelConfig::new(1.0).unwrap();
        assert!(matches!(
            kernel_eval(-0.1, &k),
            Err(Error::InvalidDistance(_))
        ));
        assert!(matches!(
            step_log_likelihood(&[0.2, -0.3], &k),
            Err(Error::InvalidDistance(_))
        ));
    }

    #[test]
    fn negative_bandwidth_rejected() {
        assert!(matches!(
            KernelConfig::new(-1.0),
            Err(Error::InvalidBandwidth(_))
        ));
        assert!(KernelConfig::new(f64::NAN).is_err());
        assert!(KernelConfig::new(f64::INFINITY).is_err());
    }

    #[test]
    fn step_aggregation_sums_distances() {
        let k1 = KernelConfig::new(1.0).unwrap();
        assert!((step_log_likelihood(&[0.5, 0.25], &k1).unwrap() + 0.75).abs() < 1e-15);

        let zeros = [0.0; 7];
        assert_eq!(step_log_likelihood(&zeros, &k1).unwrap(), 0.0);

        let k2 = KernelConfig::new(2.0).unwrap();
        assert!((step_log_likelihood(&[1.0], &k2).unwrap() + 2.0).abs() < 1e-15);
    }

    #[test]
    fn kernel_monotone_in_distance() {
        let k = KernelConfig::new(2.5).unwrap();
        let mut last = f64::INFINITY;
        for i in 0..50 {
            let v = kernel_eval(i as f64 * 0.1, &k).unwrap();
            assert!(v <= last);
            assert!((0.0..=1.0).contains(&v));
            last = v;
        }
    }

    #[test]
    fn observation_flag_branches() {
        let k = KernelConfig::new(1.0).unwrap();
        let flag = ObservationFlag::conditioned(3);
        assert!(flag.value);
        let ll = flag.log_likelihood(&[0.5], &k).unwrap();
        assert!((ll + 0.5).abs() < 1e-15);

        let negated = ObservationFlag {
            step: 3,
            value: false,
        };
        let lf = negated.log_likelihood(&[0.5], &k).unwrap();
        let expect = (1.0 - (-0.5f64).exp()).ln();
        assert!((lf - expect).abs() < 1e-12);

        // A perfect match makes the `false` branch impossible.
        assert_eq!(
            negated.log_likelihood(&[0.0], &k).unwrap(),
            f64::NEG_INFINITY
        );
    }
}
