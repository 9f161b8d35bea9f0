//! Small statistical utilities shared by the experiment harness and the
//! verification suites: total-variation distance, empirical site marginals,
//! a Kolmogorov-Smirnov uniformity test, and quantiles.

use crate::error::{Error, Result};

/// Total-variation distance between two distributions on the same support:
/// `0.5 * sum |p_i - q_i|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    0.5 * p
        .iter()
        .zip(q)
        .map(|(&a, &b)| (a - b).abs())
        .sum::<f64>()
}

/// Accumulates per-site atom counts for traces over a discrete grid and
/// turns them into empirical marginal distributions.
#[derive(Debug, Clone)]
pub struct MarginalAccumulator {
    counts: Vec<Vec<u64>>,
    total: u64,
}

impl MarginalAccumulator {
    pub fn new(sites: usize, atoms: usize) -> Self {
        Self {
            counts: vec![vec![0; atoms]; sites],
            total: 0,
        }
    }

    /// Record one sample: the grid atom chosen at every site.
    pub fn observe(&mut self, tuple: &[usize]) {
        debug_assert_eq!(tuple.len(), self.counts.len());
        for (site, &atom) in tuple.iter().enumerate() {
            self.counts[site][atom] += 1;
        }
        self.total += 1;
    }

    pub fn merge(&mut self, other: &MarginalAccumulator) {
        debug_assert_eq!(self.counts.len(), other.counts.len());
        for (mine, theirs) in self.counts.iter_mut().zip(&other.counts) {
            for (m, t) in mine.iter_mut().zip(theirs) {
                *m += t;
            }
        }
        self.total += other.total;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Empirical marginal distribution per site.
    pub fn marginals(&self) -> Result<Vec<Vec<f64>>> {
        if self.total == 0 {
            return Err(Error::Precondition(
                "no samples observed; cannot form marginals".into(),
            ));
        }
        Ok(self
            .counts
            .iter()
            .map(|site| {
                site.iter()
                    .map(|&c| c as f64 / self.total as f64)
                    .collect()
            })
            .collect())
    }

    /// Largest per-site total-variation distance to reference marginals.
    pub fn max_tv(&self, reference: &[Vec<f64>]) -> Result<f64> {
        let marginals = self.marginals()?;
        Ok(marginals
            .iter()
            .zip(reference)
            .map(|(emp, exact)| total_variation(emp, exact))
            .fold(0.0, f64::max))
    }
}

/// Kolmogorov-Smirnov statistic of a sample against the uniform
/// distribution on `[0, 1]`. Sorts in place.
pub fn ks_statistic_uniform(samples: &mut [f64]) -> f64 {
    assert!(!samples.is_empty());
    samples.sort_by(|a, b| a.partial_cmp(b).expect("no NaN samples"));
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let hi = (i + 1) as f64 / n - x;
        let lo = x - i as f64 / n;
        d = d.max(hi).max(lo);
    }
    d
}

/// Critical value for the one-sample KS test at significance `alpha`, using
/// the asymptotic approximation `c(alpha) / (sqrt(n) + 0.12 + 0.11/sqrt(n))`
/// with `c(alpha) = sqrt(-ln(alpha / 2) / 2)`.
pub fn ks_critical_value(alpha: f64, n: usize) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    let sqrt_n = (n as f64).sqrt();
    c / (sqrt_n + 0.12 + 0.11 / sqrt_n)
}

/// Linear-interpolation quantile of pre-sorted values, `q` in `[0, 1]`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = pos - lo as f64;
        sorted[lo] + w * (sorted[hi] - sorted[lo])
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN values"));
    quantile_sorted(&sorted, 0.5)
}

/// `(q1, median, q3)` of the values.
pub fn quartiles(values: &[f64]) -> (f64, f64, f64) {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN values"));
    (
        quantile_sorted(&sorted, 0.25),
        quantile_sorted(&sorted, 0.5),
        quantile_sorted(&sorted, 0.75),
    )
}
