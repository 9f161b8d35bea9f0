//! Weight normalization, resampling, and degeneracy diagnostics for the
//! particle methods.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which resampling scheme conditional SMC uses for free-particle ancestors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleScheme {
    #[default]
    Multinomial,
    Systematic,
}

/// Normalize log-weights into probabilities via max-subtraction. Fails if no
/// weight is finite.
pub fn normalized_weights(log_weights: &[f64]) -> Result<Vec<f64>> {
    if log_weights.is_empty() {
        return Err(Error::DegenerateWeights);
    }
    let max = log_weights
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::DegenerateWeights);
    }
    let mut weights: Vec<f64> = log_weights.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    Ok(weights)
}

fn cumulative(weights: &[f64]) -> (Vec<f64>, usize) {
    let mut cum = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        cum.push(acc);
        if w > 0.0 {
            last_nonzero = i;
        }
    }
    (cum, last_nonzero)
}

fn pick(cum: &[f64], last_nonzero: usize, u: f64) -> usize {
    // `<=` skips zero-weight atoms at the left edge; the clamp catches
    // floating shortfall at the right edge.
    let idx = cum.partition_point(|&c| c <= u);
    idx.min(last_nonzero)
}

/// Draw `count` ancestor indices independently, each with probability
/// proportional to the normalized weights.
pub fn multinomial_resample(
    log_weights: &[f64],
    count: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<usize>> {
    let weights = normalized_weights(log_weights)?;
    let (cum, last_nonzero) = cumulative(&weights);
    Ok((0..count)
        .map(|_| pick(&cum, last_nonzero, rng.gen::<f64>()))
        .collect())
}

/// Stratified systematic resampling: one uniform offset, `count` evenly
/// spaced positions.
pub fn systematic_resample(
    log_weights: &[f64],
    count: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<usize>> {
    let weights = normalized_weights(log_weights)?;
    let (cum, last_nonzero) = cumulative(&weights);
    if count == 0 {
        return Ok(Vec::new());
    }
    let offset = rng.gen::<f64>() / count as f64;
    Ok((0..count)
        .map(|j| pick(&cum, last_nonzero, offset + j as f64 / count as f64))
        .collect())
}

pub fn resample(
    scheme: ResampleScheme,
    log_weights: &[f64],
    count: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<usize>> {
    match scheme {
        ResampleScheme::Multinomial => multinomial_resample(log_weights, count, rng),
        ResampleScheme::Systematic => systematic_resample(log_weights, count, rng),
    }
}

/// Effective sample size `(sum w)^2 / sum w^2` of a weighted population,
/// in `[1, P]`.
pub fn effective_sample_size(log_weights: &[f64]) -> Result<f64> {
    let weights = normalized_weights(log_weights)?;
    let sum_sq: f64 = weights.iter().map(|&w| w * w).sum();
    Ok((1.0 / sum_sq).clamp(1.0, weights.len() as f64))
}
