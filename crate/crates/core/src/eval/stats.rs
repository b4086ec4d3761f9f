use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::seeded_rng;

pub const BOOTSTRAP_RESAMPLES: usize = 1000;
pub const CI_LEVEL: f64 = 0.90;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("no values to summarize")]
    EmptyInput,
    #[error("baseline mean must be positive, got {0}")]
    NonPositiveBaseline(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthStats {
    pub n: usize,
    pub mean_tokens: f64,
    pub mean_chars: f64,
    /// Bounds of the bootstrap interval on `mean_tokens`.
    pub ci90_low: f64,
    pub ci90_high: f64,
}

pub fn mean(values: &[f64]) -> Result<f64, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Percentile bootstrap interval for the mean, clamped to contain the mean.
pub fn bootstrap_ci(
    values: &[f64],
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<(f64, f64), StatsError> {
    let m = mean(values)?;
    let n = values.len();
    let mut rng = seeded_rng(seed);
    let mut means: Vec<f64> = (0..resamples.max(1))
        .map(|_| (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let b = means.len();
    let tail = (1.0 - level) / 2.0;
    let lo_idx = ((b as f64) * tail).floor() as usize;
    let hi_idx = (((b as f64) * (1.0 - tail)).ceil() as usize).clamp(1, b) - 1;
    Ok((means[lo_idx.min(b - 1)].min(m), means[hi_idx].max(m)))
}

/// Token and character means with a seeded 90% bootstrap interval on tokens.
pub fn length_stats(tokens: &[usize], chars: &[usize], seed: u64) -> Result<LengthStats, StatsError> {
    let t: Vec<f64> = tokens.iter().map(|&x| x as f64).collect();
    let c: Vec<f64> = chars.iter().map(|&x| x as f64).collect();
    let mean_tokens = mean(&t)?;
    let mean_chars = if c.is_empty() { 0.0 } else { mean(&c)? };
    let (ci90_low, ci90_high) = bootstrap_ci(&t, BOOTSTRAP_RESAMPLES, CI_LEVEL, seed)?;
    Ok(LengthStats {
        n: tokens.len(),
        mean_tokens,
        mean_chars,
        ci90_low,
        ci90_high,
    })
}

/// Relative shrinkage of mean length: `1 - after / before`.
pub fn collapse_ratio(mean_before: f64, mean_after: f64) -> Result<f64, StatsError> {
    if mean_before.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(StatsError::NonPositiveBaseline(mean_before));
    }
    Ok(1.0 - mean_after / mean_before)
}
