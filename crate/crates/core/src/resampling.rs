//! Percentile bootstrap of a mean across subjects.
//!
//! Replicate `r` draws from its own ChaCha8 stream (`seed`, stream `r`), so
//! the result does not depend on thread count or scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ScauError};

pub const DEFAULT_REPLICATES: usize = 2000;
pub const DEFAULT_LEVEL: f64 = 0.95;
pub const MIN_REPLICATES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub replicates: usize,
    pub seed: u64,
}

impl BootstrapSummary {
    pub fn width(&self) -> f64 {
        self.ci_high - self.ci_low
    }

    pub fn covers(&self, v: f64) -> bool {
        self.ci_low <= v && v <= self.ci_high
    }

    /// True when the interval excludes zero.
    pub fn excludes_zero(&self) -> bool {
        !self.covers(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    #[serde(default = "default_b")]
    pub replicates: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_b() -> usize {
    DEFAULT_REPLICATES
}

fn default_level() -> f64 {
    DEFAULT_LEVEL
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: DEFAULT_REPLICATES,
            level: DEFAULT_LEVEL,
            seed: 0,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates < MIN_REPLICATES {
            return Err(ScauError::config(format!(
                "bootstrap needs at least {MIN_REPLICATES} replicates, got {}",
                self.replicates
            )));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(ScauError::config(format!("confidence level {} outside (0, 1)", self.level)));
        }
        Ok(())
    }
}

/// Generator for replicate `r`.
pub fn replicate_rng(seed: u64, r: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r as u64);
    rng
}

/// Resampling indices for every replicate: `B` rows of `n` draws.
pub fn resample_indices(n: usize, cfg: &BootstrapConfig) -> Vec<Vec<usize>> {
    (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(cfg.seed, r);
            (0..n).map(|_| rng.random_range(0..n)).collect()
        })
        .collect()
}

/// Order statistic at probability `q` with linear interpolation.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let h = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn summarize(values: &[f64], draws: &[Vec<usize>], cfg: &BootstrapConfig) -> BootstrapSummary {
    let n = values.len() as f64;
    let mut stats: Vec<f64> = draws
        .iter()
        .map(|idx| idx.iter().map(|&i| values[i]).sum::<f64>() / n)
        .collect();
    stats.sort_by(f64::total_cmp);
    let alpha = 1.0 - cfg.level;
    let mean = values.iter().sum::<f64>() / n;
    BootstrapSummary {
        mean,
        ci_low: quantile(&stats, alpha / 2.0),
        ci_high: quantile(&stats, 1.0 - alpha / 2.0),
        level: cfg.level,
        replicates: cfg.replicates,
        seed: cfg.seed,
    }
}

/// Bootstrap of the mean of one sample of subject-level values.
pub fn bootstrap_mean(values: &[f64], cfg: &BootstrapConfig) -> Result<BootstrapSummary> {
    Ok(bootstrap_edges(&[values.to_vec()], cfg)?.remove(0))
}

/// Bootstraps several edges at once. `samples[e][s]` is subject `s`'s value
/// for edge `e`; subjects are resampled jointly across edges.
pub fn bootstrap_edges(samples: &[Vec<f64>], cfg: &BootstrapConfig) -> Result<Vec<BootstrapSummary>> {
    cfg.validate()?;
    let n = samples.first().map_or(0, Vec::len);
    if n < 2 {
        return Err(ScauError::data(format!(
            "bootstrap needs at least 2 subjects, got {n}"
        )));
    }
    if samples.iter().any(|s| s.len() != n) {
        return Err(ScauError::data("every edge needs one value per subject"));
    }
    if samples.iter().flatten().any(|v| !v.is_finite()) {
        return Err(ScauError::data("bootstrap input contains non-finite values"));
    }
    let draws = resample_indices(n, cfg);
    Ok(samples.par_iter().map(|s| summarize(s, &draws, cfg)).collect())
}

/// Averages trial-level values within each subject, giving subject-level values.
pub fn subject_means(trials: &[Vec<f64>]) -> Result<Vec<f64>> {
    trials
        .iter()
        .enumerate()
        .map(|(s, t)| {
            if t.is_empty() {
                Err(ScauError::data(format!("subject {s} has no trials")))
            } else {
                Ok(t.iter().sum::<f64>() / t.len() as f64)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn cfg(seed: u64) -> BootstrapConfig {
        BootstrapConfig {
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn constant_sample_has_degenerate_interval() {
        let s = bootstrap_mean(&[3.5; 10], &cfg(1)).unwrap();
        assert_eq!((s.mean, s.ci_low, s.ci_high), (3.5, 3.5, 3.5));
    }

    #[test]
    fn normal_theory_width() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let normal = Normal::new(5.0, 1.0).unwrap();
        let x: Vec<f64> = (0..26).map(|_| normal.sample(&mut rng)).collect();
        let s = bootstrap_mean(&x, &cfg(2)).unwrap();
        let expected = 2.0 * 1.96 / 26f64.sqrt();
        assert!((s.width() - expected).abs() <= 0.25 * expected, "width {}", s.width());
    }

    #[test]
    fn deterministic_and_nested_levels() {
        let x: Vec<f64> = (0..30).map(|i| (i as f64 * 0.7).sin()).collect();
        let a = bootstrap_mean(&x, &cfg(7)).unwrap();
        assert_eq!(a, bootstrap_mean(&x, &cfg(7)).unwrap());
        let wide = bootstrap_mean(&x, &BootstrapConfig { level: 0.99, ..cfg(7) }).unwrap();
        assert!(wide.ci_low <= a.ci_low && wide.ci_high >= a.ci_high);
        assert!(a.ci_low <= a.mean && a.mean <= a.ci_high);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(bootstrap_mean(&[1.0], &cfg(0)).is_err());
        assert!(bootstrap_mean(&[1.0, 2.0], &BootstrapConfig { replicates: 10, ..cfg(0) }).is_err());
        assert!(bootstrap_mean(&[1.0, f64::NAN], &cfg(0)).is_err());
    }

    #[test]
    fn substreams_differ() {
        let a: u64 = replicate_rng(5, 0).random();
        let b: u64 = replicate_rng(5, 1).random();
        assert_ne!(a, b);
    }
}
