//! Dwell-time statistics: normal sampling, empirical estimation and the
//! outlier fence used by duration anomalies.

use crate::rng::RandomSource;

/// Upper-quartile point of the standard normal, Φ⁻¹(0.75).
pub const Z_75: f64 = 0.674_489_750_196_081_7;

/// Distance from the mean to the 3·IQR fence of a normal, in units of sd:
/// `z₀.₇₅ + 3·(2·z₀.₇₅) = 7·z₀.₇₅`.
pub const FENCE_SD_MULTIPLE: f64 = 7.0 * Z_75;

const MAX_REDRAWS: usize = 10;

/// Mean and standard deviation of a holding time, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DurationStats {
    pub mean_s: f64,
    pub sd_s: f64,
    /// Number of observations behind the estimate; 0 for user-supplied stats.
    pub sample_count: usize,
}

impl DurationStats {
    pub fn new(mean_s: f64, sd_s: f64) -> Self {
        Self {
            mean_s,
            sd_s,
            sample_count: 0,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.mean_s.is_finite() && self.sd_s.is_finite() && self.mean_s >= 0.0 && self.sd_s >= 0.0
    }

    pub fn with_mean(self, mean_s: f64) -> Self {
        Self { mean_s, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Long,
    Short,
}

/// Draws a whole-second duration from `N(mean, sd)`. Draws below one second
/// are retried up to ten times, after which the result is clamped to 1.
pub fn sample_duration(stats: &DurationStats, rng: &mut RandomSource) -> u64 {
    for _ in 0..=MAX_REDRAWS {
        let x = stats.mean_s + stats.sd_s * rng.standard_normal();
        if x >= 1.0 {
            return x.round() as u64;
        }
    }
    1
}

/// Mean moved to the 3·IQR outlier fence of the fitted normal: `Q3 + 3·IQR`
/// for [`Direction::Long`], `max(Q1 − 3·IQR, 1)` for [`Direction::Short`].
pub fn outlier_mean(stats: &DurationStats, direction: Direction) -> f64 {
    let shift = FENCE_SD_MULTIPLE * stats.sd_s;
    match direction {
        Direction::Long => stats.mean_s + shift,
        Direction::Short => (stats.mean_s - shift).max(1.0),
    }
}

/// Sample mean and (n − 1) standard deviation. Fewer than two samples give
/// `sd_s = 0`; no samples give all zeros.
pub fn empirical_stats(samples: &[f64]) -> DurationStats {
    let n = samples.len();
    if n == 0 {
        return DurationStats {
            mean_s: 0.0,
            sd_s: 0.0,
            sample_count: 0,
        };
    }
    if samples.iter().all(|&x| x == samples[0]) {
        return DurationStats {
            mean_s: samples[0],
            sd_s: 0.0,
            sample_count: n,
        };
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let sd = if n < 2 {
        0.0
    } else {
        let ss: f64 = samples.iter().map(|x| (x - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    };
    DurationStats {
        mean_s: mean,
        sd_s: sd,
        sample_count: n,
    }
}
