#![allow(dead_code)]

use std::collections::HashMap;

use sensorsim::{
    ChainSet, DurationStats, EventLog, Generator, Polarity, RandomSource, SimConfig, StateSpec,
    TransitionMatrix,
};
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub const DAY: u64 = 86_400;

pub fn sensor_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("s{i}")).collect()
}

/// States `s0_ON, s0_OFF, s1_ON, ...`.
pub fn edge_states(n_sensors: usize) -> Vec<(String, String, Polarity)> {
    sensor_names(n_sensors)
        .into_iter()
        .flat_map(|s| {
            [Polarity::On, Polarity::Off]
                .map(|p| (format!("{s}_{p}"), s.clone(), p))
        })
        .collect()
}

pub fn normalize(w: Vec<f64>) -> Vec<f64> {
    let t: f64 = w.iter().sum();
    w.into_iter().map(|x| x / t).collect()
}

/// Random generator over `n_sensors` edge pairs. With `sparse`, about a
/// third of the entries are zero (never a whole row).
pub fn random_generator(
    seed: u64,
    n_sensors: usize,
    period_hours: u32,
    sparse: bool,
    max_mean: f64,
) -> Generator {
    let mut rng = RandomSource::new(seed ^ 0x5eed);
    let states = edge_states(n_sensors);
    let labels: Vec<String> = states.iter().map(|s| s.0.clone()).collect();
    let n = labels.len();
    let n_periods = (24 / period_hours) as usize;
    let chains = (0..n_periods)
        .map(|_| {
            let rows = (0..n)
                .map(|_| {
                    let mut w: Vec<f64> = (0..n)
                        .map(|_| {
                            if sparse && rng.uniform() < 0.33 {
                                0.0
                            } else {
                                0.05 + rng.uniform()
                            }
                        })
                        .collect();
                    if w.iter().all(|&x| x == 0.0) {
                        w[rng.below(n)] = 1.0;
                    }
                    normalize(w)
                })
                .collect();
            TransitionMatrix::new(labels.clone(), rows).unwrap()
        })
        .collect();
    let chains = ChainSet::new(period_hours, chains).unwrap();
    let specs = states
        .into_iter()
        .map(|(label, sensor, polarity)| {
            let mean = 1.0 + rng.uniform() * max_mean;
            let sd = rng.uniform() * mean / 2.0;
            StateSpec {
                label,
                sensor,
                polarity,
                durations: vec![DurationStats::new(mean, sd); n_periods],
            }
        })
        .collect();
    Generator::new(chains, specs).unwrap()
}

/// Alternation, strict monotonicity and range; returns a description of the
/// first broken invariant.
pub fn check_log(log: &EventLog, cfg: &SimConfig) -> Result<(), String> {
    let mut on: HashMap<&str, bool> = HashMap::new();
    let mut prev: Option<u64> = None;
    for (i, e) in log.iter().enumerate() {
        if e.timestamp < cfg.start_time || e.timestamp >= cfg.end_time() {
            return Err(format!("event {i} at {} out of range", e.timestamp));
        }
        if let Some(p) = prev {
            if e.timestamp <= p {
                return Err(format!("event {i} at {} not after {p}", e.timestamp));
            }
        }
        prev = Some(e.timestamp);
        let state = on.entry(e.sensor.as_str()).or_insert(false);
        if *state == e.polarity.is_on() {
            return Err(format!("event {i}: {} repeats {}", e.sensor, e.polarity));
        }
        *state = e.polarity.is_on();
    }
    Ok(())
}

/// Pearson statistic over the cells of one multinomial sample.
pub fn chi_square(observed: &[u64], expected_p: &[f64]) -> f64 {
    let n: u64 = observed.iter().sum();
    observed
        .iter()
        .zip(expected_p)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&o, &p)| {
            let e = p * n as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum()
}

/// Upper critical value of χ²(dof) at significance `alpha`.
pub fn chi_square_critical(dof: f64, alpha: f64) -> f64 {
    ChiSquared::new(dof).unwrap().inverse_cdf(1.0 - alpha)
}
