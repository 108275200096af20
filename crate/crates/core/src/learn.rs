//! Estimating a [`Generator`] from a sample event log.
//!
//! Every consecutive pair of events `(eᵢ, eᵢ₊₁)` contributes one transition
//! `state(eᵢ) → state(eᵢ₊₁)` and one holding time `t(eᵢ₊₁) − t(eᵢ)`, both
//! credited to the period containing `eᵢ`. States are `<sensor>_<polarity>`
//! labels in order of first appearance.

use std::collections::HashMap;

use thiserror::Error;

use crate::duration::{empirical_stats, DurationStats};
use crate::event::{state_label, EventLog, Polarity};
use crate::generator::{Generator, GeneratorError, StateSpec};
use crate::markov::{check_period_hours, ChainSet, MarkovError, TransitionMatrix, SECONDS_PER_DAY};

/// Holding time assigned to states seen fewer than twice in the whole log.
pub const FALLBACK_DURATION: DurationStats = DurationStats {
    mean_s: 60.0,
    sd_s: 0.0,
    sample_count: 0,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnError {
    #[error("interval of {0} hours does not divide the day")]
    BadInterval(u32),
    #[error("need at least 2 events to learn from, got {0}")]
    LogTooShort(usize),
    #[error(transparent)]
    Markov(#[from] MarkovError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
}

/// Raw per-period transition counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionCounts {
    pub period_hours: u32,
    pub states: Vec<String>,
    /// `counts[period][from][to]`.
    pub counts: Vec<Vec<Vec<u64>>>,
}

impl TransitionCounts {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().flatten().sum()
    }

    pub fn get(&self, period: usize, from: &str, to: &str) -> Option<u64> {
        let i = self.states.iter().position(|s| s == from)?;
        let j = self.states.iter().position(|s| s == to)?;
        Some(self.counts[period][i][j])
    }
}

struct Indexed {
    states: Vec<String>,
    meta: Vec<(String, Polarity)>,
    /// State index of each event.
    seq: Vec<usize>,
}

fn index_states(log: &EventLog) -> Indexed {
    let mut lookup: HashMap<(&str, Polarity), usize> = HashMap::new();
    let mut states = Vec::new();
    let mut meta = Vec::new();
    let seq = log
        .iter()
        .map(|e| {
            *lookup.entry((e.sensor.as_str(), e.polarity)).or_insert_with(|| {
                states.push(state_label(&e.sensor, e.polarity));
                meta.push((e.sensor.clone(), e.polarity));
                states.len() - 1
            })
        })
        .collect();
    Indexed { states, meta, seq }
}

fn check(log: &EventLog, interval_hours: u32) -> Result<(), LearnError> {
    check_period_hours(interval_hours).map_err(|_| LearnError::BadInterval(interval_hours))?;
    if log.len() < 2 {
        return Err(LearnError::LogTooShort(log.len()));
    }
    Ok(())
}

fn period_of(timestamp: u64, interval_hours: u32) -> usize {
    (timestamp % SECONDS_PER_DAY / (3600 * u64::from(interval_hours))) as usize
}

fn count(log: &EventLog, idx: &Indexed, interval_hours: u32) -> Vec<Vec<Vec<u64>>> {
    let n_periods = (24 / interval_hours) as usize;
    let n = idx.states.len();
    let mut counts = vec![vec![vec![0u64; n]; n]; n_periods];
    let events = log.events();
    for i in 0..events.len() - 1 {
        let p = period_of(events[i].timestamp, interval_hours);
        counts[p][idx.seq[i]][idx.seq[i + 1]] += 1;
    }
    counts
}

/// Per-period transition counts; the total is always `log.len() − 1`.
pub fn transition_counts(log: &EventLog, interval_hours: u32) -> Result<TransitionCounts, LearnError> {
    check(log, interval_hours)?;
    let idx = index_states(log);
    let counts = count(log, &idx, interval_hours);
    Ok(TransitionCounts {
        period_hours: interval_hours,
        states: idx.states,
        counts,
    })
}

/// Learns `24 / interval_hours` chains and per-period holding-time stats.
///
/// Rows with no observed transitions become uniform. Holding stats for a
/// (state, period) with fewer than two samples fall back to the state's
/// all-period stats, and to [`FALLBACK_DURATION`] when the state has fewer
/// than two samples overall. The last event contributes nothing.
pub fn learn_generator(log: &EventLog, interval_hours: u32) -> Result<Generator, LearnError> {
    check(log, interval_hours)?;
    let idx = index_states(log);
    let counts = count(log, &idx, interval_hours);
    let n = idx.states.len();
    let n_periods = counts.len();

    let chains = counts
        .iter()
        .map(|period| {
            let rows = period
                .iter()
                .map(|row| {
                    let total: u64 = row.iter().sum();
                    if total == 0 {
                        vec![1.0 / n as f64; n]
                    } else {
                        row.iter().map(|&c| c as f64 / total as f64).collect()
                    }
                })
                .collect();
            TransitionMatrix::new(idx.states.clone(), rows)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let chains = ChainSet::new(interval_hours, chains)?;

    let mut holding: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); n_periods]; n];
    let events = log.events();
    for i in 0..events.len() - 1 {
        let p = period_of(events[i].timestamp, interval_hours);
        let gap = (events[i + 1].timestamp - events[i].timestamp) as f64;
        holding[idx.seq[i]][p].push(gap);
    }

    let specs = holding
        .iter()
        .zip(idx.meta)
        .zip(&idx.states)
        .map(|((per_period, (sensor, polarity)), label)| {
            let all: Vec<f64> = per_period.iter().flatten().copied().collect();
            let overall = if all.len() >= 2 {
                empirical_stats(&all)
            } else {
                DurationStats {
                    sample_count: all.len(),
                    ..FALLBACK_DURATION
                }
            };
            let durations = per_period
                .iter()
                .map(|samples| {
                    if samples.len() >= 2 {
                        empirical_stats(samples)
                    } else {
                        overall
                    }
                })
                .collect();
            StateSpec {
                label: label.clone(),
                sensor,
                polarity,
                durations,
            }
        })
        .collect();

    Ok(Generator::new(chains, specs)?)
}
