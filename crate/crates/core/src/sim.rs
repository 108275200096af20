//! The simulation loop: walk the period-appropriate chain from a start time,
//! reject edges that contradict the current sensor state, apply anomaly
//! windows, and advance the clock by each event's holding time.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::duration::{outlier_mean, sample_duration, Direction};
use crate::event::{Event, EventLog, Polarity};
use crate::generator::Generator;
use crate::markov::{pick_weighted, SECONDS_PER_DAY};
use crate::rng::RandomSource;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("days must be at least 1")]
    ZeroDays,
    #[error("stall tick must be at least 1 second")]
    ZeroStallTick,
    #[error("anomaly window must have start < end (got {start}..{end})")]
    EmptyWindow { start: u64, end: u64 },
    #[error("need at least 2 periods to pick an anomalous one, got {0}")]
    TooFewPeriods(usize),
    #[error("unknown sensor {0:?}")]
    UnknownSensor(String),
    #[error("unknown anomaly kind {0:?}")]
    UnknownKind(String),
}

/// What an anomaly window perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnomalyKind {
    /// Follow the chain of a different period of the day.
    Activity,
    /// Move holding-time means to the upper outlier fence.
    DurationLong,
    /// Move holding-time means to the lower outlier fence.
    DurationShort,
    /// `Activity` together with `DurationLong`.
    Both,
}

impl AnomalyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AnomalyKind::Activity => "activity",
            AnomalyKind::DurationLong => "duration_long",
            AnomalyKind::DurationShort => "duration_short",
            AnomalyKind::Both => "both",
        }
    }

    pub fn swaps_chain(self) -> bool {
        matches!(self, AnomalyKind::Activity | AnomalyKind::Both)
    }

    pub fn duration_shift(self) -> Option<Direction> {
        match self {
            AnomalyKind::Activity => None,
            AnomalyKind::DurationLong | AnomalyKind::Both => Some(Direction::Long),
            AnomalyKind::DurationShort => Some(Direction::Short),
        }
    }
}

impl fmt::Display for AnomalyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AnomalyKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "activity" => Ok(AnomalyKind::Activity),
            "duration_long" => Ok(AnomalyKind::DurationLong),
            "duration_short" => Ok(AnomalyKind::DurationShort),
            "both" => Ok(AnomalyKind::Both),
            other => Err(SimError::UnknownKind(other.to_string())),
        }
    }
}

/// An anomaly active over the closed window `[window_start, window_end]`
/// (UTC seconds).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnomalySpec {
    window_start: u64,
    window_end: u64,
    kind: AnomalyKind,
}

impl AnomalySpec {
    pub fn new(window_start: u64, window_end: u64, kind: AnomalyKind) -> Result<Self, SimError> {
        if window_start >= window_end {
            return Err(SimError::EmptyWindow {
                start: window_start,
                end: window_end,
            });
        }
        Ok(Self {
            window_start,
            window_end,
            kind,
        })
    }

    pub fn window_start(&self) -> u64 {
        self.window_start
    }

    pub fn window_end(&self) -> u64 {
        self.window_end
    }

    pub fn kind(&self) -> AnomalyKind {
        self.kind
    }

    pub fn contains(&self, t: u64) -> bool {
        self.window_start <= t && t <= self.window_end
    }
}

/// ON/OFF state of every sensor of a generator. All sensors start OFF.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensorState {
    names: Vec<String>,
    on: Vec<bool>,
}

impl SensorState {
    pub fn new(sensors: &[String]) -> Self {
        Self {
            names: sensors.to_vec(),
            on: vec![false; sensors.len()],
        }
    }

    pub fn is_on(&self, sensor: &str) -> Option<bool> {
        self.position(sensor).map(|i| self.on[i])
    }

    pub fn set(&mut self, sensor: &str, polarity: Polarity) -> Result<(), SimError> {
        let i = self
            .position(sensor)
            .ok_or_else(|| SimError::UnknownSensor(sensor.to_string()))?;
        self.on[i] = polarity.is_on();
        Ok(())
    }

    fn position(&self, sensor: &str) -> Option<usize> {
        self.names.iter().position(|s| s == sensor)
    }

    fn accepts(&self, sensor: usize, polarity: Polarity) -> bool {
        self.on[sensor] != polarity.is_on()
    }
}

/// An ON edge is valid only for a sensor that is OFF, and vice versa.
pub fn is_valid_event(state: &SensorState, sensor: &str, polarity: Polarity) -> Result<bool, SimError> {
    let i = state
        .position(sensor)
        .ok_or_else(|| SimError::UnknownSensor(sensor.to_string()))?;
    Ok(state.accepts(i, polarity))
}

/// The window containing `t`; among overlapping windows the earliest start
/// wins, then the earliest in input order.
pub fn active_anomaly(anomalies: &[AnomalySpec], t: u64) -> Option<&AnomalySpec> {
    active_anomaly_index(anomalies, t).map(|i| &anomalies[i])
}

fn active_anomaly_index(anomalies: &[AnomalySpec], t: u64) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, a) in anomalies.iter().enumerate() {
        if a.contains(t) && best.is_none_or(|b| a.window_start < anomalies[b].window_start) {
            best = Some(i);
        }
    }
    best
}

/// Uniform draw over every period except `true_period`.
pub fn anomalous_period(
    true_period: usize,
    n_periods: usize,
    rng: &mut RandomSource,
) -> Result<usize, SimError> {
    if n_periods < 2 {
        return Err(SimError::TooFewPeriods(n_periods));
    }
    let r = rng.below(n_periods - 1);
    Ok(if r >= true_period { r + 1 } else { r })
}

/// Midnight, 1 January 1970 UTC.
pub const DEFAULT_START: u64 = 0;
pub const DEFAULT_MAX_REJECTIONS: u32 = 32;
pub const DEFAULT_STALL_TICK: u64 = 60;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimConfig {
    /// UTC seconds.
    pub start_time: u64,
    pub days: u32,
    pub seed: u64,
    pub anomalies: Vec<AnomalySpec>,
    /// Consecutive invalid candidates tolerated before the clock stalls.
    pub max_rejections: u32,
    /// Seconds the clock advances when no valid candidate is found.
    pub stall_tick: u64,
}

impl SimConfig {
    pub fn new(days: u32, seed: u64) -> Self {
        Self {
            start_time: DEFAULT_START,
            days,
            seed,
            anomalies: Vec::new(),
            max_rejections: DEFAULT_MAX_REJECTIONS,
            stall_tick: DEFAULT_STALL_TICK,
        }
    }

    pub fn with_start(mut self, start_time: u64) -> Self {
        self.start_time = start_time;
        self
    }

    pub fn with_anomalies(mut self, anomalies: Vec<AnomalySpec>) -> Self {
        self.anomalies = anomalies;
        self
    }

    pub fn end_time(&self) -> u64 {
        self.start_time + u64::from(self.days) * SECONDS_PER_DAY
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.days == 0 {
            return Err(SimError::ZeroDays);
        }
        if self.stall_tick == 0 {
            return Err(SimError::ZeroStallTick);
        }
        for a in &self.anomalies {
            if a.window_start >= a.window_end {
                return Err(SimError::EmptyWindow {
                    start: a.window_start,
                    end: a.window_end,
                });
            }
        }
        Ok(())
    }
}

/// Runs the generator from `cfg.start_time` for `cfg.days` days.
///
/// The walk starts, without emitting, in the first OFF state in chain order
/// (the first state if there is none), with every sensor OFF. At each step the chain for the current period (or the
/// window's substitute period under an activity anomaly) proposes a
/// successor; candidates that repeat a sensor's current polarity are zeroed
/// out of the row and the draw repeats on what is left. When nothing valid
/// remains, or after `max_rejections` failures, the clock moves forward by
/// `stall_tick` without emitting. Accepted events hold the clock for a
/// duration drawn from the state's stats for the true period, with the mean
/// moved to the outlier fence under a duration anomaly.
pub fn simulate(gen: &Generator, cfg: &SimConfig) -> Result<EventLog, SimError> {
    cfg.validate()?;
    let mut rng = RandomSource::new(cfg.seed);
    let chains = gen.chains();
    let n_periods = chains.n_periods();
    let sensors = gen.sensors();
    let specs = gen.specs();

    let mut state = SensorState::new(sensors);
    let mut current = specs.iter().position(|s| !s.polarity.is_on()).unwrap_or(0);
    let mut t = cfg.start_time;
    let t_end = cfg.end_time();
    // (anomaly index, true period) -> substitute period
    let mut substitutes: HashMap<(usize, usize), usize> = HashMap::new();
    let mut weights: Vec<f64> = Vec::with_capacity(gen.states().len());
    let mut events = Vec::new();

    while t < t_end {
        let true_period = chains.period_at(t);
        let anomaly = active_anomaly_index(&cfg.anomalies, t);
        let kind = anomaly.map(|i| cfg.anomalies[i].kind);

        let period = match (anomaly, kind) {
            (Some(i), Some(k)) if k.swaps_chain() && n_periods >= 2 => {
                match substitutes.get(&(i, true_period)) {
                    Some(&p) => p,
                    None => {
                        let p = anomalous_period(true_period, n_periods, &mut rng)?;
                        substitutes.insert((i, true_period), p);
                        p
                    }
                }
            }
            _ => true_period,
        };

        weights.clear();
        weights.extend_from_slice(chains.chain(period).row(current));
        let mut rejections = 0u32;
        let accepted = loop {
            let Some(candidate) = pick_weighted(&weights, rng.uniform()) else {
                break None;
            };
            let spec = &specs[candidate];
            if state.accepts(gen.sensor_of(candidate), spec.polarity) {
                break Some(candidate);
            }
            rejections += 1;
            if rejections >= cfg.max_rejections {
                break None;
            }
            weights[candidate] = 0.0;
        };

        let Some(next) = accepted else {
            t += cfg.stall_tick;
            continue;
        };

        let spec = &specs[next];
        events.push(Event {
            timestamp: t,
            sensor: spec.sensor.clone(),
            polarity: spec.polarity,
        });
        state.on[gen.sensor_of(next)] = spec.polarity.is_on();
        current = next;

        let mut stats = *gen.duration(next, true_period);
        if let Some(direction) = kind.and_then(AnomalyKind::duration_shift) {
            stats = stats.with_mean(outlier_mean(&stats, direction));
        }
        t += sample_duration(&stats, &mut rng);
    }

    Ok(EventLog::from_sorted(events))
}
