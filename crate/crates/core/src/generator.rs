//! Behavioral model consumed by the simulator, and its construction from
//! four hand-written period matrices plus an activities table.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::duration::DurationStats;
use crate::event::Polarity;
use crate::markov::{ChainSet, MarkovError, TransitionMatrix};

/// Period names of the four-matrix layout, in clock order (6-hour periods).
pub const NAMED_PERIODS: [&str; 4] = ["night", "morning", "afternoon", "evening"];
pub const NAMED_PERIOD_HOURS: u32 = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    #[error("{period} matrix: {source}")]
    Matrix {
        period: String,
        #[source]
        source: MarkovError,
    },
    #[error(transparent)]
    Chains(#[from] MarkovError),
    #[error("state {state:?} appears in the {period} matrix but not in the {reference} matrix")]
    StateSetMismatch {
        state: String,
        period: String,
        reference: String,
    },
    #[error("no activity record for state {0:?}")]
    MissingSpec(String),
    #[error("duplicate activity {0:?}")]
    DuplicateActivity(String),
    #[error("activity {0:?} has an empty sensor name")]
    EmptySensor(String),
    #[error("activity {0:?} has invalid duration statistics")]
    InvalidDuration(String),
    #[error("spec {index} is for {found:?} but the chain state is {expected:?}")]
    SpecOrder {
        index: usize,
        expected: String,
        found: String,
    },
    #[error("state {state:?} has {found} duration entries, expected one per period ({expected})")]
    DurationPeriods {
        state: String,
        expected: usize,
        found: usize,
    },
}

/// One row of the activities table.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityRecord {
    pub activity: String,
    pub polarity: Polarity,
    pub sensor: String,
    pub duration: DurationStats,
}

/// What a chain state means: which sensor edge it emits and how long the
/// clock holds after emitting it, per period.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpec {
    pub label: String,
    pub sensor: String,
    pub polarity: Polarity,
    pub durations: Vec<DurationStats>,
}

/// Period-indexed chains plus one [`StateSpec`] per chain state.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    chains: ChainSet,
    specs: Vec<StateSpec>,
    sensors: Vec<String>,
    spec_sensor: Vec<usize>,
}

impl Generator {
    /// `specs[i]` must describe `chains.states()[i]` and carry one
    /// [`DurationStats`] per period.
    pub fn new(chains: ChainSet, specs: Vec<StateSpec>) -> Result<Self, GeneratorError> {
        let states = chains.states();
        let n_periods = chains.n_periods();
        if specs.len() != states.len() {
            let covered: HashSet<&str> = specs.iter().map(|s| s.label.as_str()).collect();
            let missing = states
                .iter()
                .find(|s| !covered.contains(s.as_str()))
                .cloned()
                .unwrap_or_default();
            return Err(GeneratorError::MissingSpec(missing));
        }
        for (index, (spec, state)) in specs.iter().zip(states).enumerate() {
            if &spec.label != state {
                return Err(GeneratorError::SpecOrder {
                    index,
                    expected: state.clone(),
                    found: spec.label.clone(),
                });
            }
            if spec.sensor.is_empty() {
                return Err(GeneratorError::EmptySensor(spec.label.clone()));
            }
            if spec.durations.len() != n_periods {
                return Err(GeneratorError::DurationPeriods {
                    state: spec.label.clone(),
                    expected: n_periods,
                    found: spec.durations.len(),
                });
            }
            if !spec.durations.iter().all(DurationStats::is_valid) {
                return Err(GeneratorError::InvalidDuration(spec.label.clone()));
            }
        }

        let mut sensors: Vec<String> = Vec::new();
        let mut spec_sensor = Vec::with_capacity(specs.len());
        for spec in &specs {
            let idx = match sensors.iter().position(|s| s == &spec.sensor) {
                Some(i) => i,
                None => {
                    sensors.push(spec.sensor.clone());
                    sensors.len() - 1
                }
            };
            spec_sensor.push(idx);
        }

        Ok(Self {
            chains,
            specs,
            sensors,
            spec_sensor,
        })
    }

    pub fn chains(&self) -> &ChainSet {
        &self.chains
    }

    pub fn states(&self) -> &[String] {
        self.chains.states()
    }

    pub fn specs(&self) -> &[StateSpec] {
        &self.specs
    }

    pub fn spec(&self, label: &str) -> Option<&StateSpec> {
        self.specs.iter().find(|s| s.label == label)
    }

    /// Sensor names in order of first appearance in the state list.
    pub fn sensors(&self) -> &[String] {
        &self.sensors
    }

    pub fn n_periods(&self) -> usize {
        self.chains.n_periods()
    }

    pub fn period_hours(&self) -> u32 {
        self.chains.period_hours()
    }

    /// Index into [`sensors`](Self::sensors) for state `state`.
    pub fn sensor_of(&self, state: usize) -> usize {
        self.spec_sensor[state]
    }

    pub fn duration(&self, state: usize, period: usize) -> &DurationStats {
        &self.specs[state].durations[period]
    }
}

/// Result of [`build_matrix_generator`].
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixBuild {
    pub generator: Generator,
    /// Activity records whose label matched no chain state; they are ignored.
    pub dropped: Vec<String>,
}

/// Builds a 6-hour, four-period generator from hand-written matrices.
///
/// The matrices must share one state set; if their column orders differ they
/// are permuted to the night matrix's order. Duration statistics come from
/// the activities table and are the same in every period.
pub fn build_matrix_generator(
    morning: TransitionMatrix,
    afternoon: TransitionMatrix,
    evening: TransitionMatrix,
    night: TransitionMatrix,
    activities: Vec<ActivityRecord>,
) -> Result<MatrixBuild, GeneratorError> {
    let by_period = [night, morning, afternoon, evening];
    for (m, name) in by_period.iter().zip(NAMED_PERIODS) {
        let report = m.validate();
        if !report.is_ok() {
            return Err(GeneratorError::Matrix {
                period: name.to_string(),
                source: MarkovError::InvalidMatrix(report),
            });
        }
    }

    let reference = by_period[0].states().to_vec();
    let reference_set: HashSet<&str> = reference.iter().map(String::as_str).collect();
    for (m, name) in by_period.iter().zip(NAMED_PERIODS).skip(1) {
        let set: HashSet<&str> = m.states().iter().map(String::as_str).collect();
        if let Some(extra) = m.states().iter().find(|s| !reference_set.contains(s.as_str())) {
            return Err(GeneratorError::StateSetMismatch {
                state: extra.clone(),
                period: name.to_string(),
                reference: NAMED_PERIODS[0].to_string(),
            });
        }
        if let Some(missing) = reference.iter().find(|s| !set.contains(s.as_str())) {
            return Err(GeneratorError::StateSetMismatch {
                state: missing.clone(),
                period: NAMED_PERIODS[0].to_string(),
                reference: name.to_string(),
            });
        }
    }
    let chains = by_period
        .into_iter()
        .map(|m| reorder(m, &reference))
        .collect();
    let chains = ChainSet::new(NAMED_PERIOD_HOURS, chains)?;

    let mut records: HashMap<String, ActivityRecord> = HashMap::new();
    let mut order = Vec::new();
    for rec in activities {
        if records.contains_key(&rec.activity) {
            return Err(GeneratorError::DuplicateActivity(rec.activity));
        }
        order.push(rec.activity.clone());
        records.insert(rec.activity.clone(), rec);
    }

    let n_periods = chains.n_periods();
    let mut specs = Vec::with_capacity(reference.len());
    for state in &reference {
        let rec = records
            .remove(state)
            .ok_or_else(|| GeneratorError::MissingSpec(state.clone()))?;
        if rec.sensor.is_empty() {
            return Err(GeneratorError::EmptySensor(rec.activity));
        }
        if !rec.duration.is_valid() {
            return Err(GeneratorError::InvalidDuration(rec.activity));
        }
        specs.push(StateSpec {
            label: rec.activity,
            sensor: rec.sensor,
            polarity: rec.polarity,
            durations: vec![rec.duration; n_periods],
        });
    }
    let dropped = order
        .into_iter()
        .filter(|a| records.contains_key(a))
        .collect();

    Ok(MatrixBuild {
        generator: Generator::new(chains, specs)?,
        dropped,
    })
}

fn reorder(m: TransitionMatrix, order: &[String]) -> TransitionMatrix {
    if m.states() == order {
        return m;
    }
    let perm: Vec<usize> = order
        .iter()
        .map(|s| m.index_of(s).expect("state sets checked equal"))
        .collect();
    let rows = perm
        .iter()
        .map(|&i| perm.iter().map(|&j| m.row(i)[j]).collect())
        .collect();
    TransitionMatrix::unchecked(order.to_vec(), rows)
}
