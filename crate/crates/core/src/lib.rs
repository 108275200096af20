//! Synthetic binary-sensor event logs from period-of-day Markov chains.
//!
//! A [`Generator`] holds one transition matrix per period of the day plus,
//! for every chain state, the sensor edge it emits and how long the clock
//! holds after it. Generators are either assembled from hand-written
//! matrices ([`build_matrix_generator`]) or learned from a sample log
//! ([`learn_generator`]); [`simulate`] turns one into an [`EventLog`],
//! optionally perturbed by anomaly windows.

pub mod duration;
pub mod event;
pub mod generator;
pub mod io;
pub mod learn;
pub mod markov;
pub mod rng;
pub mod sim;
pub mod summary;

pub use duration::{empirical_stats, outlier_mean, sample_duration, Direction, DurationStats};
pub use event::{Event, EventLog, Polarity};
pub use generator::{build_matrix_generator, ActivityRecord, Generator, MatrixBuild, StateSpec};
pub use learn::{learn_generator, transition_counts, LearnError, TransitionCounts};
pub use markov::{period_index, ChainSet, MarkovError, TransitionMatrix, ValidationReport};
pub use rng::RandomSource;
pub use sim::{
    active_anomaly, anomalous_period, is_valid_event, simulate, AnomalyKind, AnomalySpec,
    SensorState, SimConfig, SimError,
};
