//! Per-sensor descriptive statistics of an event log.

use std::io::Write;

use crate::duration::{empirical_stats, DurationStats};
use crate::event::EventLog;
use crate::io::format_real;

pub const SUMMARY_HEADER: [&str; 7] = [
    "sensor",
    "events",
    "on_seconds",
    "mean_on_seconds",
    "sd_on_seconds",
    "mean_holding_seconds",
    "sd_holding_seconds",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SensorSummary {
    pub sensor: String,
    pub events: usize,
    /// Sum of closed ON intervals. An ON edge with no later OFF is not counted.
    pub on_seconds: u64,
    pub on_interval: DurationStats,
    /// Gap from each of this sensor's events to the next event in the log.
    pub holding: DurationStats,
}

/// One row per sensor, in order of first appearance.
pub fn summarize(log: &EventLog) -> Vec<SensorSummary> {
    struct Acc {
        sensor: String,
        events: usize,
        on_since: Option<u64>,
        on: Vec<f64>,
        holding: Vec<f64>,
    }
    let mut accs: Vec<Acc> = Vec::new();
    let events = log.events();
    for (i, e) in events.iter().enumerate() {
        let idx = match accs.iter().position(|a| a.sensor == e.sensor) {
            Some(i) => i,
            None => {
                accs.push(Acc {
                    sensor: e.sensor.clone(),
                    events: 0,
                    on_since: None,
                    on: Vec::new(),
                    holding: Vec::new(),
                });
                accs.len() - 1
            }
        };
        let acc = &mut accs[idx];
        acc.events += 1;
        if e.polarity.is_on() {
            acc.on_since.get_or_insert(e.timestamp);
        } else if let Some(start) = acc.on_since.take() {
            acc.on.push((e.timestamp - start) as f64);
        }
        if let Some(next) = events.get(i + 1) {
            acc.holding.push((next.timestamp - e.timestamp) as f64);
        }
    }
    accs.into_iter()
        .map(|a| SensorSummary {
            on_seconds: a.on.iter().sum::<f64>() as u64,
            on_interval: empirical_stats(&a.on),
            holding: empirical_stats(&a.holding),
            sensor: a.sensor,
            events: a.events,
        })
        .collect()
}

pub fn write_summary<W: Write>(w: W, rows: &[SensorSummary]) -> std::io::Result<()> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    out.write_record(SUMMARY_HEADER)?;
    for r in rows {
        out.write_record([
            r.sensor.clone(),
            r.events.to_string(),
            r.on_seconds.to_string(),
            format_real(r.on_interval.mean_s),
            format_real(r.on_interval.sd_s),
            format_real(r.holding.mean_s),
            format_real(r.holding.sd_s),
        ])?;
    }
    out.flush()
}
