//! CSV readers and writers for matrices, activities, event logs, anomaly
//! windows and learned duration tables.
//!
//! Writers are canonical: `\n` line endings, a newline after every record,
//! reals with at most 9 significant digits and trailing zeros trimmed,
//! timestamps as `YYYY-MM-DDTHH:MM:SSZ`. Parsing a canonical file and writing
//! it back reproduces it byte for byte.

use std::io::{Read, Write};

use chrono::{DateTime, NaiveDateTime};
use thiserror::Error;

use crate::duration::DurationStats;
use crate::event::{Event, EventLog, Polarity};
use crate::generator::ActivityRecord;
use crate::markov::TransitionMatrix;
use crate::sim::{AnomalyKind, AnomalySpec};

pub const ACTIVITIES_HEADER: [&str; 5] = ["activity", "type", "sensor", "mean_seconds", "sd_seconds"];
pub const EVENT_LOG_HEADER: [&str; 3] = ["timestamp", "sensor", "value"];
pub const ANOMALIES_HEADER: [&str; 3] = ["start", "end", "kind"];
pub const DURATIONS_HEADER: [&str; 5] = ["state", "period", "mean_seconds", "sd_seconds", "samples"];

const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Field {
        line: u64,
        column: usize,
        message: String,
    },
    #[error("line {line}: {message}")]
    Record { line: u64, message: String },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ParseError {
    /// 1-based line of the failure, when known.
    pub fn line(&self) -> Option<u64> {
        match self {
            ParseError::Field { line, .. } | ParseError::Record { line, .. } => Some(*line),
            ParseError::Csv(e) => e.position().map(|p| p.line()),
            ParseError::Io(_) => None,
        }
    }
}

/// Formats a non-negative or negative real with at most 9 significant
/// digits, no exponent, trailing zeros removed.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

pub fn format_timestamp(t: u64) -> String {
    let secs = i64::try_from(t).expect("timestamp fits in i64");
    DateTime::from_timestamp(secs, 0)
        .expect("timestamp within chrono range")
        .format(TIMESTAMP_FORMAT)
        .to_string()
}

/// Parses `YYYY-MM-DDTHH:MM:SSZ` (UTC) into seconds since the epoch.
pub fn parse_timestamp(s: &str) -> Result<u64, String> {
    let dt = NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT)
        .map_err(|e| format!("malformed timestamp {s:?}: {e}"))?;
    u64::try_from(dt.and_utc().timestamp()).map_err(|_| format!("timestamp {s:?} precedes 1970-01-01"))
}

struct Rows<R: Read> {
    reader: csv::Reader<R>,
    record: csv::StringRecord,
}

impl<R: Read> Rows<R> {
    fn new(r: R) -> Self {
        let reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(r);
        Self {
            reader,
            record: csv::StringRecord::new(),
        }
    }

    /// Next record with its 1-based line number.
    fn next(&mut self) -> Result<Option<(u64, &csv::StringRecord)>, ParseError> {
        if !self.reader.read_record(&mut self.record)? {
            return Ok(None);
        }
        let line = self.record.position().map_or(0, |p| p.line());
        Ok(Some((line, &self.record)))
    }

    fn header(&mut self, expected: &[&str]) -> Result<(), ParseError> {
        match self.next()? {
            None => Err(ParseError::Record {
                line: 1,
                message: format!("empty file, expected header {}", expected.join(",")),
            }),
            Some((line, rec)) => {
                if rec.iter().eq(expected.iter().copied()) {
                    Ok(())
                } else {
                    Err(ParseError::Record {
                        line,
                        message: format!(
                            "header mismatch: expected {}, found {}",
                            expected.join(","),
                            rec.iter().collect::<Vec<_>>().join(",")
                        ),
                    })
                }
            }
        }
    }
}

fn check_width(line: u64, rec: &csv::StringRecord, width: usize) -> Result<(), ParseError> {
    if rec.len() != width {
        return Err(ParseError::Record {
            line,
            message: format!("expected {width} fields, found {}", rec.len()),
        });
    }
    Ok(())
}

fn field_err(line: u64, column: usize, message: impl Into<String>) -> ParseError {
    ParseError::Field {
        line,
        column,
        message: message.into(),
    }
}

fn parse_real(line: u64, column: usize, s: &str) -> Result<f64, ParseError> {
    match s.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(field_err(line, column, format!("expected a decimal number, found {s:?}"))),
    }
}

fn parse_nonnegative(line: u64, column: usize, s: &str) -> Result<f64, ParseError> {
    let x = parse_real(line, column, s)?;
    if x < 0.0 {
        return Err(field_err(line, column, format!("expected a non-negative number, found {s:?}")));
    }
    Ok(x)
}

fn parse_time_field(line: u64, column: usize, s: &str) -> Result<u64, ParseError> {
    parse_timestamp(s).map_err(|m| field_err(line, column, m))
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> std::io::Result<()> {
    w.flush()
}

/// Reads a matrix file as written, without checking probabilities. Call
/// [`TransitionMatrix::validate`] or rebuild through
/// [`TransitionMatrix::new`] before use.
pub fn parse_matrix<R: Read>(r: R) -> Result<TransitionMatrix, ParseError> {
    let mut rows = Rows::new(r);
    let states: Vec<String> = match rows.next()? {
        None => {
            return Err(ParseError::Record {
                line: 1,
                message: "empty file, expected header state,<s1>,<s2>,...".into(),
            })
        }
        Some((line, rec)) => {
            if rec.get(0) != Some("state") || rec.len() < 2 {
                return Err(ParseError::Record {
                    line,
                    message: "header must be state,<s1>,<s2>,...".into(),
                });
            }
            rec.iter().skip(1).map(str::to_string).collect()
        }
    };

    let mut probs = Vec::with_capacity(states.len());
    while let Some((line, rec)) = rows.next()? {
        let i = probs.len();
        if i >= states.len() {
            return Err(ParseError::Record {
                line,
                message: format!("more rows than the {} header states", states.len()),
            });
        }
        check_width(line, rec, states.len() + 1)?;
        if rec.get(0) != Some(states[i].as_str()) {
            return Err(field_err(
                line,
                1,
                format!("header mismatch: row label {:?}, expected {:?}", &rec[0], states[i]),
            ));
        }
        let row = rec
            .iter()
            .enumerate()
            .skip(1)
            .map(|(c, s)| parse_real(line, c + 1, s))
            .collect::<Result<Vec<_>, _>>()?;
        probs.push(row);
    }
    if probs.len() != states.len() {
        return Err(ParseError::Record {
            line: probs.len() as u64 + 2,
            message: format!("expected {} rows, found {}", states.len(), probs.len()),
        });
    }
    Ok(TransitionMatrix::unchecked(states, probs))
}

pub fn write_matrix<W: Write>(w: W, m: &TransitionMatrix) -> std::io::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(std::iter::once("state").chain(m.states().iter().map(String::as_str)))?;
    for (label, row) in m.states().iter().zip(m.rows()) {
        let mut rec = vec![label.clone()];
        rec.extend(row.iter().map(|&p| format_real(p)));
        out.write_record(&rec)?;
    }
    finish(out)
}

pub fn parse_activities<R: Read>(r: R) -> Result<Vec<ActivityRecord>, ParseError> {
    let mut rows = Rows::new(r);
    rows.header(&ACTIVITIES_HEADER)?;
    let mut out = Vec::new();
    while let Some((line, rec)) = rows.next()? {
        check_width(line, rec, ACTIVITIES_HEADER.len())?;
        let activity = rec[0].to_string();
        if activity.is_empty() {
            return Err(field_err(line, 1, "empty activity name"));
        }
        let polarity: Polarity = rec[1]
            .parse()
            .map_err(|e: crate::event::InvalidPolarity| field_err(line, 2, e.to_string()))?;
        let sensor = rec[2].to_string();
        if sensor.is_empty() {
            return Err(field_err(line, 3, "empty sensor name"));
        }
        let mean = parse_nonnegative(line, 4, &rec[3])?;
        let sd = parse_nonnegative(line, 5, &rec[4])?;
        out.push(ActivityRecord {
            activity,
            polarity,
            sensor,
            duration: DurationStats::new(mean, sd),
        });
    }
    Ok(out)
}

pub fn write_activities<W: Write>(w: W, records: &[ActivityRecord]) -> std::io::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(ACTIVITIES_HEADER)?;
    for r in records {
        out.write_record([
            r.activity.as_str(),
            r.polarity.as_str(),
            r.sensor.as_str(),
            &format_real(r.duration.mean_s),
            &format_real(r.duration.sd_s),
        ])?;
    }
    finish(out)
}

fn parse_value(line: u64, s: &str) -> Result<Polarity, ParseError> {
    match s {
        "1" => Ok(Polarity::On),
        "0" => Ok(Polarity::Off),
        other => other
            .parse()
            .map_err(|_| field_err(line, 3, format!("value must be 0, 1, ON or OFF, found {other:?}"))),
    }
}

/// Reads an event log. Out-of-order rows are an error, never re-sorted.
pub fn parse_event_log<R: Read>(r: R) -> Result<EventLog, ParseError> {
    let mut rows = Rows::new(r);
    rows.header(&EVENT_LOG_HEADER)?;
    let mut events: Vec<Event> = Vec::new();
    while let Some((line, rec)) = rows.next()? {
        check_width(line, rec, EVENT_LOG_HEADER.len())?;
        let timestamp = parse_time_field(line, 1, &rec[0])?;
        if let Some(prev) = events.last() {
            if timestamp < prev.timestamp {
                return Err(field_err(
                    line,
                    1,
                    format!("unsorted log: {} precedes {}", &rec[0], format_timestamp(prev.timestamp)),
                ));
            }
        }
        if rec[1].is_empty() {
            return Err(field_err(line, 2, "empty sensor name"));
        }
        let polarity = parse_value(line, &rec[2])?;
        events.push(Event::new(timestamp, &rec[1], polarity));
    }
    Ok(EventLog::new(events).expect("order checked while parsing"))
}

pub fn write_event_log<W: Write>(w: W, log: &EventLog) -> std::io::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(EVENT_LOG_HEADER)?;
    for e in log {
        let value = if e.polarity.is_on() { "1" } else { "0" };
        out.write_record([format_timestamp(e.timestamp).as_str(), e.sensor.as_str(), value])?;
    }
    finish(out)
}

pub fn parse_anomalies<R: Read>(r: R) -> Result<Vec<AnomalySpec>, ParseError> {
    let mut rows = Rows::new(r);
    rows.header(&ANOMALIES_HEADER)?;
    let mut out = Vec::new();
    while let Some((line, rec)) = rows.next()? {
        check_width(line, rec, ANOMALIES_HEADER.len())?;
        let start = parse_time_field(line, 1, &rec[0])?;
        let end = parse_time_field(line, 2, &rec[1])?;
        let kind: AnomalyKind = rec[2].parse().map_err(|_| {
            field_err(
                line,
                3,
                format!(
                    "unknown anomaly kind {:?} (expected activity, duration_long, duration_short or both)",
                    &rec[2]
                ),
            )
        })?;
        let spec = AnomalySpec::new(start, end, kind)
            .map_err(|_| ParseError::Record { line, message: "start must precede end".into() })?;
        out.push(spec);
    }
    Ok(out)
}

pub fn write_anomalies<W: Write>(w: W, anomalies: &[AnomalySpec]) -> std::io::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(ANOMALIES_HEADER)?;
    for a in anomalies {
        out.write_record([
            format_timestamp(a.window_start()).as_str(),
            &format_timestamp(a.window_end()),
            a.kind().as_str(),
        ])?;
    }
    finish(out)
}

/// One row of a learned `durations.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct DurationRow {
    pub state: String,
    pub period: usize,
    pub stats: DurationStats,
}

pub fn parse_durations<R: Read>(r: R) -> Result<Vec<DurationRow>, ParseError> {
    let mut rows = Rows::new(r);
    rows.header(&DURATIONS_HEADER)?;
    let mut out = Vec::new();
    while let Some((line, rec)) = rows.next()? {
        check_width(line, rec, DURATIONS_HEADER.len())?;
        let period = rec[1]
            .parse()
            .map_err(|_| field_err(line, 2, format!("expected a period index, found {:?}", &rec[1])))?;
        let mean_s = parse_nonnegative(line, 3, &rec[2])?;
        let sd_s = parse_nonnegative(line, 4, &rec[3])?;
        let sample_count = rec[4]
            .parse()
            .map_err(|_| field_err(line, 5, format!("expected a sample count, found {:?}", &rec[4])))?;
        out.push(DurationRow {
            state: rec[0].to_string(),
            period,
            stats: DurationStats {
                mean_s,
                sd_s,
                sample_count,
            },
        });
    }
    Ok(out)
}

pub fn write_durations<W: Write>(w: W, rows: &[DurationRow]) -> std::io::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(DURATIONS_HEADER)?;
    for r in rows {
        out.write_record([
            r.state.as_str(),
            &r.period.to_string(),
            &format_real(r.stats.mean_s),
            &format_real(r.stats.sd_s),
            &r.stats.sample_count.to_string(),
        ])?;
    }
    finish(out)
}

/// Flattens a generator's per-period holding stats into `durations.csv` rows,
/// state-major.
pub fn duration_rows(gen: &crate::generator::Generator) -> Vec<DurationRow> {
    gen.specs()
        .iter()
        .flat_map(|s| {
            s.durations.iter().enumerate().map(move |(period, stats)| DurationRow {
                state: s.label.clone(),
                period,
                stats: *stats,
            })
        })
        .collect()
}
