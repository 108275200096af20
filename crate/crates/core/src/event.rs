//! Binary sensor edge events and ordered event logs.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Direction of a binary sensor edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    On,
    Off,
}

impl Polarity {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::On => "ON",
            Polarity::Off => "OFF",
        }
    }

    /// `1` for ON, `0` for OFF, as written in event logs.
    pub fn as_bit(self) -> u8 {
        match self {
            Polarity::On => 1,
            Polarity::Off => 0,
        }
    }

    pub fn is_on(self) -> bool {
        self == Polarity::On
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid polarity {0:?} (expected ON or OFF)")]
pub struct InvalidPolarity(pub String);

impl FromStr for Polarity {
    type Err = InvalidPolarity;

    /// Case-insensitive `ON` / `OFF`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("on") {
            Ok(Polarity::On)
        } else if s.eq_ignore_ascii_case("off") {
            Ok(Polarity::Off)
        } else {
            Err(InvalidPolarity(s.to_string()))
        }
    }
}

/// Conventional state label for a sensor edge: `<sensor>_<ON|OFF>`.
pub fn state_label(sensor: &str, polarity: Polarity) -> String {
    format!("{sensor}_{polarity}")
}

/// One edge of one sensor at one instant. Timestamps are whole seconds since
/// the Unix epoch, UTC.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Event {
    pub timestamp: u64,
    pub sensor: String,
    pub polarity: Polarity,
}

impl Event {
    pub fn new(timestamp: u64, sensor: impl Into<String>, polarity: Polarity) -> Self {
        Self {
            timestamp,
            sensor: sensor.into(),
            polarity,
        }
    }

    pub fn state_label(&self) -> String {
        state_label(&self.sensor, self.polarity)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("event {index} at t={timestamp} precedes the previous event at t={previous}")]
pub struct UnsortedLog {
    pub index: usize,
    pub timestamp: u64,
    pub previous: u64,
}

/// Events ordered by non-decreasing timestamp.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    events: Vec<Event>,
}

impl EventLog {
    /// Wraps `events`, rejecting any out-of-order pair. Logs are never
    /// silently sorted.
    pub fn new(events: Vec<Event>) -> Result<Self, UnsortedLog> {
        if let Some(i) = events
            .windows(2)
            .position(|w| w[1].timestamp < w[0].timestamp)
        {
            return Err(UnsortedLog {
                index: i + 1,
                timestamp: events[i + 1].timestamp,
                previous: events[i].timestamp,
            });
        }
        Ok(Self { events })
    }

    /// Caller guarantees ordering (the simulator emits strictly increasing
    /// timestamps).
    pub(crate) fn from_sorted(events: Vec<Event>) -> Self {
        debug_assert!(events.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
        Self { events }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Event> {
        self.events.iter()
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }
}

impl<'a> IntoIterator for &'a EventLog {
    type Item = &'a Event;
    type IntoIter = std::slice::Iter<'a, Event>;

    fn into_iter(self) -> Self::IntoIter {
        self.events.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polarity_parse_is_case_insensitive() {
        assert_eq!("on".parse::<Polarity>().unwrap(), Polarity::On);
        assert_eq!("Off".parse::<Polarity>().unwrap(), Polarity::Off);
        assert!("1".parse::<Polarity>().is_err());
    }

    #[test]
    fn labels() {
        assert_eq!(state_label("tv", Polarity::On), "tv_ON");
        assert_eq!(Event::new(0, "bed", Polarity::Off).state_label(), "bed_OFF");
    }

    #[test]
    fn unsorted_log_rejected() {
        let err = EventLog::new(vec![
            Event::new(10, "a", Polarity::On),
            Event::new(5, "a", Polarity::Off),
        ])
        .unwrap_err();
        assert_eq!(err.index, 1);
        assert_eq!(err.previous, 10);
    }

    #[test]
    fn ties_allowed() {
        let log = EventLog::new(vec![
            Event::new(10, "a", Polarity::On),
            Event::new(10, "b", Polarity::On),
        ])
        .unwrap();
        assert_eq!(log.len(), 2);
        assert_eq!(log.events()[1].sensor, "b");
    }
}
