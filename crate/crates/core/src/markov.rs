//! Transition matrices over named states, period-of-day chain sets, and
//! next-state sampling.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::rng::RandomSource;

/// Maximum allowed deviation of a row sum from 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;
/// Rows off by more than [`ROW_SUM_TOLERANCE`] but at most this much are
/// rescaled on construction (decimal rounding in matrix files).
pub const RENORMALIZE_TOLERANCE: f64 = 1e-6;

pub const SECONDS_PER_DAY: u64 = 86_400;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarkovError {
    #[error("invalid transition matrix: {0}")]
    InvalidMatrix(ValidationReport),
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("period length of {0} hours does not divide the day")]
    InvalidPeriodHours(u32),
    #[error("time of day {0} s is outside [0, 86400)")]
    TimeOfDayOutOfRange(u64),
    #[error("expected {expected} chains for {period_hours}-hour periods, got {found}")]
    ChainCount {
        period_hours: u32,
        expected: usize,
        found: usize,
    },
    #[error("chain {index} has a different state list than chain 0")]
    StateListMismatch { index: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    /// Row length (or row count, when `row` is `None`) differs from the
    /// number of states.
    Shape { expected: usize, found: usize },
    Range { column: usize, value: f64 },
    RowSum { sum: f64 },
    DuplicateLabel(String),
    EmptyLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Row index for row-level problems; label index for label problems;
    /// `None` for the row count.
    pub row: Option<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.row {
            Some(r) => write!(f, "row {r}: ")?,
            None => write!(f, "matrix: ")?,
        }
        match &self.kind {
            ViolationKind::Shape { expected, found } => {
                write!(f, "shape: expected {expected} entries, found {found}")
            }
            ViolationKind::Range { column, value } => {
                write!(f, "range: column {column} = {value} outside [0, 1]")
            }
            ViolationKind::RowSum { sum } => write!(f, "row-sum: {sum} != 1"),
            ViolationKind::DuplicateLabel(l) => write!(f, "duplicate-label: {l:?}"),
            ViolationKind::EmptyLabel => write!(f, "empty-label"),
        }
    }
}

/// Outcome of [`TransitionMatrix::validate`]. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Row-stochastic matrix over an ordered list of state labels.
/// `rows[i][j]` is the probability of moving from `states[i]` to `states[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    states: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl TransitionMatrix {
    /// Builds a validated matrix. Rows whose sum is within
    /// [`RENORMALIZE_TOLERANCE`] of 1 are rescaled first.
    pub fn new(states: Vec<String>, mut rows: Vec<Vec<f64>>) -> Result<Self, MarkovError> {
        for row in &mut rows {
            let sum: f64 = row.iter().sum();
            let dev = (sum - 1.0).abs();
            if dev > ROW_SUM_TOLERANCE && dev <= RENORMALIZE_TOLERANCE {
                row.iter_mut().for_each(|p| *p /= sum);
            }
        }
        let m = Self { states, rows };
        let report = m.validate();
        if report.is_ok() {
            Ok(m)
        } else {
            Err(MarkovError::InvalidMatrix(report))
        }
    }

    /// Wraps the data as-is, without checks. Use [`validate`](Self::validate)
    /// before sampling from it.
    pub fn unchecked(states: Vec<String>, rows: Vec<Vec<f64>>) -> Self {
        Self { states, rows }
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, state: &str) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }

    pub fn probability(&self, from: &str, to: &str) -> Option<f64> {
        Some(self.rows[self.index_of(from)?][self.index_of(to)?])
    }

    /// Checks every matrix invariant and collects all violations.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let n = self.states.len();

        let mut seen = HashSet::new();
        for (i, label) in self.states.iter().enumerate() {
            if label.is_empty() {
                violations.push(Violation {
                    row: Some(i),
                    kind: ViolationKind::EmptyLabel,
                });
            } else if !seen.insert(label.as_str()) {
                violations.push(Violation {
                    row: Some(i),
                    kind: ViolationKind::DuplicateLabel(label.clone()),
                });
            }
        }

        if self.rows.len() != n {
            violations.push(Violation {
                row: None,
                kind: ViolationKind::Shape {
                    expected: n,
                    found: self.rows.len(),
                },
            });
        }

        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != n {
                violations.push(Violation {
                    row: Some(i),
                    kind: ViolationKind::Shape {
                        expected: n,
                        found: row.len(),
                    },
                });
            }
            for (j, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    violations.push(Violation {
                        row: Some(i),
                        kind: ViolationKind::Range { column: j, value: p },
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if sum.is_nan() || (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                violations.push(Violation {
                    row: Some(i),
                    kind: ViolationKind::RowSum { sum },
                });
            }
        }

        ValidationReport { violations }
    }

    /// Samples the successor of `current`.
    pub fn sample_next(&self, current: &str, rng: &mut RandomSource) -> Result<&str, MarkovError> {
        let i = self
            .index_of(current)
            .ok_or_else(|| MarkovError::UnknownState(current.to_string()))?;
        Ok(&self.states[self.sample_index(i, rng)])
    }

    /// Index form of [`sample_next`](Self::sample_next). Panics if `current`
    /// is out of range.
    pub fn sample_index(&self, current: usize, rng: &mut RandomSource) -> usize {
        let u = rng.uniform();
        pick_weighted(&self.rows[current], u)
            .expect("valid matrix rows have positive mass")
    }
}

/// Inverse-CDF walk over `weights` in column order: returns the first index
/// whose cumulative weight exceeds `u · Σweights`. Zero-weight columns are
/// never returned. `None` when the total weight is not positive.
pub fn pick_weighted(weights: &[f64], u: f64) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return None;
    }
    let target = u * total;
    let mut cumulative = 0.0;
    let mut last_positive = None;
    for (j, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        cumulative += w;
        last_positive = Some(j);
        if cumulative > target {
            return Some(j);
        }
    }
    // Float rounding can leave the final cumulative a hair below the target.
    last_positive
}

/// Index of the period containing `time_of_day` (seconds since midnight).
pub fn period_index(time_of_day: u64, period_hours: u32) -> Result<usize, MarkovError> {
    check_period_hours(period_hours)?;
    if time_of_day >= SECONDS_PER_DAY {
        return Err(MarkovError::TimeOfDayOutOfRange(time_of_day));
    }
    Ok((time_of_day / (3600 * u64::from(period_hours))) as usize)
}

pub fn check_period_hours(period_hours: u32) -> Result<(), MarkovError> {
    if period_hours == 0 || 24 % period_hours != 0 {
        Err(MarkovError::InvalidPeriodHours(period_hours))
    } else {
        Ok(())
    }
}

/// One transition matrix per period of the day; chain `p` covers clock hours
/// `[p·h, (p+1)·h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSet {
    period_hours: u32,
    chains: Vec<TransitionMatrix>,
}

impl ChainSet {
    /// Chains must be valid matrices sharing one ordered state list.
    pub fn new(period_hours: u32, chains: Vec<TransitionMatrix>) -> Result<Self, MarkovError> {
        check_period_hours(period_hours)?;
        let expected = (24 / period_hours) as usize;
        if chains.len() != expected {
            return Err(MarkovError::ChainCount {
                period_hours,
                expected,
                found: chains.len(),
            });
        }
        for (index, c) in chains.iter().enumerate() {
            let report = c.validate();
            if !report.is_ok() {
                return Err(MarkovError::InvalidMatrix(report));
            }
            if c.states != chains[0].states {
                return Err(MarkovError::StateListMismatch { index });
            }
        }
        Ok(Self {
            period_hours,
            chains,
        })
    }

    pub fn period_hours(&self) -> u32 {
        self.period_hours
    }

    pub fn n_periods(&self) -> usize {
        self.chains.len()
    }

    pub fn chains(&self) -> &[TransitionMatrix] {
        &self.chains
    }

    pub fn chain(&self, period: usize) -> &TransitionMatrix {
        &self.chains[period]
    }

    pub fn states(&self) -> &[String] {
        self.chains[0].states()
    }

    /// Period of an absolute timestamp (UTC seconds).
    pub fn period_at(&self, timestamp: u64) -> usize {
        (timestamp % SECONDS_PER_DAY / (3600 * u64::from(self.period_hours))) as usize
    }
}
