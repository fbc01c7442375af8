//! Calendar periods used for bucketing: UTC days and ISO-8601 weeks.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PeriodError {
    #[error("invalid week key {0:?}, expected YYYY-Www")]
    BadWeek(String),
    #[error("invalid date {0:?}, expected YYYY-MM-DD")]
    BadDay(String),
    #[error("unknown granularity {0:?}")]
    BadGranularity(String),
}

/// ISO-8601 year-week, rendered as `2020-W11`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WeekKey {
    year: i32,
    week: u32,
}

impl WeekKey {
    pub fn new(year: i32, week: u32) -> Option<Self> {
        NaiveDate::from_isoywd_opt(year, week, Weekday::Mon).map(|_| Self { year, week })
    }

    pub fn of(date: NaiveDate) -> Self {
        let iso = date.iso_week();
        Self {
            year: iso.year(),
            week: iso.week(),
        }
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn week(&self) -> u32 {
        self.week
    }

    pub fn monday(&self) -> NaiveDate {
        NaiveDate::from_isoywd_opt(self.year, self.week, Weekday::Mon)
            .expect("week key validated on construction")
    }

    pub fn succ(&self) -> Option<Self> {
        self.monday().checked_add_days(Days::new(7)).map(Self::of)
    }
}

impl fmt::Display for WeekKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-W{:02}", self.year, self.week)
    }
}

impl FromStr for WeekKey {
    type Err = PeriodError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PeriodError::BadWeek(s.to_string());
        let (year, week) = s.split_once("-W").ok_or_else(bad)?;
        if year.len() != 4 || week.len() != 2 {
            return Err(bad());
        }
        if !year.bytes().chain(week.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let year: i32 = year.parse().map_err(|_| bad())?;
        let week: u32 = week.parse().map_err(|_| bad())?;
        Self::new(year, week).ok_or_else(bad)
    }
}

impl Serialize for WeekKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for WeekKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parse a strict `YYYY-MM-DD` day.
pub fn parse_day(s: &str) -> Result<NaiveDate, PeriodError> {
    if s.len() != 10 {
        return Err(PeriodError::BadDay(s.to_string()));
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| PeriodError::BadDay(s.to_string()))
}

pub fn format_day(day: NaiveDate) -> String {
    day.format("%Y-%m-%d").to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Day,
    Week,
}

impl Granularity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Granularity::Day => "day",
            Granularity::Week => "week",
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Granularity {
    type Err = PeriodError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "day" => Ok(Granularity::Day),
            "week" => Ok(Granularity::Week),
            other => Err(PeriodError::BadGranularity(other.to_string())),
        }
    }
}

/// A single day or ISO week. Ordering is chronological within one granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Period {
    Day(NaiveDate),
    Week(WeekKey),
}

impl Period {
    pub fn parse(granularity: Granularity, s: &str) -> Result<Self, PeriodError> {
        match granularity {
            Granularity::Day => parse_day(s).map(Period::Day),
            Granularity::Week => s.parse().map(Period::Week),
        }
    }

    pub fn of(granularity: Granularity, day: NaiveDate) -> Self {
        match granularity {
            Granularity::Day => Period::Day(day),
            Granularity::Week => Period::Week(WeekKey::of(day)),
        }
    }

    pub fn granularity(&self) -> Granularity {
        match self {
            Period::Day(_) => Granularity::Day,
            Period::Week(_) => Granularity::Week,
        }
    }

    pub fn succ(&self) -> Option<Self> {
        match self {
            Period::Day(d) => d.succ_opt().map(Period::Day),
            Period::Week(w) => w.succ().map(Period::Week),
        }
    }

    /// Number of periods in `from..=to`, or `None` when `from > to`.
    pub fn span(from: Period, to: Period) -> Option<u64> {
        let days = match (from, to) {
            (Period::Day(a), Period::Day(b)) => (b - a).num_days(),
            (Period::Week(a), Period::Week(b)) => (b.monday() - a.monday()).num_days() / 7,
            _ => return None,
        };
        u64::try_from(days).ok().map(|d| d + 1)
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Period::Day(d) => write!(f, "{}", d.format("%Y-%m-%d")),
            Period::Week(w) => w.fmt(f),
        }
    }
}
