//! Everything the views display: calendar series and their color classes,
//! the trip grid, hourly stop detail, fare breakdowns, and stop search.
//!
//! All functions are pure reads over a [`Store`].

mod bins;
mod calendar;
mod fares;
mod grid;
mod hourly;
mod search;

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::store::StoreError;

pub use bins::{bin_value, ridership_scale, BinScale, ADHERENCE_EDGES_SECONDS, BIN_COUNT, RIDERSHIP_PERCENTILES};
pub use calendar::{daily_metric, DailyAggregate, DailySeries};
pub use fares::{fare_distribution, FareDistribution, FareEntry};
pub use grid::{trip_grid, GridCell, TripGrid, TripRow, MAX_DISPLAY_SQUARES};
pub use hourly::{hourly_stop_detail, HourlyBucket};
pub use search::{search_stops, SearchHit};

#[derive(Debug, thiserror::Error)]
pub enum AggregateError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("empty date range: {from} is after {to}")]
    EmptyRange { from: NaiveDate, to: NaiveDate },
    #[error("cannot derive a bin scale from zero values")]
    EmptyScaleInput,
    #[error("bin edges {0:?} are not strictly increasing and nonnegative")]
    InvalidScale([f64; 4]),
}

impl AggregateError {
    pub fn is_not_found(&self) -> bool {
        matches!(self, AggregateError::Store(e) if e.is_not_found())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Mean |actual - scheduled| in seconds.
    Adherence,
    /// Mean boardings per stop event.
    Ridership,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Adherence => "adherence",
            Metric::Ridership => "ridership",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "adherence" => Ok(Metric::Adherence),
            "ridership" => Ok(Metric::Ridership),
            _ => Err(()),
        }
    }
}

/// What a calendar aggregates over.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scope {
    /// Every event at the stop, across all routes.
    Stop(String),
    /// Every event of the route, across all its stops.
    Route(String),
}

impl Scope {
    pub fn kind(&self) -> &'static str {
        match self {
            Scope::Stop(_) => "stop",
            Scope::Route(_) => "route",
        }
    }

    pub fn id(&self) -> &str {
        match self {
            Scope::Stop(id) | Scope::Route(id) => id,
        }
    }
}

/// Inclusive service-date range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DateRange {
    pub from: NaiveDate,
    pub to: NaiveDate,
}

impl DateRange {
    pub fn new(from: NaiveDate, to: NaiveDate) -> Result<Self, AggregateError> {
        if from > to {
            return Err(AggregateError::EmptyRange { from, to });
        }
        Ok(DateRange { from, to })
    }

    /// Every representable date.
    pub fn all() -> Self {
        DateRange {
            from: NaiveDate::MIN,
            to: NaiveDate::MAX,
        }
    }
}
