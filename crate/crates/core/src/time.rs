//! Agency-local clock values.
//!
//! Service times are expressed relative to the start of a service date and
//! may run past midnight (up to 29:59:59), so a trip that leaves at 00:40 the
//! following morning is written `24:40:00` and stays on its original date.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Last representable hour on the extended service clock.
pub const MAX_SERVICE_HOUR: u32 = 29;

const SECONDS_PER_HOUR: u32 = 3600;

/// Seconds since the start of the service date, `00:00:00` through `29:59:59`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct ServiceTime(u32);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid service time {0:?}: expected HH:MM:SS with hour 0-29")]
pub struct ServiceTimeError(pub String);

impl ServiceTime {
    pub const MAX: ServiceTime = ServiceTime((MAX_SERVICE_HOUR + 1) * SECONDS_PER_HOUR - 1);

    pub fn from_seconds(seconds: u32) -> Option<Self> {
        (seconds <= Self::MAX.0).then_some(ServiceTime(seconds))
    }

    pub fn from_hms(hour: u32, minute: u32, second: u32) -> Option<Self> {
        if hour > MAX_SERVICE_HOUR || minute >= 60 || second >= 60 {
            return None;
        }
        Some(ServiceTime(hour * SECONDS_PER_HOUR + minute * 60 + second))
    }

    pub fn seconds(self) -> u32 {
        self.0
    }

    pub fn hour(self) -> u32 {
        self.0 / SECONDS_PER_HOUR
    }

    /// Signed difference `self - earlier` in seconds.
    pub fn delta_from(self, earlier: ServiceTime) -> i64 {
        i64::from(self.0) - i64::from(earlier.0)
    }
}

impl fmt::Display for ServiceTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = self.0 / SECONDS_PER_HOUR;
        let m = (self.0 % SECONDS_PER_HOUR) / 60;
        let s = self.0 % 60;
        write!(f, "{h:02}:{m:02}:{s:02}")
    }
}

impl FromStr for ServiceTime {
    type Err = ServiceTimeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ServiceTimeError(s.to_string());
        let mut parts = s.split(':');
        let mut next = || -> Result<u32, ServiceTimeError> {
            let part = parts.next().ok_or_else(err)?;
            if part.len() != 2 || !part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            part.parse().map_err(|_| err())
        };
        let (h, m, sec) = (next()?, next()?, next()?);
        if parts.next().is_some() {
            return Err(err());
        }
        ServiceTime::from_hms(h, m, sec).ok_or_else(err)
    }
}

impl TryFrom<u32> for ServiceTime {
    type Error = ServiceTimeError;

    fn try_from(value: u32) -> Result<Self, Self::Error> {
        ServiceTime::from_seconds(value).ok_or_else(|| ServiceTimeError(value.to_string()))
    }
}

impl From<ServiceTime> for u32 {
    fn from(t: ServiceTime) -> u32 {
        t.0
    }
}
