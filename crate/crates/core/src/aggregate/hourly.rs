use std::collections::BTreeMap;

use chrono::NaiveDate;

use super::AggregateError;
use crate::store::Store;

/// Means over the events scheduled to depart within one hour.
///
/// `mean_earliness_s + mean_lateness_s == mean_abs_delta_s`: each event is
/// either early or late, never both.
#[derive(Debug, Clone, PartialEq)]
pub struct HourlyBucket {
    pub hour: u32,
    pub mean_earliness_s: f64,
    pub mean_lateness_s: f64,
    pub mean_abs_delta_s: f64,
    /// Mean over events with counts; `None` if none had counts.
    pub mean_boardings: Option<f64>,
    pub event_count: u32,
}

#[derive(Default)]
struct Acc {
    early: u64,
    late: u64,
    n: u32,
    boardings: u64,
    counted: u32,
}

/// Hourly adherence and ridership at one stop on one date, bucketed by the
/// hour of scheduled departure. Hours without events are omitted.
pub fn hourly_stop_detail(store: &Store, stop_id: &str, date: NaiveDate) -> Result<Vec<HourlyBucket>, AggregateError> {
    let mut hours: BTreeMap<u32, Acc> = BTreeMap::new();
    for e in store.stop_day(stop_id, date)?.iter() {
        let acc = hours.entry(e.scheduled_departure.hour()).or_default();
        acc.early += u64::from(e.earliness_seconds());
        acc.late += u64::from(e.lateness_seconds());
        acc.n += 1;
        if let Some(b) = e.boardings() {
            acc.boardings += u64::from(b);
            acc.counted += 1;
        }
    }
    Ok(hours
        .into_iter()
        .map(|(hour, acc)| {
            let n = f64::from(acc.n);
            HourlyBucket {
                hour,
                mean_earliness_s: acc.early as f64 / n,
                mean_lateness_s: acc.late as f64 / n,
                mean_abs_delta_s: (acc.early + acc.late) as f64 / n,
                mean_boardings: (acc.counted > 0).then(|| acc.boardings as f64 / f64::from(acc.counted)),
                event_count: acc.n,
            }
        })
        .collect())
}
