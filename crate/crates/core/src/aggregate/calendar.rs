use chrono::NaiveDate;
use serde::Serialize;

use super::{ridership_scale, AggregateError, BinScale, DateRange, Metric, Scope};
use crate::model::StopEvent;
use crate::store::Store;

/// One calendar day. Days without contributing events are not represented.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DailyAggregate {
    pub date: NaiveDate,
    pub value: f64,
    pub bin: u8,
    /// Events that contributed to `value`.
    pub event_count: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DailySeries {
    pub scope: Scope,
    pub metric: Metric,
    /// `None` only for a ridership series with no days.
    pub scale: Option<BinScale>,
    pub days: Vec<DailyAggregate>,
}

#[derive(Default)]
struct Acc {
    sum: u64,
    n: u32,
}

impl Acc {
    fn add(&mut self, metric: Metric, e: &StopEvent) {
        match metric {
            Metric::Adherence => {
                self.sum += u64::from(e.delta_seconds.unsigned_abs());
                self.n += 1;
            }
            Metric::Ridership => {
                if let Some(b) = e.boardings() {
                    self.sum += u64::from(b);
                    self.n += 1;
                }
            }
        }
    }
}

/// Per-day mean of the metric over the scope, for days in `range` (the whole
/// store when `None`).
///
/// Adherence is the mean of |delta| over all events of the day. Ridership is
/// the mean of boardings over events that have counts; a day where no event
/// has counts is left out.
pub fn daily_metric(
    store: &Store,
    scope: &Scope,
    metric: Metric,
    range: Option<DateRange>,
) -> Result<DailySeries, AggregateError> {
    let range = range.unwrap_or_else(DateRange::all);
    if range.from > range.to {
        return Err(AggregateError::EmptyRange {
            from: range.from,
            to: range.to,
        });
    }
    let dates = range.from..=range.to;

    let mut raw: Vec<(NaiveDate, Acc)> = Vec::new();
    match scope {
        Scope::Route(id) => {
            for (date, events) in store.route_events(id, dates)? {
                let mut acc = Acc::default();
                events.iter().for_each(|e| acc.add(metric, e));
                raw.push((date, acc));
            }
        }
        Scope::Stop(id) => {
            for (date, events) in store.stop_events(id, dates)? {
                let mut acc = Acc::default();
                events.iter().for_each(|e| acc.add(metric, e));
                raw.push((date, acc));
            }
        }
    }

    let mut days: Vec<DailyAggregate> = raw
        .into_iter()
        .filter(|(_, acc)| acc.n > 0)
        .map(|(date, acc)| DailyAggregate {
            date,
            value: acc.sum as f64 / f64::from(acc.n),
            bin: 0,
            event_count: acc.n,
        })
        .collect();

    let scale = match metric {
        Metric::Adherence => Some(BinScale::adherence()),
        Metric::Ridership if days.is_empty() => None,
        Metric::Ridership => {
            let values: Vec<f64> = days.iter().map(|d| d.value).collect();
            Some(ridership_scale(&values)?)
        }
    };
    if let Some(scale) = &scale {
        for day in &mut days {
            day.bin = scale.bin(day.value);
        }
    }

    Ok(DailySeries {
        scope: scope.clone(),
        metric,
        scale,
        days,
    })
}
