//! Immutable, indexed home for the network, aligned stop events, and
//! per-stop fare tallies.
//!
//! Events are held once, sorted by `(route, service date, trip, visit order)`,
//! so a route-day and a trip-day are both contiguous slices. A second
//! permutation orders the same events by `(stop, service date)`.

mod snapshot;

use std::collections::BTreeMap;
use std::ops::{Range, RangeInclusive};

use chrono::NaiveDate;

use crate::model::{FareContribution, FareTally, Network, Route, Stop, StopEvent};

pub use snapshot::{SnapshotError, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("unknown route {0:?}")]
    UnknownRoute(String),
    #[error("unknown stop {0:?}")]
    UnknownStop(String),
    #[error("event {route}/{trip}/{stop}/{date} does not match the network")]
    EventOutsideNetwork {
        route: String,
        trip: String,
        stop: String,
        date: NaiveDate,
    },
    #[error("event {route}/{trip}/{stop}/{date} appears more than once")]
    DuplicateEvent {
        route: String,
        trip: String,
        stop: String,
        date: NaiveDate,
    },
    #[error("event {route}/{trip}/{stop}/{date} has a delta that disagrees with its timestamps")]
    InconsistentDelta {
        route: String,
        trip: String,
        stop: String,
        date: NaiveDate,
    },
    #[error("fare contribution for unknown stop {0:?}")]
    FareOutsideNetwork(String),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
}

impl StoreError {
    /// True for lookups of ids that are not in the store.
    pub fn is_not_found(&self) -> bool {
        matches!(self, StoreError::UnknownRoute(_) | StoreError::UnknownStop(_))
    }
}

#[derive(Debug, Clone)]
pub struct Store {
    network: Network,
    events: Vec<StopEvent>,
    route_days: BTreeMap<(usize, NaiveDate), Range<usize>>,
    stop_order: Vec<u32>,
    stop_days: BTreeMap<(usize, NaiveDate), Range<usize>>,
    fares: BTreeMap<String, FareTally>,
    span: Option<(NaiveDate, NaiveDate)>,
}

impl Store {
    /// Builds the store and its indices.
    ///
    /// Fare contributions are summed per stop and category across all dates.
    /// Events that reference ids outside the network, repeat a key, or carry
    /// an inconsistent delta are refused.
    pub fn build(
        network: Network,
        mut events: Vec<StopEvent>,
        fares: Vec<FareContribution>,
    ) -> Result<Store, StoreError> {
        let outside = |e: &StopEvent| StoreError::EventOutsideNetwork {
            route: e.route_id.clone(),
            trip: e.trip_id.clone(),
            stop: e.stop_id.clone(),
            date: e.service_date,
        };

        // (route position, visit position) per event, computed once for sorting.
        let mut keys = Vec::with_capacity(events.len());
        for e in &events {
            let route = network.route_position(&e.route_id).ok_or_else(|| outside(e))?;
            let visit = network.visit_position(&e.route_id, &e.stop_id).ok_or_else(|| outside(e))?;
            if i64::from(e.delta_seconds) != e.actual_departure.delta_from(e.scheduled_departure) {
                return Err(StoreError::InconsistentDelta {
                    route: e.route_id.clone(),
                    trip: e.trip_id.clone(),
                    stop: e.stop_id.clone(),
                    date: e.service_date,
                });
            }
            keys.push((route, visit));
        }
        let mut order: Vec<usize> = (0..events.len()).collect();
        order.sort_by(|&a, &b| {
            let (ea, eb) = (&events[a], &events[b]);
            (keys[a].0, ea.service_date, &ea.trip_id, keys[a].1).cmp(&(keys[b].0, eb.service_date, &eb.trip_id, keys[b].1))
        });
        let mut slots: Vec<Option<StopEvent>> = events.drain(..).map(Some).collect();
        let events: Vec<StopEvent> = order.iter().map(|&i| slots[i].take().expect("each index once")).collect();
        let route_keys: Vec<usize> = order.iter().map(|&i| keys[i].0).collect();

        for pair in events.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if a.route_id == b.route_id && a.service_date == b.service_date && a.trip_id == b.trip_id && a.stop_id == b.stop_id {
                return Err(StoreError::DuplicateEvent {
                    route: b.route_id.clone(),
                    trip: b.trip_id.clone(),
                    stop: b.stop_id.clone(),
                    date: b.service_date,
                });
            }
        }

        let mut route_days = BTreeMap::new();
        let mut start = 0;
        for i in 1..=events.len() {
            if i == events.len()
                || route_keys[i] != route_keys[start]
                || events[i].service_date != events[start].service_date
            {
                route_days.insert((route_keys[start], events[start].service_date), start..i);
                start = i;
            }
        }

        let stop_keys: Vec<usize> = events
            .iter()
            .map(|e| network.stop_position(&e.stop_id).expect("checked above"))
            .collect();
        let mut stop_order: Vec<u32> = (0..events.len() as u32).collect();
        stop_order.sort_by_key(|&i| (stop_keys[i as usize], events[i as usize].service_date, i));
        let mut stop_days = BTreeMap::new();
        let mut start = 0;
        for i in 1..=stop_order.len() {
            let key = |j: usize| {
                let e = stop_order[j] as usize;
                (stop_keys[e], events[e].service_date)
            };
            if i == stop_order.len() || key(i) != key(start) {
                stop_days.insert(key(start), start..i);
                start = i;
            }
        }

        let mut tallies: BTreeMap<String, FareTally> = BTreeMap::new();
        for c in fares {
            if network.stop(&c.stop_id).is_none() {
                return Err(StoreError::FareOutsideNetwork(c.stop_id));
            }
            let tally = tallies.entry(c.stop_id.clone()).or_insert_with(|| FareTally {
                stop_id: c.stop_id.clone(),
                counts: BTreeMap::new(),
            });
            *tally.counts.entry(c.category).or_default() += c.count;
        }

        let span = match (
            events.iter().map(|e| e.service_date).min(),
            events.iter().map(|e| e.service_date).max(),
        ) {
            (Some(lo), Some(hi)) => Some((lo, hi)),
            _ => None,
        };

        Ok(Store {
            network,
            events,
            route_days,
            stop_order,
            stop_days,
            fares: tallies,
            span,
        })
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    /// All events, ordered by route declaration, date, trip id, and visit order.
    pub fn events(&self) -> &[StopEvent] {
        &self.events
    }

    pub fn fare_tallies(&self) -> impl Iterator<Item = &FareTally> {
        self.fares.values()
    }

    pub fn fare_tally(&self, stop_id: &str) -> Result<Option<&FareTally>, StoreError> {
        self.stop(stop_id)?;
        Ok(self.fares.get(stop_id))
    }

    /// First and last service date with any event, or `None` for an empty store.
    pub fn date_span(&self) -> Option<(NaiveDate, NaiveDate)> {
        self.span
    }

    pub fn stop(&self, id: &str) -> Result<&Stop, StoreError> {
        self.network.stop(id).ok_or_else(|| StoreError::UnknownStop(id.to_string()))
    }

    pub fn route(&self, id: &str) -> Result<&Route, StoreError> {
        self.network.route(id).ok_or_else(|| StoreError::UnknownRoute(id.to_string()))
    }

    /// Stops ordered by name, then id.
    pub fn list_stops(&self) -> Vec<&Stop> {
        let mut stops: Vec<&Stop> = self.network.stops().iter().collect();
        stops.sort_by(|a, b| (&a.name, &a.id).cmp(&(&b.name, &b.id)));
        stops
    }

    /// Routes ordered by name, then id.
    pub fn list_routes(&self) -> Vec<&Route> {
        let mut routes: Vec<&Route> = self.network.routes().iter().collect();
        routes.sort_by(|a, b| (&a.name, &a.id).cmp(&(&b.name, &b.id)));
        routes
    }

    /// A route's stops in visit order.
    pub fn stops_of_route(&self, route_id: &str) -> Result<Vec<&Stop>, StoreError> {
        let route = self.route(route_id)?;
        Ok(route
            .stop_ids
            .iter()
            .map(|id| self.network.stop(id).expect("network validated"))
            .collect())
    }

    /// Events of one route, grouped by service date, for dates in `dates`.
    pub fn route_events(
        &self,
        route_id: &str,
        dates: RangeInclusive<NaiveDate>,
    ) -> Result<impl Iterator<Item = (NaiveDate, &[StopEvent])> + '_, StoreError> {
        let r = self
            .network
            .route_position(route_id)
            .ok_or_else(|| StoreError::UnknownRoute(route_id.to_string()))?;
        Ok(self
            .route_days
            .range((r, *dates.start())..=(r, *dates.end()))
            .map(|(&(_, date), range)| (date, &self.events[range.clone()])))
    }

    /// Events of one route on one date, ordered by trip id then visit order.
    pub fn route_day(&self, route_id: &str, date: NaiveDate) -> Result<&[StopEvent], StoreError> {
        let r = self
            .network
            .route_position(route_id)
            .ok_or_else(|| StoreError::UnknownRoute(route_id.to_string()))?;
        Ok(self
            .route_days
            .get(&(r, date))
            .map_or(&[][..], |range| &self.events[range.clone()]))
    }

    /// Events of one trip on one date, in visit order.
    pub fn trip_day(&self, route_id: &str, trip_id: &str, date: NaiveDate) -> Result<&[StopEvent], StoreError> {
        let day = self.route_day(route_id, date)?;
        let lo = day.partition_point(|e| e.trip_id.as_str() < trip_id);
        let hi = day.partition_point(|e| e.trip_id.as_str() <= trip_id);
        Ok(&day[lo..hi])
    }

    /// Events at one stop (any route), grouped by service date, for dates in `dates`.
    pub fn stop_events(
        &self,
        stop_id: &str,
        dates: RangeInclusive<NaiveDate>,
    ) -> Result<impl Iterator<Item = (NaiveDate, StopDay<'_>)> + '_, StoreError> {
        let s = self
            .network
            .stop_position(stop_id)
            .ok_or_else(|| StoreError::UnknownStop(stop_id.to_string()))?;
        Ok(self
            .stop_days
            .range((s, *dates.start())..=(s, *dates.end()))
            .map(|(&(_, date), range)| {
                (
                    date,
                    StopDay {
                        store: self,
                        indices: &self.stop_order[range.clone()],
                    },
                )
            }))
    }

    /// Events at one stop on one date.
    pub fn stop_day(&self, stop_id: &str, date: NaiveDate) -> Result<StopDay<'_>, StoreError> {
        let s = self
            .network
            .stop_position(stop_id)
            .ok_or_else(|| StoreError::UnknownStop(stop_id.to_string()))?;
        let indices = self
            .stop_days
            .get(&(s, date))
            .map_or(&[][..], |range| &self.stop_order[range.clone()]);
        Ok(StopDay { store: self, indices })
    }
}

/// The events at one stop on one date, in store order.
#[derive(Debug, Clone, Copy)]
pub struct StopDay<'a> {
    store: &'a Store,
    indices: &'a [u32],
}

impl<'a> StopDay<'a> {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &'a StopEvent> + 'a {
        let events = &self.store.events;
        self.indices.iter().map(move |&i| &events[i as usize])
    }
}
