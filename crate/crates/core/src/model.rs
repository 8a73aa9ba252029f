//! Stop, route, and trip level entities.

use std::collections::{BTreeMap, HashMap};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::time::ServiceTime;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stop {
    pub id: String,
    pub name: String,
    pub lat: f64,
    pub lon: f64,
}

/// A named, ordered sequence of stops. `stop_ids` is the visit order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub id: String,
    pub name: String,
    #[serde(rename = "stops")]
    pub stop_ids: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum NetworkError {
    #[error("network document is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("duplicate stop id {0:?}")]
    DuplicateStop(String),
    #[error("duplicate route id {0:?}")]
    DuplicateRoute(String),
    #[error("route {route:?} references undeclared stop {stop:?}")]
    DanglingStop { route: String, stop: String },
    #[error("route {route:?} visits stop {stop:?} more than once")]
    RepeatedStop { route: String, stop: String },
    #[error("route {0:?} has no stops")]
    EmptyRoute(String),
    #[error("stop {0:?} has coordinates outside lat [-90, 90] / lon [-180, 180]")]
    BadCoordinate(String),
    #[error("empty id in network document")]
    EmptyId,
}

/// Validated stops and routes with id lookups.
#[derive(Debug, Clone, Default)]
pub struct Network {
    stops: Vec<Stop>,
    routes: Vec<Route>,
    stop_index: HashMap<String, usize>,
    route_index: HashMap<String, usize>,
    // Per route: stop id -> visit position.
    route_positions: Vec<HashMap<String, usize>>,
}

#[derive(Serialize, Deserialize)]
struct NetworkDocument {
    stops: Vec<Stop>,
    routes: Vec<Route>,
}

impl Network {
    pub fn new(stops: Vec<Stop>, routes: Vec<Route>) -> Result<Self, NetworkError> {
        let mut stop_index = HashMap::with_capacity(stops.len());
        for (i, stop) in stops.iter().enumerate() {
            if stop.id.is_empty() {
                return Err(NetworkError::EmptyId);
            }
            if !(-90.0..=90.0).contains(&stop.lat) || !(-180.0..=180.0).contains(&stop.lon) {
                return Err(NetworkError::BadCoordinate(stop.id.clone()));
            }
            if stop_index.insert(stop.id.clone(), i).is_some() {
                return Err(NetworkError::DuplicateStop(stop.id.clone()));
            }
        }

        let mut route_index = HashMap::with_capacity(routes.len());
        let mut route_positions = Vec::with_capacity(routes.len());
        for (i, route) in routes.iter().enumerate() {
            if route.id.is_empty() {
                return Err(NetworkError::EmptyId);
            }
            if route_index.insert(route.id.clone(), i).is_some() {
                return Err(NetworkError::DuplicateRoute(route.id.clone()));
            }
            if route.stop_ids.is_empty() {
                return Err(NetworkError::EmptyRoute(route.id.clone()));
            }
            let mut positions = HashMap::with_capacity(route.stop_ids.len());
            for (pos, stop) in route.stop_ids.iter().enumerate() {
                if !stop_index.contains_key(stop) {
                    return Err(NetworkError::DanglingStop {
                        route: route.id.clone(),
                        stop: stop.clone(),
                    });
                }
                if positions.insert(stop.clone(), pos).is_some() {
                    return Err(NetworkError::RepeatedStop {
                        route: route.id.clone(),
                        stop: stop.clone(),
                    });
                }
            }
            route_positions.push(positions);
        }

        Ok(Network {
            stops,
            routes,
            stop_index,
            route_index,
            route_positions,
        })
    }

    /// Parses and validates a `network.json` document.
    pub fn from_json(bytes: &[u8]) -> Result<Self, NetworkError> {
        let doc: NetworkDocument = serde_json::from_slice(bytes)?;
        Network::new(doc.stops, doc.routes)
    }

    pub fn to_json(&self) -> String {
        let doc = NetworkDocument {
            stops: self.stops.clone(),
            routes: self.routes.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("network serializes")
    }

    /// Stops in declaration order.
    pub fn stops(&self) -> &[Stop] {
        &self.stops
    }

    /// Routes in declaration order.
    pub fn routes(&self) -> &[Route] {
        &self.routes
    }

    pub fn stop(&self, id: &str) -> Option<&Stop> {
        self.stop_index.get(id).map(|&i| &self.stops[i])
    }

    pub fn route(&self, id: &str) -> Option<&Route> {
        self.route_index.get(id).map(|&i| &self.routes[i])
    }

    pub(crate) fn stop_position(&self, id: &str) -> Option<usize> {
        self.stop_index.get(id).copied()
    }

    pub(crate) fn route_position(&self, id: &str) -> Option<usize> {
        self.route_index.get(id).copied()
    }

    /// Visit position of `stop` on `route`, if the route serves it.
    pub fn visit_position(&self, route: &str, stop: &str) -> Option<usize> {
        let r = *self.route_index.get(route)?;
        self.route_positions[r].get(stop).copied()
    }
}

/// Passenger counts observed at one stop visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassengerCounts {
    pub fare_count: u32,
    pub boardings: u32,
    pub alightings: u32,
}

/// One vehicle's visit to one stop on one trip on one service date.
///
/// `delta_seconds` is always `actual_departure - scheduled_departure`;
/// negative means early. `counts` is `None` when no passenger-count record
/// could be aligned with this visit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopEvent {
    pub route_id: String,
    pub trip_id: String,
    pub stop_id: String,
    pub service_date: NaiveDate,
    pub scheduled_departure: ServiceTime,
    pub actual_departure: ServiceTime,
    pub delta_seconds: i32,
    pub counts: Option<PassengerCounts>,
    pub over_capacity: bool,
}

impl StopEvent {
    pub fn boardings(&self) -> Option<u32> {
        self.counts.map(|c| c.boardings)
    }

    pub fn alightings(&self) -> Option<u32> {
        self.counts.map(|c| c.alightings)
    }

    pub fn fare_count(&self) -> Option<u32> {
        self.counts.map(|c| c.fare_count)
    }

    pub fn earliness_seconds(&self) -> u32 {
        if self.delta_seconds < 0 {
            self.delta_seconds.unsigned_abs()
        } else {
            0
        }
    }

    pub fn lateness_seconds(&self) -> u32 {
        if self.delta_seconds > 0 {
            self.delta_seconds.unsigned_abs()
        } else {
            0
        }
    }
}

/// A fare-category count attributed to a stop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FareContribution {
    pub stop_id: String,
    pub category: String,
    pub count: u64,
}

/// Per-stop counts by fare category, summed over all dates and routes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FareTally {
    pub stop_id: String,
    pub counts: BTreeMap<String, u64>,
}

impl FareTally {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}
