use chrono::NaiveDate;

use super::{AggregateError, BinScale};
use crate::model::StopEvent;
use crate::store::Store;
use crate::time::ServiceTime;

/// Squares drawn per cell are capped here; boardings above it are still
/// reported in full.
pub const MAX_DISPLAY_SQUARES: u32 = 36;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridCell {
    pub boardings: Option<u32>,
    /// `min(boardings, 36)`, absent when boardings are.
    pub display_count: Option<u32>,
    pub abs_delta_seconds: u32,
    pub bin: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripRow {
    pub trip_id: String,
    /// Earliest scheduled departure of the trip that day.
    pub start: ServiceTime,
    /// One entry per route stop, in visit order; `None` where the trip has no event.
    pub cells: Vec<Option<GridCell>>,
}

/// Trips of one route on one date against the route's stops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripGrid {
    pub route_id: String,
    pub date: NaiveDate,
    pub stop_ids: Vec<String>,
    /// Ordered by start time, then trip id.
    pub trips: Vec<TripRow>,
}

fn cell(event: &StopEvent, scale: &BinScale) -> GridCell {
    let abs = event.delta_seconds.unsigned_abs();
    GridCell {
        boardings: event.boardings(),
        display_count: event.boardings().map(|n| n.min(MAX_DISPLAY_SQUARES)),
        abs_delta_seconds: abs,
        bin: scale.bin(f64::from(abs)),
    }
}

pub fn trip_grid(store: &Store, route_id: &str, date: NaiveDate) -> Result<TripGrid, AggregateError> {
    let route = store.route(route_id)?;
    let day = store.route_day(route_id, date)?;
    let scale = BinScale::adherence();
    let network = store.network();

    let mut trips = Vec::new();
    // The route-day slice is ordered by trip id, then visit order.
    for group in day.chunk_by(|a, b| a.trip_id == b.trip_id) {
        let mut cells = vec![None; route.stop_ids.len()];
        for e in group {
            let pos = network
                .visit_position(route_id, &e.stop_id)
                .expect("store events lie on their route");
            cells[pos] = Some(cell(e, &scale));
        }
        trips.push(TripRow {
            trip_id: group[0].trip_id.clone(),
            start: group.iter().map(|e| e.scheduled_departure).min().expect("non-empty group"),
            cells,
        });
    }
    trips.sort_by(|a, b| (a.start, &a.trip_id).cmp(&(b.start, &b.trip_id)));

    Ok(TripGrid {
        route_id: route.id.clone(),
        date,
        stop_ids: route.stop_ids.clone(),
        trips,
    })
}
