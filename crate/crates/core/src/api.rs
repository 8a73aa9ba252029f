//! JSON API: request grammar, response shapes, and the dispatcher shared by
//! the HTTP server, `busview export`, and the C interface.
//!
//! Every list in a response carries a fixed ordering, and bodies are
//! serialized compactly, so the same request against the same store always
//! yields the same bytes.
//!
//! | path | query | body |
//! |------|-------|------|
//! | `/api/stops` | | `[{id, name, lat, lon}]` by name, id |
//! | `/api/routes` | | `[{id, name, stop_count}]` by name, id |
//! | `/api/routes/{id}` | | `{id, name, stops: [{id, name, lat, lon}]}` in visit order |
//! | `/api/search` | `q` | `[{id, name}]` |
//! | `/api/calendar` | `scope, id, metric, from, to` | `{scope, id, metric, bins: {edges} \| null, days: [{date, value, bin, events}]}` |
//! | `/api/trip-grid` | `route, date` | `{route, date, stops, trips: [{trip, start, cells: [{n?, display, abs_delta_s, bin} \| null]}]}` |
//! | `/api/stop-day` | `stop, date` | `{stop, date, hours: [{hour, early_s, late_s, abs_s, boardings?, events}]}` |
//! | `/api/fares` | `stop` | `{stop, total, entries: [{category, count, fraction}]}` |
//!
//! Errors are `{status, code, message}` with status 400 (malformed
//! parameters) or 404 (unknown path or id).

use std::collections::BTreeMap;
use std::fmt;

use chrono::NaiveDate;
use serde::Serialize;

use crate::aggregate::{
    daily_metric, fare_distribution, hourly_stop_detail, search_stops, trip_grid, AggregateError, DateRange, Metric,
    Scope,
};
use crate::store::Store;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApiError {
    pub status: u16,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status: 400,
            code,
            message: message.into(),
        }
    }

    fn not_found(code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status: 404,
            code,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        ApiError {
            status: 500,
            code: "internal",
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("error serializes")
    }
}

impl fmt::Display for ApiError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", self.status, self.code, self.message)
    }
}

impl std::error::Error for ApiError {}

impl From<AggregateError> for ApiError {
    fn from(e: AggregateError) -> Self {
        use crate::store::StoreError;
        match e {
            AggregateError::Store(StoreError::UnknownRoute(id)) => {
                ApiError::not_found("unknown_route", format!("no route with id {id:?}"))
            }
            AggregateError::Store(StoreError::UnknownStop(id)) => {
                ApiError::not_found("unknown_stop", format!("no stop with id {id:?}"))
            }
            AggregateError::EmptyRange { .. } => ApiError::bad_request("bad_range", e.to_string()),
            other => ApiError::internal(other.to_string()),
        }
    }
}

/// Decoded query string. The first occurrence of a repeated key wins.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryParams(BTreeMap<String, String>);

impl QueryParams {
    pub fn parse(raw: &str) -> Self {
        let mut map = BTreeMap::new();
        for (k, v) in form_urlencoded::parse(raw.as_bytes()) {
            map.entry(k.into_owned()).or_insert_with(|| v.into_owned());
        }
        QueryParams(map)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str).filter(|v| !v.is_empty())
    }

    fn require(&self, key: &str, code: &'static str) -> Result<&str, ApiError> {
        self.get(key)
            .ok_or_else(|| ApiError::bad_request(code, format!("query parameter `{key}` is required")))
    }

    fn date(&self, key: &str) -> Result<Option<NaiveDate>, ApiError> {
        self.get(key)
            .map(|v| {
                NaiveDate::parse_from_str(v, "%Y-%m-%d").map_err(|_| {
                    ApiError::bad_request("bad_date", format!("`{key}` must be an ISO-8601 date (YYYY-MM-DD), got {v:?}"))
                })
            })
            .transpose()
    }

    fn required_date(&self, key: &str) -> Result<NaiveDate, ApiError> {
        self.require(key, "missing_date")?;
        Ok(self.date(key)?.expect("present"))
    }
}

/// A validated calendar request. A missing `metric` means adherence; missing
/// `from`/`to` extend to the ends of the store's date span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CalendarQuery {
    pub scope: Scope,
    pub metric: Metric,
    pub from: Option<NaiveDate>,
    pub to: Option<NaiveDate>,
}

/// Validates calendar parameters, checking metric, scope, id, then dates.
pub fn parse_query(params: &QueryParams) -> Result<CalendarQuery, ApiError> {
    let metric = match params.get("metric") {
        None => Metric::Adherence,
        Some(m) => m.parse().map_err(|_| {
            ApiError::bad_request("bad_metric", format!("metric must be `adherence` or `ridership`, got {m:?}"))
        })?,
    };
    let scope_kind = params.require("scope", "missing_scope")?;
    if scope_kind != "stop" && scope_kind != "route" {
        return Err(ApiError::bad_request(
            "bad_scope",
            format!("scope must be `stop` or `route`, got {scope_kind:?}"),
        ));
    }
    let id = params.require("id", "missing_id")?.to_string();
    let scope = if scope_kind == "stop" { Scope::Stop(id) } else { Scope::Route(id) };
    let from = params.date("from")?;
    let to = params.date("to")?;
    if let (Some(f), Some(t)) = (from, to) {
        if f > t {
            return Err(ApiError::bad_request("bad_range", format!("`from` {f} is after `to` {t}")));
        }
    }
    Ok(CalendarQuery { scope, metric, from, to })
}

#[derive(Serialize)]
pub struct StopJson<'a> {
    pub id: &'a str,
    pub name: &'a str,
    pub lat: f64,
    pub lon: f64,
}

impl<'a> From<&'a crate::model::Stop> for StopJson<'a> {
    fn from(s: &'a crate::model::Stop) -> Self {
        StopJson {
            id: &s.id,
            name: &s.name,
            lat: s.lat,
            lon: s.lon,
        }
    }
}

#[derive(Serialize)]
struct RouteSummaryJson<'a> {
    id: &'a str,
    name: &'a str,
    stop_count: usize,
}

#[derive(Serialize)]
struct RouteJson<'a> {
    id: &'a str,
    name: &'a str,
    stops: Vec<StopJson<'a>>,
}

#[derive(Serialize)]
struct SearchHitJson {
    id: String,
    name: String,
}

#[derive(Serialize)]
struct BinsJson {
    edges: [f64; 4],
}

#[derive(Serialize)]
struct DayJson {
    date: NaiveDate,
    value: f64,
    bin: u8,
    events: u32,
}

#[derive(Serialize)]
struct CalendarJson<'a> {
    scope: &'static str,
    id: &'a str,
    metric: Metric,
    bins: Option<BinsJson>,
    days: Vec<DayJson>,
}

#[derive(Serialize)]
struct CellJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<u32>,
    display: Option<u32>,
    abs_delta_s: u32,
    bin: u8,
}

#[derive(Serialize)]
struct TripJson {
    trip: String,
    start: String,
    cells: Vec<Option<CellJson>>,
}

#[derive(Serialize)]
struct TripGridJson {
    route: String,
    date: NaiveDate,
    stops: Vec<String>,
    trips: Vec<TripJson>,
}

#[derive(Serialize)]
struct HourJson {
    hour: u32,
    early_s: f64,
    late_s: f64,
    abs_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    boardings: Option<f64>,
    events: u32,
}

#[derive(Serialize)]
struct StopDayJson<'a> {
    stop: &'a str,
    date: NaiveDate,
    hours: Vec<HourJson>,
}

#[derive(Serialize)]
struct FareEntryJson {
    category: String,
    count: u64,
    fraction: f64,
}

#[derive(Serialize)]
struct FaresJson<'a> {
    stop: &'a str,
    total: u64,
    entries: Vec<FareEntryJson>,
}

fn json<T: Serialize>(value: &T) -> Result<Vec<u8>, ApiError> {
    serde_json::to_vec(value).map_err(|e| ApiError::internal(e.to_string()))
}

fn not_found_path(path: &str) -> ApiError {
    ApiError::not_found("not_found", format!("no endpoint at {path}"))
}

/// Answers one API request. `path` starts with `/api/`; `query` is the raw
/// query string without the leading `?`.
pub fn handle(store: &Store, path: &str, query: &str) -> Result<Vec<u8>, ApiError> {
    let params = QueryParams::parse(query);
    let rest = path.strip_prefix("/api/").ok_or_else(|| not_found_path(path))?;
    match rest {
        "stops" => stops(store),
        "routes" => routes(store),
        "search" => search(store, &params),
        "calendar" => calendar(store, &parse_query(&params)?),
        "trip-grid" => grid(store, &params),
        "stop-day" => stop_day(store, &params),
        "fares" => fares(store, &params),
        _ => match rest.strip_prefix("routes/") {
            Some(id) if !id.is_empty() && !id.contains('/') => {
                let id = percent_decode(id);
                route(store, &id)
            }
            _ => Err(not_found_path(path)),
        },
    }
}

fn percent_decode(segment: &str) -> String {
    // Path segments use %XX escapes only; '+' stays literal.
    let escaped = segment.replace('+', "%2B");
    form_urlencoded::parse(format!("x={escaped}").as_bytes())
        .next()
        .map(|(_, v)| v.into_owned())
        .unwrap_or_default()
}

fn stops(store: &Store) -> Result<Vec<u8>, ApiError> {
    json(&store.list_stops().into_iter().map(StopJson::from).collect::<Vec<_>>())
}

fn routes(store: &Store) -> Result<Vec<u8>, ApiError> {
    let routes: Vec<_> = store
        .list_routes()
        .into_iter()
        .map(|r| RouteSummaryJson {
            id: &r.id,
            name: &r.name,
            stop_count: r.stop_ids.len(),
        })
        .collect();
    json(&routes)
}

fn route(store: &Store, id: &str) -> Result<Vec<u8>, ApiError> {
    let route = store
        .route(id)
        .map_err(|e| ApiError::from(AggregateError::from(e)))?;
    let stops = store
        .stops_of_route(id)
        .map_err(|e| ApiError::from(AggregateError::from(e)))?;
    json(&RouteJson {
        id: &route.id,
        name: &route.name,
        stops: stops.into_iter().map(StopJson::from).collect(),
    })
}

fn search(store: &Store, params: &QueryParams) -> Result<Vec<u8>, ApiError> {
    let hits: Vec<_> = search_stops(store, params.get("q").unwrap_or(""))
        .into_iter()
        .map(|h| SearchHitJson { id: h.id, name: h.name })
        .collect();
    json(&hits)
}

fn calendar(store: &Store, q: &CalendarQuery) -> Result<Vec<u8>, ApiError> {
    let range = match (q.from, q.to) {
        (None, None) => None,
        (from, to) => Some(DateRange::new(from.unwrap_or(NaiveDate::MIN), to.unwrap_or(NaiveDate::MAX))?),
    };
    let series = daily_metric(store, &q.scope, q.metric, range)?;
    json(&CalendarJson {
        scope: q.scope.kind(),
        id: q.scope.id(),
        metric: q.metric,
        bins: series.scale.map(|s| BinsJson { edges: s.edges }),
        days: series
            .days
            .into_iter()
            .map(|d| DayJson {
                date: d.date,
                value: d.value,
                bin: d.bin,
                events: d.event_count,
            })
            .collect(),
    })
}

fn grid(store: &Store, params: &QueryParams) -> Result<Vec<u8>, ApiError> {
    let route = params.require("route", "missing_route")?;
    let date = params.required_date("date")?;
    let grid = trip_grid(store, route, date)?;
    json(&TripGridJson {
        route: grid.route_id,
        date: grid.date,
        stops: grid.stop_ids,
        trips: grid
            .trips
            .into_iter()
            .map(|t| TripJson {
                trip: t.trip_id,
                start: t.start.to_string(),
                cells: t
                    .cells
                    .into_iter()
                    .map(|c| {
                        c.map(|c| CellJson {
                            n: c.boardings,
                            display: c.display_count,
                            abs_delta_s: c.abs_delta_seconds,
                            bin: c.bin,
                        })
                    })
                    .collect(),
            })
            .collect(),
    })
}

fn stop_day(store: &Store, params: &QueryParams) -> Result<Vec<u8>, ApiError> {
    let stop = params.require("stop", "missing_stop")?;
    let date = params.required_date("date")?;
    let hours = hourly_stop_detail(store, stop, date)?;
    json(&StopDayJson {
        stop,
        date,
        hours: hours
            .into_iter()
            .map(|h| HourJson {
                hour: h.hour,
                early_s: h.mean_earliness_s,
                late_s: h.mean_lateness_s,
                abs_s: h.mean_abs_delta_s,
                boardings: h.mean_boardings,
                events: h.event_count,
            })
            .collect(),
    })
}

fn fares(store: &Store, params: &QueryParams) -> Result<Vec<u8>, ApiError> {
    let stop = params.require("stop", "missing_stop")?;
    let dist = fare_distribution(store, stop)?;
    json(&FaresJson {
        stop,
        total: dist.total,
        entries: dist
            .entries
            .into_iter()
            .map(|e| FareEntryJson {
                category: e.category,
                count: e.count,
                fraction: e.fraction,
            })
            .collect(),
    })
}
