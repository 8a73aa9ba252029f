//! Shared fixtures and brute-force reference implementations.
//!
//! The oracles below recompute every aggregate from the flat event list with
//! no use of the store's indices, so a disagreement points at the indexed
//! path.

#![allow(dead_code)]

pub mod schema;

use std::collections::{BTreeMap, BTreeSet};

use busview::model::{FareContribution, Network, PassengerCounts, Route, Stop, StopEvent};
use busview::time::ServiceTime;
use busview::Store;
use chrono::{Days, NaiveDate};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ADHERENCE_EDGES: [f64; 4] = [60.0, 180.0, 300.0, 600.0];
pub const DISPLAY_CAP: u32 = 36;

pub fn base_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2011, 1, 30).unwrap()
}

/// A random store with at most `max_events` events. Sizes, network shape,
/// deltas (including post-midnight times), and count coverage all vary with
/// the seed.
pub fn random_store(seed: u64, max_events: usize) -> Store {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_stops = rng.random_range(1..=12);
    let stops: Vec<Stop> = (0..n_stops)
        .map(|i| Stop {
            id: format!("S{i}"),
            name: format!("{} Stop {i}", ["Main", "Oak", "main st", "Gate"][rng.random_range(0..4)]),
            lat: rng.random_range(-90.0..=90.0),
            lon: rng.random_range(-180.0..=180.0),
        })
        .collect();
    let n_routes = rng.random_range(1..=4);
    let routes: Vec<Route> = (0..n_routes)
        .map(|r| {
            let mut ids: Vec<String> = stops.iter().map(|s| s.id.clone()).collect();
            ids.shuffle(&mut rng);
            ids.truncate(rng.random_range(1..=n_stops));
            Route {
                id: format!("R{r}"),
                name: format!("Route {r}"),
                stop_ids: ids,
            }
        })
        .collect();
    let network = Network::new(stops, routes.clone()).unwrap();

    let days = rng.random_range(1..=8u64);
    let target = rng.random_range(0..=max_events);
    let mut seen = BTreeSet::new();
    let mut events = Vec::new();
    let mut attempts = 0;
    while events.len() < target && attempts < target * 4 {
        attempts += 1;
        let route = routes.choose(&mut rng).unwrap();
        let trip = format!("T{}", rng.random_range(0..12));
        let stop = route.stop_ids.choose(&mut rng).unwrap().clone();
        let date = base_date() + Days::new(rng.random_range(0..days));
        if !seen.insert((route.id.clone(), trip.clone(), stop.clone(), date)) {
            continue;
        }
        let scheduled = ServiceTime::from_seconds(rng.random_range(0..=ServiceTime::MAX.seconds())).unwrap();
        let wanted: i64 = match rng.random_range(0..10) {
            0 => 0,
            1 => -rng.random_range(0..=900),
            2 => rng.random_range(1000..=3600),
            _ => rng.random_range(-300..=900),
        };
        let actual_secs = (i64::from(scheduled.seconds()) + wanted).clamp(0, i64::from(ServiceTime::MAX.seconds()));
        let actual = ServiceTime::from_seconds(actual_secs as u32).unwrap();
        let counts = rng.random_bool(0.7).then(|| PassengerCounts {
            fare_count: rng.random_range(0..=5),
            boardings: if rng.random_bool(0.1) { rng.random_range(0..=500) } else { rng.random_range(0..=20) },
            alightings: rng.random_range(0..=20),
        });
        events.push(StopEvent {
            route_id: route.id.clone(),
            trip_id: trip,
            stop_id: stop,
            service_date: date,
            scheduled_departure: scheduled,
            actual_departure: actual,
            delta_seconds: actual.delta_from(scheduled) as i32,
            over_capacity: counts.is_some_and(|c| c.boardings > 60),
            counts,
        });
    }
    events.shuffle(&mut rng);

    let categories = ["student", "faculty_staff", "full", "senior"];
    let fares = (0..rng.random_range(0..30))
        .map(|_| FareContribution {
            stop_id: network.stops().choose(&mut rng).unwrap().id.clone(),
            category: categories.choose(&mut rng).unwrap().to_string(),
            count: rng.random_range(0..=9),
        })
        .collect();

    Store::build(network, events, fares).unwrap()
}

pub fn rel_close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

pub fn bin_of(value: f64, edges: &[f64; 4]) -> u8 {
    let mut bin = 0;
    for e in edges {
        if value >= *e {
            bin += 1;
        }
    }
    bin
}

/// 20/40/60/80th nearest-rank percentiles with every edge strictly above
/// the previous one (and the first strictly above the minimum).
pub fn quintile_edges(values: &[f64]) -> [f64; 4] {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut edges = [0.0; 4];
    let mut prev = v[0];
    for (i, p) in [20usize, 40, 60, 80].into_iter().enumerate() {
        let rank = ((p * v.len()) as f64 / 100.0).ceil().max(1.0) as usize;
        let mut e = v[rank - 1];
        if e <= prev {
            e = prev.next_up();
        }
        edges[i] = e;
        prev = e;
    }
    edges
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleDay {
    pub date: NaiveDate,
    pub value: f64,
    pub bin: u8,
    pub events: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSeries {
    pub edges: Option<[f64; 4]>,
    pub days: Vec<OracleDay>,
}

/// Brute-force calendar series. `stop` selects stop scope, otherwise route.
pub fn oracle_daily(events: &[StopEvent], stop: bool, id: &str, ridership: bool, from: NaiveDate, to: NaiveDate) -> OracleSeries {
    let mut per_day: BTreeMap<NaiveDate, Vec<f64>> = BTreeMap::new();
    for e in events {
        let in_scope = if stop { e.stop_id == id } else { e.route_id == id };
        if !in_scope || e.service_date < from || e.service_date > to {
            continue;
        }
        let sample = if ridership {
            match &e.counts {
                Some(c) => f64::from(c.boardings),
                None => continue,
            }
        } else {
            f64::from(e.delta_seconds).abs()
        };
        per_day.entry(e.service_date).or_default().push(sample);
    }
    let raw: Vec<(NaiveDate, f64, u32)> = per_day
        .into_iter()
        .map(|(d, xs)| (d, xs.iter().sum::<f64>() / xs.len() as f64, xs.len() as u32))
        .collect();
    let edges = if ridership {
        (!raw.is_empty()).then(|| quintile_edges(&raw.iter().map(|r| r.1).collect::<Vec<_>>()))
    } else {
        Some(ADHERENCE_EDGES)
    };
    OracleSeries {
        edges,
        days: raw
            .into_iter()
            .map(|(date, value, events)| OracleDay {
                date,
                value,
                bin: bin_of(value, edges.as_ref().unwrap()),
                events,
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleCell {
    pub n: Option<u32>,
    pub display: Option<u32>,
    pub abs_delta: u32,
    pub bin: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleTrip {
    pub trip: String,
    pub start_seconds: u32,
    pub cells: Vec<Option<OracleCell>>,
}

/// Brute-force trip grid: rows are the trips of the route-day ordered by
/// earliest scheduled departure then id; columns follow the route's stops.
pub fn oracle_grid(events: &[StopEvent], route: &Route, date: NaiveDate) -> Vec<OracleTrip> {
    let mut trips: BTreeMap<&str, Vec<&StopEvent>> = BTreeMap::new();
    for e in events.iter().filter(|e| e.route_id == route.id && e.service_date == date) {
        trips.entry(&e.trip_id).or_default().push(e);
    }
    let mut rows: Vec<OracleTrip> = trips
        .into_iter()
        .map(|(trip, evs)| OracleTrip {
            trip: trip.to_string(),
            start_seconds: evs.iter().map(|e| e.scheduled_departure.seconds()).min().unwrap(),
            cells: route
                .stop_ids
                .iter()
                .map(|s| {
                    evs.iter().find(|e| &e.stop_id == s).map(|e| {
                        let abs = (e.actual_departure.seconds() as i64 - e.scheduled_departure.seconds() as i64).unsigned_abs() as u32;
                        let n = e.counts.map(|c| c.boardings);
                        OracleCell {
                            n,
                            display: n.map(|n| if n > DISPLAY_CAP { DISPLAY_CAP } else { n }),
                            abs_delta: abs,
                            bin: bin_of(f64::from(abs), &ADHERENCE_EDGES),
                        }
                    })
                })
                .collect(),
        })
        .collect();
    rows.sort_by(|a, b| a.start_seconds.cmp(&b.start_seconds).then(a.trip.cmp(&b.trip)));
    rows
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleHour {
    pub hour: u32,
    pub early: f64,
    pub late: f64,
    pub abs: f64,
    pub boardings: Option<f64>,
    pub events: u32,
}

/// Brute-force hourly detail for one stop and date.
pub fn oracle_hourly(events: &[StopEvent], stop: &str, date: NaiveDate) -> Vec<OracleHour> {
    let mut hours: BTreeMap<u32, Vec<&StopEvent>> = BTreeMap::new();
    for e in events.iter().filter(|e| e.stop_id == stop && e.service_date == date) {
        hours.entry(e.scheduled_departure.seconds() / 3600).or_default().push(e);
    }
    hours
        .into_iter()
        .map(|(hour, evs)| {
            let n = evs.len() as f64;
            let early: f64 = evs.iter().map(|e| f64::from((-e.delta_seconds).max(0))).sum();
            let late: f64 = evs.iter().map(|e| f64::from(e.delta_seconds.max(0))).sum();
            let abs: f64 = evs.iter().map(|e| f64::from(e.delta_seconds.abs())).sum();
            let counted: Vec<f64> = evs.iter().filter_map(|e| e.counts.map(|c| f64::from(c.boardings))).collect();
            OracleHour {
                hour,
                early: early / n,
                late: late / n,
                abs: abs / n,
                boardings: (!counted.is_empty()).then(|| counted.iter().sum::<f64>() / counted.len() as f64),
                events: evs.len() as u32,
            }
        })
        .collect()
}

/// Every (scope kind, id) pair, and the full date span, of a store.
pub fn scopes(store: &Store) -> Vec<(bool, String)> {
    let net = store.network();
    net.stops()
        .iter()
        .map(|s| (true, s.id.clone()))
        .chain(net.routes().iter().map(|r| (false, r.id.clone())))
        .collect()
}

pub fn dates(store: &Store) -> Vec<NaiveDate> {
    let set: BTreeSet<NaiveDate> = store.events().iter().map(|e| e.service_date).collect();
    set.into_iter().collect()
}

/// Compares daily_metric, trip_grid, and hourly_stop_detail with the oracles
/// for every scope, metric, and date of `store`. Integers must match
/// exactly, means within 1e-9 relative.
pub fn check_against_oracles(store: &Store) -> Result<(), String> {
    use busview::aggregate::{daily_metric, hourly_stop_detail, trip_grid, Metric, Scope};

    let events = store.events();
    let (lo, hi) = match store.date_span() {
        Some(span) => span,
        None => (base_date(), base_date()),
    };
    for (is_stop, id) in scopes(store) {
        for ridership in [false, true] {
            let scope = if is_stop { Scope::Stop(id.clone()) } else { Scope::Route(id.clone()) };
            let metric = if ridership { Metric::Ridership } else { Metric::Adherence };
            let got = daily_metric(store, &scope, metric, None).map_err(|e| e.to_string())?;
            let want = oracle_daily(events, is_stop, &id, ridership, lo, hi);
            let ctx = format!("{scope:?} {metric:?}");
            if got.scale.map(|s| s.edges) != want.edges {
                return Err(format!("{ctx}: edges {:?} vs {:?}", got.scale, want.edges));
            }
            if got.days.len() != want.days.len() {
                return Err(format!("{ctx}: {} days vs {}", got.days.len(), want.days.len()));
            }
            for (g, w) in got.days.iter().zip(&want.days) {
                if g.date != w.date || g.event_count != w.events || g.bin != w.bin || !rel_close(g.value, w.value) {
                    return Err(format!("{ctx}: {g:?} vs {w:?}"));
                }
            }
        }
    }

    let dates = dates(store);
    for route in store.network().routes() {
        for &date in &dates {
            let got = trip_grid(store, &route.id, date).map_err(|e| e.to_string())?;
            let want = oracle_grid(events, route, date);
            if got.stop_ids != route.stop_ids || got.trips.len() != want.len() {
                return Err(format!("grid {} {date}: shape", route.id));
            }
            for (g, w) in got.trips.iter().zip(&want) {
                let cells: Vec<Option<OracleCell>> = g
                    .cells
                    .iter()
                    .map(|c| {
                        c.as_ref().map(|c| OracleCell {
                            n: c.boardings,
                            display: c.display_count,
                            abs_delta: c.abs_delta_seconds,
                            bin: c.bin,
                        })
                    })
                    .collect();
                if g.trip_id != w.trip || g.start.seconds() != w.start_seconds || cells != w.cells {
                    return Err(format!("grid {} {date}: {g:?} vs {w:?}", route.id));
                }
            }
        }
    }

    for stop in store.network().stops() {
        for &date in &dates {
            let got = hourly_stop_detail(store, &stop.id, date).map_err(|e| e.to_string())?;
            let want = oracle_hourly(events, &stop.id, date);
            if got.len() != want.len() {
                return Err(format!("hourly {} {date}: {} vs {} buckets", stop.id, got.len(), want.len()));
            }
            for (g, w) in got.iter().zip(&want) {
                let boardings_ok = match (g.mean_boardings, w.boardings) {
                    (None, None) => true,
                    (Some(a), Some(b)) => rel_close(a, b),
                    _ => false,
                };
                if g.hour != w.hour
                    || g.event_count != w.events
                    || !rel_close(g.mean_earliness_s, w.early)
                    || !rel_close(g.mean_lateness_s, w.late)
                    || !rel_close(g.mean_abs_delta_s, w.abs)
                    || !boardings_ok
                {
                    return Err(format!("hourly {} {date}: {g:?} vs {w:?}", stop.id));
                }
            }
        }
    }
    Ok(())
}

/// Every API request a client could make against `store`, with the store's
/// own ids and dates, as `(path, query)` pairs.
pub fn all_requests(store: &Store) -> Vec<(String, String)> {
    let enc = |s: &str| form_urlencoded::byte_serialize(s.as_bytes()).collect::<String>();
    let mut out = vec![
        ("/api/stops".to_string(), String::new()),
        ("/api/routes".to_string(), String::new()),
        ("/api/search".to_string(), String::new()),
        ("/api/search".to_string(), "q=main".to_string()),
        ("/api/search".to_string(), "q=ST".to_string()),
    ];
    let dates = dates(store);
    for (is_stop, id) in scopes(store) {
        let kind = if is_stop { "stop" } else { "route" };
        for metric in ["adherence", "ridership"] {
            out.push(("/api/calendar".into(), format!("scope={kind}&id={}&metric={metric}", enc(&id))));
        }
        if let (Some(first), Some(last)) = (dates.first(), dates.last()) {
            out.push(("/api/calendar".into(), format!("scope={kind}&id={}&from={last}&to={last}", enc(&id))));
            out.push(("/api/calendar".into(), format!("scope={kind}&id={}&metric=ridership&from={first}", enc(&id))));
        }
        if is_stop {
            out.push(("/api/fares".into(), format!("stop={}", enc(&id))));
            for d in &dates {
                out.push(("/api/stop-day".into(), format!("stop={}&date={d}", enc(&id))));
            }
        } else {
            out.push((format!("/api/routes/{id}"), String::new()));
            for d in &dates {
                out.push(("/api/trip-grid".into(), format!("route={}&date={d}", enc(&id))));
            }
        }
    }
    out
}

fn at(h: u32, m: u32, s: u32) -> ServiceTime {
    ServiceTime::from_hms(h, m, s).unwrap()
}

fn fixture_event(trip: &str, stop: &str, date: NaiveDate, sched: ServiceTime, delta: i32, boardings: Option<u32>) -> StopEvent {
    let actual = ServiceTime::from_seconds((i64::from(sched.seconds()) + i64::from(delta)) as u32).unwrap();
    StopEvent {
        route_id: "R1".into(),
        trip_id: trip.into(),
        stop_id: stop.into(),
        service_date: date,
        scheduled_departure: sched,
        actual_departure: actual,
        delta_seconds: delta,
        counts: boardings.map(|b| PassengerCounts {
            fare_count: b.min(3),
            boardings: b,
            alightings: 1,
        }),
        over_capacity: boardings.is_some_and(|b| b > 60),
    }
}

pub fn fixture_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2011, 3, 2).unwrap()
}

/// Small hand-checked store: route R1 visits S5 then S7 on two days. On
/// 2011-03-02 trip T1 leaves S5 ten minutes early and T2 ten minutes late.
pub fn fixture_store() -> Store {
    let stop = |id: &str, name: &str| Stop {
        id: id.into(),
        name: name.into(),
        lat: 37.23,
        lon: -80.42,
    };
    let network = Network::new(
        vec![stop("S5", "Burruss Hall"), stop("S7", "Main St & Roanoke St"), stop("S9", "Unserved")],
        vec![Route {
            id: "R1".into(),
            name: "Hokie Express".into(),
            stop_ids: vec!["S5".into(), "S7".into()],
        }],
    )
    .unwrap();
    let d1 = fixture_date();
    let d2 = d1.succ_opt().unwrap();
    let events = vec![
        fixture_event("T1", "S5", d1, at(8, 0, 0), -600, Some(4)),
        fixture_event("T1", "S7", d1, at(8, 10, 0), 30, None),
        fixture_event("T2", "S5", d1, at(8, 30, 0), 600, Some(120)),
        fixture_event("T2", "S7", d1, at(8, 40, 0), 200, Some(0)),
        fixture_event("T3", "S5", d1, at(24, 15, 0), 45, Some(2)),
        fixture_event("T1", "S5", d2, at(8, 0, 0), 0, Some(6)),
    ];
    let fares = vec![
        FareContribution {
            stop_id: "S5".into(),
            category: "student".into(),
            count: 5,
        },
        FareContribution {
            stop_id: "S5".into(),
            category: "full".into(),
            count: 2,
        },
        FareContribution {
            stop_id: "S5".into(),
            category: "faculty_staff".into(),
            count: 5,
        },
    ];
    Store::build(network, events, fares).unwrap()
}

/// Every documented client error against [`fixture_store`]:
/// `(path, query, status, code)`.
pub const ERROR_CASES: &[(&str, &str, u16, &str)] = &[
    ("/api/calendar", "metric=velocity", 400, "bad_metric"),
    ("/api/calendar", "scope=route&id=R1&metric=velocity", 400, "bad_metric"),
    ("/api/calendar", "id=R1", 400, "missing_scope"),
    ("/api/calendar", "scope=line&id=R1", 400, "bad_scope"),
    ("/api/calendar", "scope=route", 400, "missing_id"),
    ("/api/calendar", "scope=route&id=R1&from=2011-02-30", 400, "bad_date"),
    ("/api/calendar", "scope=route&id=R1&to=03/02/2011", 400, "bad_date"),
    ("/api/calendar", "scope=route&id=R1&from=2011-03-05&to=2011-03-01", 400, "bad_range"),
    ("/api/calendar", "scope=route&id=R404", 404, "unknown_route"),
    ("/api/calendar", "scope=stop&id=S404", 404, "unknown_stop"),
    ("/api/trip-grid", "date=2011-03-02", 400, "missing_route"),
    ("/api/trip-grid", "route=R1", 400, "missing_date"),
    ("/api/trip-grid", "route=R1&date=yesterday", 400, "bad_date"),
    ("/api/trip-grid", "route=R404&date=2011-03-02", 404, "unknown_route"),
    ("/api/stop-day", "date=2011-03-02", 400, "missing_stop"),
    ("/api/stop-day", "stop=S5", 400, "missing_date"),
    ("/api/stop-day", "stop=S5&date=2011-3-2x", 400, "bad_date"),
    ("/api/stop-day", "stop=S404&date=2011-03-02", 404, "unknown_stop"),
    ("/api/fares", "", 400, "missing_stop"),
    ("/api/fares", "stop=S404", 404, "unknown_stop"),
    ("/api/routes/R404", "", 404, "unknown_route"),
    ("/api/velocity", "", 404, "not_found"),
];

/// Export arguments and the API request they stand for.
pub fn export_cases(store: &Store) -> Vec<(Vec<String>, String, String)> {
    let r = &store.network().routes()[0].id;
    let st = &store.network().stops()[0].id;
    let d = dates(store)[0].to_string();
    let v = |xs: &[&str]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    vec![
        (v(&["--what", "stops"]), "/api/stops".into(), String::new()),
        (v(&["--what", "routes"]), "/api/routes".into(), String::new()),
        (v(&["--what", "route", "--id", r]), format!("/api/routes/{r}"), String::new()),
        (v(&["--what", "search", "--q", "main st"]), "/api/search".into(), "q=main+st".into()),
        (
            v(&["--what", "calendar", "--scope", "route", "--id", r, "--metric", "ridership"]),
            "/api/calendar".into(),
            format!("scope=route&id={r}&metric=ridership"),
        ),
        (
            v(&["--what", "calendar", "--scope", "stop", "--id", st, "--from", &d, "--to", &d]),
            "/api/calendar".into(),
            format!("scope=stop&id={st}&from={d}&to={d}"),
        ),
        (v(&["--what", "trip-grid", "--route", r, "--date", &d]), "/api/trip-grid".into(), format!("route={r}&date={d}")),
        (v(&["--what", "stop-day", "--stop", st, "--date", &d]), "/api/stop-day".into(), format!("stop={st}&date={d}")),
        (v(&["--what", "fares", "--stop", st]), "/api/fares".into(), format!("stop={st}")),
    ]
}
