//! Shape checks for every 200 body of the JSON API.

use serde_json::{Map, Value};

type Check = Result<(), String>;

fn object<'a>(v: &'a Value, keys: &[&str], optional: &[&str], at: &str) -> Result<&'a Map<String, Value>, String> {
    let obj = v.as_object().ok_or_else(|| format!("{at}: not an object"))?;
    for k in keys {
        if !obj.contains_key(*k) {
            return Err(format!("{at}: missing key {k}"));
        }
    }
    for k in obj.keys() {
        if !keys.contains(&k.as_str()) && !optional.contains(&k.as_str()) {
            return Err(format!("{at}: unexpected key {k}"));
        }
    }
    Ok(obj)
}

fn string(v: &Value, at: &str) -> Result<String, String> {
    v.as_str().map(str::to_owned).ok_or_else(|| format!("{at}: not a string"))
}

fn uint(v: &Value, at: &str) -> Result<u64, String> {
    v.as_u64().ok_or_else(|| format!("{at}: not a nonnegative integer"))
}

fn number(v: &Value, at: &str) -> Result<f64, String> {
    v.as_f64().ok_or_else(|| format!("{at}: not a number"))
}

fn array<'a>(v: &'a Value, at: &str) -> Result<&'a Vec<Value>, String> {
    v.as_array().ok_or_else(|| format!("{at}: not an array"))
}

fn bin(v: &Value, at: &str) -> Check {
    match uint(v, at)? {
        0..=4 => Ok(()),
        b => Err(format!("{at}: bin {b} out of range")),
    }
}

fn iso_date(v: &Value, at: &str) -> Check {
    let s = string(v, at)?;
    chrono::NaiveDate::parse_from_str(&s, "%Y-%m-%d")
        .map(drop)
        .map_err(|_| format!("{at}: bad date {s}"))
}

fn service_time(v: &Value, at: &str) -> Check {
    let s = string(v, at)?;
    s.parse::<busview::time::ServiceTime>()
        .map(drop)
        .map_err(|_| format!("{at}: bad time {s}"))
}

pub fn stop(v: &Value, at: &str) -> Check {
    let o = object(v, &["id", "name", "lat", "lon"], &[], at)?;
    string(&o["id"], at)?;
    string(&o["name"], at)?;
    let lat = number(&o["lat"], at)?;
    let lon = number(&o["lon"], at)?;
    if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
        return Err(format!("{at}: coordinate out of range"));
    }
    Ok(())
}

pub fn stops(v: &Value) -> Check {
    array(v, "stops")?.iter().try_for_each(|s| stop(s, "stops[]"))
}

pub fn routes(v: &Value) -> Check {
    for r in array(v, "routes")? {
        let o = object(r, &["id", "name", "stop_count"], &[], "routes[]")?;
        string(&o["id"], "routes[].id")?;
        string(&o["name"], "routes[].name")?;
        uint(&o["stop_count"], "routes[].stop_count")?;
    }
    Ok(())
}

pub fn route(v: &Value) -> Check {
    let o = object(v, &["id", "name", "stops"], &[], "route")?;
    string(&o["id"], "route.id")?;
    string(&o["name"], "route.name")?;
    array(&o["stops"], "route.stops")?.iter().try_for_each(|s| stop(s, "route.stops[]"))
}

pub fn search(v: &Value) -> Check {
    for h in array(v, "search")? {
        let o = object(h, &["id", "name"], &[], "search[]")?;
        string(&o["id"], "search[].id")?;
        string(&o["name"], "search[].name")?;
    }
    Ok(())
}

pub fn calendar(v: &Value) -> Check {
    let o = object(v, &["scope", "id", "metric", "bins", "days"], &[], "calendar")?;
    let scope = string(&o["scope"], "calendar.scope")?;
    if scope != "stop" && scope != "route" {
        return Err(format!("calendar.scope: {scope}"));
    }
    string(&o["id"], "calendar.id")?;
    let metric = string(&o["metric"], "calendar.metric")?;
    if metric != "adherence" && metric != "ridership" {
        return Err(format!("calendar.metric: {metric}"));
    }
    let days = array(&o["days"], "calendar.days")?;
    match &o["bins"] {
        Value::Null if metric == "ridership" && days.is_empty() => {}
        Value::Null => return Err("calendar.bins: null with days present".into()),
        bins => {
            let b = object(bins, &["edges"], &[], "calendar.bins")?;
            let edges = array(&b["edges"], "calendar.bins.edges")?;
            let edges: Vec<f64> = edges.iter().map(|e| number(e, "edge")).collect::<Result<_, _>>()?;
            if edges.len() != 4 || !edges.windows(2).all(|w| w[0] < w[1]) || edges[0] < 0.0 {
                return Err(format!("calendar.bins.edges: {edges:?}"));
            }
        }
    }
    let mut last = None;
    for d in days {
        let day = object(d, &["date", "value", "bin", "events"], &[], "calendar.days[]")?;
        iso_date(&day["date"], "calendar.days[].date")?;
        let date = day["date"].as_str().unwrap().to_owned();
        if last.as_ref().is_some_and(|l: &String| *l >= date) {
            return Err("calendar.days: dates not strictly increasing".into());
        }
        last = Some(date);
        if number(&day["value"], "calendar.days[].value")? < 0.0 {
            return Err("calendar.days[].value: negative".into());
        }
        bin(&day["bin"], "calendar.days[].bin")?;
        if uint(&day["events"], "calendar.days[].events")? == 0 {
            return Err("calendar.days[].events: zero".into());
        }
    }
    Ok(())
}

pub fn trip_grid(v: &Value) -> Check {
    let o = object(v, &["route", "date", "stops", "trips"], &[], "grid")?;
    string(&o["route"], "grid.route")?;
    iso_date(&o["date"], "grid.date")?;
    let width = array(&o["stops"], "grid.stops")?.len();
    for t in array(&o["trips"], "grid.trips")? {
        let trip = object(t, &["trip", "start", "cells"], &[], "grid.trips[]")?;
        string(&trip["trip"], "grid.trips[].trip")?;
        service_time(&trip["start"], "grid.trips[].start")?;
        let cells = array(&trip["cells"], "grid.trips[].cells")?;
        if cells.len() != width {
            return Err(format!("grid: {} cells for {width} stops", cells.len()));
        }
        for c in cells {
            if c.is_null() {
                continue;
            }
            let cell = object(c, &["display", "abs_delta_s", "bin"], &["n"], "cell")?;
            match (cell.get("n"), &cell["display"]) {
                (None, Value::Null) => {}
                (Some(n), display) => {
                    let n = uint(n, "cell.n")?;
                    let display = uint(display, "cell.display")?;
                    if display != n.min(36) {
                        return Err(format!("cell: display {display} for n {n}"));
                    }
                }
                (None, d) => return Err(format!("cell: display {d} without n")),
            }
            uint(&cell["abs_delta_s"], "cell.abs_delta_s")?;
            bin(&cell["bin"], "cell.bin")?;
        }
    }
    Ok(())
}

pub fn stop_day(v: &Value) -> Check {
    let o = object(v, &["stop", "date", "hours"], &[], "stop_day")?;
    string(&o["stop"], "stop_day.stop")?;
    iso_date(&o["date"], "stop_day.date")?;
    let mut last = None;
    for h in array(&o["hours"], "stop_day.hours")? {
        let hour = object(h, &["hour", "early_s", "late_s", "abs_s", "events"], &["boardings"], "hours[]")?;
        let n = uint(&hour["hour"], "hours[].hour")?;
        if n > 29 || last.is_some_and(|l| l >= n) {
            return Err(format!("hours[].hour: {n}"));
        }
        last = Some(n);
        let early = number(&hour["early_s"], "hours[].early_s")?;
        let late = number(&hour["late_s"], "hours[].late_s")?;
        let abs = number(&hour["abs_s"], "hours[].abs_s")?;
        if early < 0.0 || late < 0.0 || (early + late - abs).abs() > 1e-9 * abs.max(1.0) {
            return Err(format!("hours[]: {early} + {late} != {abs}"));
        }
        if let Some(b) = hour.get("boardings") {
            number(b, "hours[].boardings")?;
        }
        uint(&hour["events"], "hours[].events")?;
    }
    Ok(())
}

pub fn fares(v: &Value) -> Check {
    let o = object(v, &["stop", "total", "entries"], &[], "fares")?;
    string(&o["stop"], "fares.stop")?;
    let total = uint(&o["total"], "fares.total")?;
    let mut sum = 0;
    let mut fractions = 0.0;
    for e in array(&o["entries"], "fares.entries")? {
        let entry = object(e, &["category", "count", "fraction"], &[], "fares.entries[]")?;
        string(&entry["category"], "entries[].category")?;
        sum += uint(&entry["count"], "entries[].count")?;
        let f = number(&entry["fraction"], "entries[].fraction")?;
        if !(0.0..=1.0).contains(&f) {
            return Err(format!("entries[].fraction: {f}"));
        }
        fractions += f;
    }
    if sum != total || (total > 0 && (fractions - 1.0).abs() > 1e-9) {
        return Err(format!("fares: entries sum {sum}/{fractions} vs total {total}"));
    }
    Ok(())
}

/// Validates a 200 body for the endpoint at `path`.
pub fn check(path: &str, body: &[u8]) -> Check {
    let v: Value = serde_json::from_slice(body).map_err(|e| format!("{path}: invalid JSON: {e}"))?;
    match path {
        "/api/stops" => stops(&v),
        "/api/routes" => routes(&v),
        "/api/search" => search(&v),
        "/api/calendar" => calendar(&v),
        "/api/trip-grid" => trip_grid(&v),
        "/api/stop-day" => stop_day(&v),
        "/api/fares" => fares(&v),
        p if p.starts_with("/api/routes/") => route(&v),
        p => Err(format!("no schema for {p}")),
    }
    .map_err(|e| format!("{path}: {e}"))
}

/// Validates an error body and returns `(status, code)`.
pub fn error(body: &[u8]) -> Result<(u64, String), String> {
    let v: Value = serde_json::from_slice(body).map_err(|e| format!("invalid JSON: {e}"))?;
    let o = object(&v, &["status", "code", "message"], &[], "error")?;
    let status = uint(&o["status"], "error.status")?;
    string(&o["message"], "error.message")?;
    Ok((status, string(&o["code"], "error.code")?))
}
