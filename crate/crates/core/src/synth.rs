//! Seeded synthetic corpora in the four input formats.
//!
//! Output is a pure function of [`SynthConfig`]: the same seed always yields
//! byte-identical files. Every scheduled stop visit produces exactly one
//! adherence line, so a corpus has `routes * trips_per_day * stops * days`
//! adherence data lines. Fixed pathologies exercise the ingest rejection paths:
//!
//! | pathology | rate | effect on ingest |
//! |-----------|------|------------------|
//! | visit with no count row | [`MISSING_COUNT_RATE`] | event without ridership |
//! | malformed adherence line (its count row is dropped too) | [`MALFORMED_RATE`] | adherence reject |
//! | malformed count line | [`MALFORMED_RATE`] | counts reject |
//! | malformed fare line | [`MALFORMED_RATE`] | fares reject |
//! | boardings above capacity (61-200) | [`OVER_CAPACITY_RATE`] | flagged, kept |

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use chrono::{Days, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::ingest::{ADHERENCE_HEADER, COUNTS_HEADER, FARES_HEADER};
use crate::model::{Network, Route, Stop};
use crate::time::ServiceTime;

pub const MISSING_COUNT_RATE: f64 = 0.05;
pub const MALFORMED_RATE: f64 = 0.01;
pub const OVER_CAPACITY_RATE: f64 = 0.005;

pub const FARE_CATEGORIES: [&str; 4] = ["student", "faculty_staff", "full", "senior"];

const FIRST_DEPARTURE: u32 = 5 * 3600 + 30 * 60;
const LAST_DEPARTURE: u32 = 25 * 3600;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthConfig {
    pub seed: u64,
    pub routes: u32,
    /// Stops visited by each route.
    pub stops: u32,
    pub days: u32,
    pub trips_per_day: u32,
    pub start_date: NaiveDate,
}

impl SynthConfig {
    pub fn new(seed: u64, routes: u32, stops: u32, days: u32, trips_per_day: u32) -> Self {
        SynthConfig {
            seed,
            routes,
            stops,
            days,
            trips_per_day,
            start_date: NaiveDate::from_ymd_opt(2010, 8, 1).expect("valid date"),
        }
    }

    pub fn adherence_rows(&self) -> u64 {
        u64::from(self.routes) * u64::from(self.stops) * u64::from(self.days) * u64::from(self.trips_per_day)
    }

    fn validate(&self) -> io::Result<()> {
        if self.routes == 0 || self.stops == 0 || self.days == 0 || self.trips_per_day == 0 {
            return Err(io::Error::new(io::ErrorKind::InvalidInput, "all synth sizes must be positive"));
        }
        Ok(())
    }
}

/// Line and pathology counts of a generated corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynthSummary {
    pub adherence_rows: u64,
    pub count_rows: u64,
    pub fare_rows: u64,
    pub malformed_adherence: u64,
    pub malformed_counts: u64,
    pub malformed_fares: u64,
    pub missing_counts: u64,
    pub over_capacity: u64,
}

const STREETS: [&str; 24] = [
    "Main", "Prices Fork", "Progress", "Roanoke", "Draper", "Patrick Henry", "Toms Creek", "University City",
    "Washington", "Turner", "College", "Clay", "Jackson", "Airport", "Country Club", "Hethwood", "Givens",
    "Harding", "Ellett", "Stanger", "Kent", "Otey", "Alumni Mall", "Plantation",
];
const SUFFIXES: [&str; 5] = ["St", "Rd", "Ave", "Dr", "Blvd"];

fn build_network(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Network {
    let per_route = cfg.stops as usize;
    // Neighboring routes share about a fifth of their stops.
    let stride = (per_route * 4 / 5).max(1);
    let pool = (stride * (cfg.routes as usize - 1) + per_route).max(per_route);

    let stops: Vec<Stop> = (0..pool)
        .map(|i| {
            let a = STREETS[rng.random_range(0..STREETS.len())];
            let b = STREETS[rng.random_range(0..STREETS.len())];
            let sa = SUFFIXES[rng.random_range(0..SUFFIXES.len())];
            let sb = SUFFIXES[rng.random_range(0..SUFFIXES.len())];
            let lat = 37.23 + rng.random_range(-0.05..0.05);
            let lon = -80.42 + rng.random_range(-0.06..0.06);
            Stop {
                id: format!("S{:04}", i + 1),
                name: format!("{a} {sa} & {b} {sb} #{}", i + 1),
                lat: (lat * 1e6_f64).round() / 1e6,
                lon: (lon * 1e6_f64).round() / 1e6,
            }
        })
        .collect();

    let routes = (0..cfg.routes as usize)
        .map(|r| Route {
            id: format!("R{:02}", r + 1),
            name: format!("Route {}", r + 1),
            stop_ids: (0..per_route)
                .map(|k| stops[(r * stride + k) % pool].id.clone())
                .collect(),
        })
        .collect();

    Network::new(stops, routes).expect("generated network is well formed")
}

fn malformed(line: &str, rng: &mut ChaCha8Rng) -> String {
    let mut fields: Vec<&str> = line.split(',').collect();
    match rng.random_range(0..4) {
        0 => {
            fields.pop();
            fields.join(",")
        }
        1 => {
            fields[3] = "2011-02-30";
            fields.join(",")
        }
        2 => {
            let last = fields.len() - 1;
            fields[last] = "n/a";
            fields.join(",")
        }
        _ => format!("{line},#"),
    }
}

/// Writes a corpus to the four sinks and returns its summary.
pub fn generate(
    cfg: &SynthConfig,
    network_out: &mut impl Write,
    adherence_out: &mut impl Write,
    counts_out: &mut impl Write,
    fares_out: &mut impl Write,
) -> io::Result<SynthSummary> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let network = build_network(cfg, &mut rng);
    network_out.write_all(network.to_json().as_bytes())?;
    network_out.write_all(b"\n")?;

    writeln!(adherence_out, "{}", ADHERENCE_HEADER.join(","))?;
    writeln!(counts_out, "{}", COUNTS_HEADER.join(","))?;
    writeln!(fares_out, "{}", FARES_HEADER.join(","))?;

    // Per-stop popularity and per-route punctuality bias.
    let popularity: Vec<f64> = network.stops().iter().map(|_| rng.random_range(0.5..6.0)).collect();
    let route_bias: Vec<f64> = network.routes().iter().map(|_| rng.random_range(-30.0..120.0)).collect();
    let stop_pos = |id: &str| -> usize { id[1..].parse::<usize>().expect("generated id") - 1 };

    let spacing = (4 * 3600 / cfg.stops).clamp(1, 150);
    let headway = (LAST_DEPARTURE - FIRST_DEPARTURE) / cfg.trips_per_day;
    let mut summary = SynthSummary::default();
    let mut line = String::with_capacity(128);

    for day in 0..cfg.days {
        let date = cfg.start_date + Days::new(u64::from(day));
        let weekend = matches!(chrono::Datelike::weekday(&date), chrono::Weekday::Sat | chrono::Weekday::Sun);
        for (r, route) in network.routes().iter().enumerate() {
            let jitter = Normal::new(route_bias[r], 150.0).expect("finite");
            for t in 0..cfg.trips_per_day {
                let trip_id = format!("{}-{:03}", route.id, t + 1);
                let start = FIRST_DEPARTURE + t * headway + (r as u32 * 37) % headway.max(1);
                let mut drift = 0.0;
                for (k, stop_id) in route.stop_ids.iter().enumerate() {
                    let scheduled = ServiceTime::from_seconds(start + k as u32 * spacing).expect("within service clock");
                    drift += rng.random_range(-10.0..25.0);
                    let raw_delta = (jitter.sample(&mut rng) + drift).round().clamp(-900.0, 1800.0) as i64;
                    let actual_secs = (i64::from(scheduled.seconds()) + raw_delta)
                        .clamp(0, i64::from(ServiceTime::MAX.seconds())) as u32;
                    let actual = ServiceTime::from_seconds(actual_secs).expect("clamped");
                    let delta = actual.delta_from(scheduled);

                    line.clear();
                    use std::fmt::Write as _;
                    let _ = write!(line, "{},{trip_id},{stop_id},{date},{scheduled},{actual},{delta}", route.id);
                    summary.adherence_rows += 1;
                    if rng.random_bool(MALFORMED_RATE) {
                        summary.malformed_adherence += 1;
                        writeln!(adherence_out, "{}", malformed(&line, &mut rng))?;
                        continue;
                    }
                    writeln!(adherence_out, "{line}")?;

                    if rng.random_bool(MISSING_COUNT_RATE) {
                        summary.missing_counts += 1;
                        continue;
                    }

                    let hour = scheduled.hour();
                    let peak = if (7..=9).contains(&hour) || (16..=18).contains(&hour) { 2.0 } else { 1.0 };
                    let lambda = popularity[stop_pos(stop_id)] * peak * if weekend { 0.5 } else { 1.0 };
                    let mut boardings = Poisson::new(lambda).expect("positive").sample(&mut rng) as u32;
                    if rng.random_bool(OVER_CAPACITY_RATE) {
                        boardings = rng.random_range(61..=200);
                        summary.over_capacity += 1;
                    }
                    let alightings = Poisson::new(lambda).expect("positive").sample(&mut rng) as u32;
                    let fare_count = if boardings == 0 { 0 } else { rng.random_range(0..=boardings) };
                    let count_secs = (i64::from(actual.seconds()) + rng.random_range(-20..=20))
                        .clamp(0, i64::from(ServiceTime::MAX.seconds())) as u32;
                    let count_time = ServiceTime::from_seconds(count_secs).expect("clamped");

                    line.clear();
                    let _ = write!(
                        line,
                        "{},{trip_id},{stop_id},{date},{count_time},{fare_count},{boardings},{alightings}",
                        route.id
                    );
                    summary.count_rows += 1;
                    if rng.random_bool(MALFORMED_RATE) {
                        summary.malformed_counts += 1;
                        writeln!(counts_out, "{}", malformed(&line, &mut rng))?;
                        continue;
                    }
                    writeln!(counts_out, "{line}")?;

                    // Split fares over a shuffled subset of categories.
                    let mut categories = FARE_CATEGORIES;
                    categories.shuffle(&mut rng);
                    let mut remaining = fare_count;
                    for (i, category) in categories.iter().enumerate() {
                        if remaining == 0 {
                            break;
                        }
                        let n = if i + 1 == categories.len() {
                            remaining
                        } else {
                            rng.random_range(0..=remaining)
                        };
                        remaining -= n;
                        if n == 0 {
                            continue;
                        }
                        line.clear();
                        let _ = write!(line, "{},{trip_id},{stop_id},{date},{category},{n}", route.id);
                        summary.fare_rows += 1;
                        if rng.random_bool(MALFORMED_RATE) {
                            summary.malformed_fares += 1;
                            writeln!(fares_out, "{}", malformed(&line, &mut rng))?;
                        } else {
                            writeln!(fares_out, "{line}")?;
                        }
                    }
                }
            }
        }
    }
    network_out.flush()?;
    adherence_out.flush()?;
    counts_out.flush()?;
    fares_out.flush()?;
    Ok(summary)
}

/// Writes `network.json`, `adherence.csv`, `counts.csv`, and `fares.csv`
/// into `dir`, creating it if needed.
pub fn write_corpus(cfg: &SynthConfig, dir: &Path) -> io::Result<SynthSummary> {
    std::fs::create_dir_all(dir)?;
    let open = |name: &str| File::create(dir.join(name)).map(|f| BufWriter::with_capacity(1 << 20, f));
    generate(
        cfg,
        &mut open("network.json")?,
        &mut open("adherence.csv")?,
        &mut open("counts.csv")?,
        &mut open("fares.csv")?,
    )
}

/// In-memory corpus, mostly for tests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub network: Vec<u8>,
    pub adherence: Vec<u8>,
    pub counts: Vec<u8>,
    pub fares: Vec<u8>,
    pub summary: SynthSummary,
}

pub fn generate_in_memory(cfg: &SynthConfig) -> io::Result<Corpus> {
    let (mut n, mut a, mut c, mut f) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let summary = generate(cfg, &mut n, &mut a, &mut c, &mut f)?;
    Ok(Corpus {
        network: n,
        adherence: a,
        counts: c,
        fares: f,
        summary,
    })
}
