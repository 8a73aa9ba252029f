//! Single-file store snapshots.
//!
//! Layout (little endian):
//!
//! ```text
//! magic    8 bytes   "BVSNAP\r\n"
//! version  u32
//! length   u64       payload byte count
//! payload  postcard-encoded body
//! digest   32 bytes  SHA-256 of payload
//! ```
//!
//! Indices are not stored; they are rebuilt on load.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Store, StoreError};
use crate::model::{FareContribution, Network, PassengerCounts, Route, Stop, StopEvent};
use crate::time::ServiceTime;

pub const SNAPSHOT_MAGIC: [u8; 8] = *b"BVSNAP\r\n";
pub const SNAPSHOT_VERSION: u32 = 1;

const HEADER_LEN: usize = 8 + 4 + 8;
const DIGEST_LEN: usize = 32;

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("snapshot I/O: {0}")]
    Io(#[from] io::Error),
    #[error("not a store snapshot (bad magic bytes)")]
    BadMagic,
    #[error("snapshot version {found} is not supported (expected {expected})")]
    UnsupportedVersion { found: u32, expected: u32 },
    #[error("snapshot truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },
    #[error("snapshot has {0} trailing bytes")]
    TrailingBytes(u64),
    #[error("snapshot payload checksum mismatch")]
    ChecksumMismatch,
    #[error("snapshot payload is malformed: {0}")]
    Decode(String),
}

#[derive(Serialize, Deserialize)]
struct Body {
    stops: Vec<Stop>,
    routes: Vec<Route>,
    trips: Vec<String>,
    events: Vec<EventRow>,
    fares: Vec<(String, Vec<(String, u64)>)>,
}

#[derive(Serialize, Deserialize)]
struct EventRow {
    route: u32,
    trip: u32,
    stop: u32,
    day: i32,
    scheduled: u32,
    actual: u32,
    counts: Option<(u32, u32, u32)>,
    over_capacity: bool,
}

fn encode(store: &Store) -> Result<Vec<u8>, SnapshotError> {
    let network = store.network();
    let route_ix: BTreeMap<&str, u32> = network
        .routes()
        .iter()
        .enumerate()
        .map(|(i, r)| (r.id.as_str(), i as u32))
        .collect();
    let stop_ix: BTreeMap<&str, u32> = network
        .stops()
        .iter()
        .enumerate()
        .map(|(i, s)| (s.id.as_str(), i as u32))
        .collect();
    let mut trips: Vec<&str> = store.events().iter().map(|e| e.trip_id.as_str()).collect();
    trips.sort_unstable();
    trips.dedup();
    let trip_ix = |t: &str| trips.binary_search(&t).expect("trip interned") as u32;

    let events = store
        .events()
        .iter()
        .map(|e| EventRow {
            route: route_ix[e.route_id.as_str()],
            trip: trip_ix(&e.trip_id),
            stop: stop_ix[e.stop_id.as_str()],
            day: e.service_date.num_days_from_ce(),
            scheduled: e.scheduled_departure.seconds(),
            actual: e.actual_departure.seconds(),
            counts: e.counts.map(|c| (c.fare_count, c.boardings, c.alightings)),
            over_capacity: e.over_capacity,
        })
        .collect();

    let body = Body {
        stops: network.stops().to_vec(),
        routes: network.routes().to_vec(),
        trips: trips.iter().map(|t| t.to_string()).collect(),
        events,
        fares: store
            .fare_tallies()
            .map(|t| {
                (
                    t.stop_id.clone(),
                    t.counts.iter().map(|(k, v)| (k.clone(), *v)).collect(),
                )
            })
            .collect(),
    };
    postcard::to_stdvec(&body).map_err(|e| SnapshotError::Decode(e.to_string()))
}

fn decode(payload: &[u8]) -> Result<Store, StoreError> {
    let body: Body = postcard::from_bytes(payload).map_err(|e| SnapshotError::Decode(e.to_string()))?;
    let malformed = |what: &str| StoreError::from(SnapshotError::Decode(what.to_string()));

    let network = Network::new(body.stops, body.routes).map_err(|e| malformed(&e.to_string()))?;
    let mut events = Vec::with_capacity(body.events.len());
    for row in body.events {
        let route = network.routes().get(row.route as usize).ok_or_else(|| malformed("route index"))?;
        let stop = network.stops().get(row.stop as usize).ok_or_else(|| malformed("stop index"))?;
        let trip = body.trips.get(row.trip as usize).ok_or_else(|| malformed("trip index"))?;
        let service_date = NaiveDate::from_num_days_from_ce_opt(row.day).ok_or_else(|| malformed("date"))?;
        let scheduled = ServiceTime::from_seconds(row.scheduled).ok_or_else(|| malformed("scheduled time"))?;
        let actual = ServiceTime::from_seconds(row.actual).ok_or_else(|| malformed("actual time"))?;
        events.push(StopEvent {
            route_id: route.id.clone(),
            trip_id: trip.clone(),
            stop_id: stop.id.clone(),
            service_date,
            scheduled_departure: scheduled,
            actual_departure: actual,
            delta_seconds: actual.delta_from(scheduled) as i32,
            counts: row.counts.map(|(fare_count, boardings, alightings)| PassengerCounts {
                fare_count,
                boardings,
                alightings,
            }),
            over_capacity: row.over_capacity,
        });
    }
    let fares = body
        .fares
        .into_iter()
        .flat_map(|(stop_id, counts)| {
            counts.into_iter().map(move |(category, count)| FareContribution {
                stop_id: stop_id.clone(),
                category,
                count,
            })
        })
        .collect();
    Store::build(network, events, fares)
}

impl Store {
    /// Serializes the store into snapshot bytes.
    pub fn to_snapshot_bytes(&self) -> Result<Vec<u8>, StoreError> {
        let payload = encode(self)?;
        let mut out = Vec::with_capacity(HEADER_LEN + payload.len() + DIGEST_LEN);
        out.extend_from_slice(&SNAPSHOT_MAGIC);
        out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&payload);
        out.extend_from_slice(&Sha256::digest(&payload));
        Ok(out)
    }

    pub fn from_snapshot_bytes(bytes: &[u8]) -> Result<Store, StoreError> {
        if bytes.len() < SNAPSHOT_MAGIC.len() || bytes[..8] != SNAPSHOT_MAGIC {
            return Err(SnapshotError::BadMagic.into());
        }
        if bytes.len() < HEADER_LEN {
            return Err(SnapshotError::Truncated {
                expected: HEADER_LEN as u64,
                found: bytes.len() as u64,
            }
            .into());
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if version != SNAPSHOT_VERSION {
            return Err(SnapshotError::UnsupportedVersion {
                found: version,
                expected: SNAPSHOT_VERSION,
            }
            .into());
        }
        let len = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes"));
        let expected = (HEADER_LEN as u64).saturating_add(len).saturating_add(DIGEST_LEN as u64);
        let found = bytes.len() as u64;
        if found < expected {
            return Err(SnapshotError::Truncated { expected, found }.into());
        }
        if found > expected {
            return Err(SnapshotError::TrailingBytes(found - expected).into());
        }
        let payload = &bytes[HEADER_LEN..HEADER_LEN + len as usize];
        let digest = &bytes[HEADER_LEN + len as usize..];
        if Sha256::digest(payload).as_slice() != digest {
            return Err(SnapshotError::ChecksumMismatch.into());
        }
        decode(payload)
    }

    pub fn save_snapshot(&self, path: &Path) -> Result<(), StoreError> {
        let bytes = self.to_snapshot_bytes()?;
        let mut out = BufWriter::new(File::create(path).map_err(SnapshotError::from)?);
        out.write_all(&bytes).map_err(SnapshotError::from)?;
        out.flush().map_err(SnapshotError::from)?;
        Ok(())
    }

    pub fn load_snapshot(path: &Path) -> Result<Store, StoreError> {
        let mut bytes = Vec::new();
        File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(SnapshotError::from)?;
        Store::from_snapshot_bytes(&bytes)
    }
}
