use std::collections::hash_map::Entry;
use std::collections::{HashMap, HashSet};

use super::{
    AdherenceRecord, CountRecord, FareRecord, Parsed, RecordKey, RejectReason, RejectedRecord, SourceFile,
    ValidationReport,
};
use crate::model::{FareContribution, Network, PassengerCounts, StopEvent};

/// Boardings above this are flagged as implausible (buses hold about 60).
pub const DEFAULT_CAPACITY_THRESHOLD: u32 = 60;

/// Largest gap between the adherence and count files' actual departure times
/// for the two records to describe the same stop visit.
pub const TIMESTAMP_TOLERANCE_SECONDS: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignOptions {
    pub capacity_threshold: u32,
}

impl Default for AlignOptions {
    fn default() -> Self {
        AlignOptions {
            capacity_threshold: DEFAULT_CAPACITY_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Alignment {
    /// In adherence-file order.
    pub events: Vec<StopEvent>,
    /// In fares-file order.
    pub fares: Vec<FareContribution>,
    /// Parse and alignment rejections, ordered by file then line.
    pub rejected: Vec<RejectedRecord>,
    pub report: ValidationReport,
}

fn check_network(network: &Network, key: &RecordKey) -> Result<(), RejectReason> {
    if network.route(&key.route_id).is_none() {
        return Err(RejectReason::UnknownRoute);
    }
    if network.stop(&key.stop_id).is_none() {
        return Err(RejectReason::UnknownStop);
    }
    if network.visit_position(&key.route_id, &key.stop_id).is_none() {
        return Err(RejectReason::StopNotOnRoute);
    }
    Ok(())
}

/// Joins count records onto adherence records by
/// `(route_id, trip_id, stop_id, service_date)`.
///
/// The adherence file is the skeleton: every surviving adherence record yields
/// one event, with counts attached only when a count record for the same key
/// reports an actual departure within [`TIMESTAMP_TOLERANCE_SECONDS`]. Count
/// records without a partner are rejected as `unmatched_timestamp`. The first
/// record for a key wins; later ones are `duplicate_key`.
pub fn validate_and_align(
    adherence: Parsed<AdherenceRecord>,
    counts: Parsed<CountRecord>,
    fares: Parsed<FareRecord>,
    network: &Network,
    options: &AlignOptions,
) -> Alignment {
    let mut report = ValidationReport::default();
    report.adherence.read = adherence.lines_read();
    report.counts.read = counts.lines_read();
    report.fares.read = fares.lines_read();

    let mut rejected = Vec::with_capacity(adherence.rejected.len() + counts.rejected.len() + fares.rejected.len());
    rejected.extend(adherence.rejected);
    rejected.extend(counts.rejected);
    rejected.extend(fares.rejected);

    let mut events: Vec<StopEvent> = Vec::with_capacity(adherence.records.len());
    let mut by_key: HashMap<RecordKey, usize> = HashMap::with_capacity(adherence.records.len());
    for rec in adherence.records {
        if let Err(reason) = check_network(network, &rec.key) {
            rejected.push(RejectedRecord::new(SourceFile::Adherence, &rec.source, reason));
            continue;
        }
        match by_key.entry(rec.key) {
            Entry::Occupied(_) => {
                rejected.push(RejectedRecord::new(
                    SourceFile::Adherence,
                    &rec.source,
                    RejectReason::DuplicateKey,
                ));
            }
            Entry::Vacant(slot) => {
                let key = slot.key();
                events.push(StopEvent {
                    route_id: key.route_id.clone(),
                    trip_id: key.trip_id.clone(),
                    stop_id: key.stop_id.clone(),
                    service_date: key.service_date,
                    scheduled_departure: rec.scheduled_departure,
                    actual_departure: rec.actual_departure,
                    delta_seconds: rec.delta_seconds,
                    counts: None,
                    over_capacity: false,
                });
                slot.insert(events.len() - 1);
            }
        }
    }

    let mut matched_counts = 0u64;
    let mut seen_counts: HashSet<RecordKey> = HashSet::with_capacity(counts.records.len());
    for rec in counts.records {
        let reason = if let Err(reason) = check_network(network, &rec.key) {
            Some(reason)
        } else if seen_counts.contains(&rec.key) {
            Some(RejectReason::DuplicateKey)
        } else {
            let target = by_key.get(&rec.key).copied();
            seen_counts.insert(rec.key);
            match target {
                Some(i)
                    if events[i].actual_departure.delta_from(rec.actual_departure).unsigned_abs()
                        <= u64::from(TIMESTAMP_TOLERANCE_SECONDS) =>
                {
                    let event = &mut events[i];
                    event.counts = Some(PassengerCounts {
                        fare_count: rec.fare_count,
                        boardings: rec.boardings,
                        alightings: rec.alightings,
                    });
                    event.over_capacity = rec.boardings > options.capacity_threshold;
                    matched_counts += 1;
                    None
                }
                _ => Some(RejectReason::UnmatchedTimestamp),
            }
        };
        if let Some(reason) = reason {
            rejected.push(RejectedRecord::new(SourceFile::Counts, &rec.source, reason));
        }
    }

    let mut contributions = Vec::with_capacity(fares.records.len());
    let mut seen_fares: HashSet<(RecordKey, String)> = HashSet::with_capacity(fares.records.len());
    for rec in fares.records {
        if let Err(reason) = check_network(network, &rec.key) {
            rejected.push(RejectedRecord::new(SourceFile::Fares, &rec.source, reason));
            continue;
        }
        let stop_id = rec.key.stop_id.clone();
        if !seen_fares.insert((rec.key, rec.category.clone())) {
            rejected.push(RejectedRecord::new(SourceFile::Fares, &rec.source, RejectReason::DuplicateKey));
            continue;
        }
        contributions.push(FareContribution {
            stop_id,
            category: rec.category,
            count: rec.count,
        });
    }

    rejected.sort_by_key(|r| (r.source_file, r.line_number));

    report.adherence.accepted = events.len() as u64;
    report.counts.accepted = matched_counts;
    report.fares.accepted = contributions.len() as u64;
    for r in &rejected {
        report.stats_mut(r.source_file).record_rejection(r.reason);
    }
    report.over_capacity = events.iter().filter(|e| e.over_capacity).count() as u64;

    Alignment {
        events,
        fares: contributions,
        rejected,
        report,
    }
}
