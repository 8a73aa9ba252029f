use std::io::{BufRead, BufReader, Read};

use chrono::NaiveDate;

use super::{
    AdherenceRecord, CountRecord, FareRecord, IngestError, Parsed, RecordKey, RejectReason, RejectedRecord,
    SourceFile, SourceLine,
};
use crate::time::ServiceTime;

pub const ADHERENCE_HEADER: [&str; 7] = [
    "route_id",
    "trip_id",
    "stop_id",
    "service_date",
    "scheduled_departure",
    "actual_departure",
    "delta_seconds",
];

pub const COUNTS_HEADER: [&str; 8] = [
    "route_id",
    "trip_id",
    "stop_id",
    "service_date",
    "actual_departure",
    "fare_count",
    "boardings",
    "alightings",
];

pub const FARES_HEADER: [&str; 6] = ["route_id", "trip_id", "stop_id", "service_date", "category", "count"];

/// Largest tolerated gap between the file's delta column and the delta
/// recomputed from the two timestamps.
pub const DELTA_TOLERANCE_SECONDS: i64 = 1;

type FieldResult<T> = Result<T, RejectReason>;

struct Fields<'r>(Vec<&'r [u8]>);

impl Fields<'_> {
    fn str(&self, i: usize) -> FieldResult<&str> {
        let bytes = self.0.get(i).ok_or(RejectReason::MissingField)?;
        if bytes.is_empty() {
            return Err(RejectReason::MissingField);
        }
        std::str::from_utf8(bytes).map_err(|_| RejectReason::BadFormat)
    }

    fn date(&self, i: usize) -> FieldResult<NaiveDate> {
        NaiveDate::parse_from_str(self.str(i)?, "%Y-%m-%d").map_err(|_| RejectReason::BadFormat)
    }

    fn time(&self, i: usize) -> FieldResult<ServiceTime> {
        self.str(i)?.parse().map_err(|_| RejectReason::BadFormat)
    }

    fn int(&self, i: usize) -> FieldResult<i64> {
        self.str(i)?.parse().map_err(|_| RejectReason::BadFormat)
    }

    fn count(&self, i: usize) -> FieldResult<u64> {
        let v = self.int(i)?;
        if v < 0 {
            return Err(RejectReason::NegativeCount);
        }
        Ok(v as u64)
    }

    fn count_u32(&self, i: usize) -> FieldResult<u32> {
        u32::try_from(self.count(i)?).map_err(|_| RejectReason::BadFormat)
    }

    fn key(&self) -> FieldResult<RecordKey> {
        Ok(RecordKey {
            route_id: self.str(0)?.to_string(),
            trip_id: self.str(1)?.to_string(),
            stop_id: self.str(2)?.to_string(),
            service_date: self.date(3)?,
        })
    }
}

fn header_diff(expected: &[&str], found: &[u8]) -> Option<String> {
    let found: Vec<String> = found
        .split(|&b| b == b',')
        .enumerate()
        .map(|(i, f)| {
            let s = String::from_utf8_lossy(f).trim().to_string();
            // Tolerate a UTF-8 byte order mark on the first column.
            if i == 0 {
                s.trim_start_matches('\u{feff}').to_string()
            } else {
                s
            }
        })
        .collect();
    if found.iter().map(String::as_str).eq(expected.iter().copied()) {
        return None;
    }
    let mut diffs = Vec::new();
    for i in 0..expected.len().max(found.len()) {
        match (expected.get(i), found.get(i)) {
            (Some(e), Some(f)) if e == f => {}
            (Some(e), Some(f)) => diffs.push(format!("column {}: expected {e:?}, found {f:?}", i + 1)),
            (Some(e), None) => diffs.push(format!("column {}: expected {e:?}, missing", i + 1)),
            (None, Some(f)) => diffs.push(format!("column {}: unexpected {f:?}", i + 1)),
            (None, None) => unreachable!(),
        }
    }
    Some(format!(
        "expected `{}`, found `{}` ({})",
        expected.join(","),
        found.join(","),
        diffs.join("; ")
    ))
}

fn strip_eol(line: &[u8]) -> &[u8] {
    let line = line.strip_suffix(b"\n").unwrap_or(line);
    line.strip_suffix(b"\r").unwrap_or(line)
}

fn read_rows<T>(
    reader: impl Read,
    file: SourceFile,
    header: &[&str],
    mut parse_row: impl FnMut(&Fields<'_>, &mut SourceLine) -> FieldResult<T>,
) -> Result<Parsed<T>, IngestError> {
    let mut reader = BufReader::with_capacity(1 << 16, reader);
    let mut parsed = Parsed {
        records: Vec::new(),
        rejected: Vec::new(),
    };
    let mut buf = Vec::with_capacity(256);
    let mut line_number = 0u64;
    let mut seen_header = false;

    loop {
        buf.clear();
        let n = reader
            .read_until(b'\n', &mut buf)
            .map_err(|source| IngestError::Io { file, source })?;
        if n == 0 {
            break;
        }
        line_number += 1;
        let line = strip_eol(&buf);
        if line.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        if !seen_header {
            if let Some(diff) = header_diff(header, line) {
                return Err(IngestError::BadHeader { file, diff });
            }
            seen_header = true;
            continue;
        }

        let mut source = SourceLine {
            line_number,
            raw: String::from_utf8_lossy(line).into_owned(),
        };
        let fields = Fields(line.split(|&b| b == b',').collect());
        let result = match fields.0.len() {
            n if n < header.len() => Err(RejectReason::MissingField),
            n if n > header.len() => Err(RejectReason::BadFormat),
            _ => parse_row(&fields, &mut source),
        };
        match result {
            Ok(rec) => parsed.records.push(rec),
            Err(reason) => parsed.rejected.push(RejectedRecord::new(file, &source, reason)),
        }
    }
    Ok(parsed)
}

/// Parses an adherence file (`adherence.csv`).
pub fn parse_adherence(reader: impl Read) -> Result<Parsed<AdherenceRecord>, IngestError> {
    read_rows(reader, SourceFile::Adherence, &ADHERENCE_HEADER, |f, source| {
        let key = f.key()?;
        let scheduled = f.time(4)?;
        let actual = f.time(5)?;
        let reported = f.int(6)?;
        let delta = actual.delta_from(scheduled);
        if (reported - delta).abs() > DELTA_TOLERANCE_SECONDS {
            return Err(RejectReason::DeltaMismatch);
        }
        Ok(AdherenceRecord {
            key,
            scheduled_departure: scheduled,
            actual_departure: actual,
            delta_seconds: delta as i32,
            source: std::mem::take(source),
        })
    })
}

/// Parses a passenger-count file (`counts.csv`).
pub fn parse_counts(reader: impl Read) -> Result<Parsed<CountRecord>, IngestError> {
    read_rows(reader, SourceFile::Counts, &COUNTS_HEADER, |f, source| {
        Ok(CountRecord {
            key: f.key()?,
            actual_departure: f.time(4)?,
            fare_count: f.count_u32(5)?,
            boardings: f.count_u32(6)?,
            alightings: f.count_u32(7)?,
            source: std::mem::take(source),
        })
    })
}

/// Parses a fare-breakdown file (`fares.csv`). Category tokens are kept verbatim.
pub fn parse_fares(reader: impl Read) -> Result<Parsed<FareRecord>, IngestError> {
    read_rows(reader, SourceFile::Fares, &FARES_HEADER, |f, source| {
        Ok(FareRecord {
            key: f.key()?,
            category: f.str(4)?.to_string(),
            count: f.count(5)?,
            source: std::mem::take(source),
        })
    })
}
