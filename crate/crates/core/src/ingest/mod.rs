//! Raw record ingestion: parse the adherence, passenger-count, and fare files,
//! reject what cannot be trusted, and align the rest into [`StopEvent`]s.
//!
//! Every data line ends up either accepted or in the reject list with exactly
//! one [`RejectReason`]; [`ValidationReport`] keeps the per-file tallies.

mod align;
mod parse;
mod report;

use std::fmt;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::model::{FareContribution, Network, NetworkError, StopEvent};
use crate::time::ServiceTime;

pub use align::{validate_and_align, AlignOptions, Alignment, DEFAULT_CAPACITY_THRESHOLD, TIMESTAMP_TOLERANCE_SECONDS};
pub use parse::{
    parse_adherence, parse_counts, parse_fares, ADHERENCE_HEADER, COUNTS_HEADER, DELTA_TOLERANCE_SECONDS,
    FARES_HEADER,
};
pub use report::{FileStats, ValidationReport};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("reading {file} input: {source}")]
    Io {
        file: SourceFile,
        #[source]
        source: io::Error,
    },
    #[error("{file} header mismatch: {diff}")]
    BadHeader { file: SourceFile, diff: String },
    #[error("network: {0}")]
    Network(#[from] NetworkError),
    #[error("reading network file {path}: {source}")]
    NetworkIo {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceFile {
    Adherence,
    Counts,
    Fares,
}

impl SourceFile {
    pub const ALL: [SourceFile; 3] = [SourceFile::Adherence, SourceFile::Counts, SourceFile::Fares];

    pub fn as_str(self) -> &'static str {
        match self {
            SourceFile::Adherence => "adherence",
            SourceFile::Counts => "counts",
            SourceFile::Fares => "fares",
        }
    }
}

impl fmt::Display for SourceFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    MissingField,
    BadFormat,
    UnknownRoute,
    UnknownStop,
    StopNotOnRoute,
    DeltaMismatch,
    NegativeCount,
    DuplicateKey,
    UnmatchedTimestamp,
}

impl RejectReason {
    pub const ALL: [RejectReason; 9] = [
        RejectReason::MissingField,
        RejectReason::BadFormat,
        RejectReason::UnknownRoute,
        RejectReason::UnknownStop,
        RejectReason::StopNotOnRoute,
        RejectReason::DeltaMismatch,
        RejectReason::NegativeCount,
        RejectReason::DuplicateKey,
        RejectReason::UnmatchedTimestamp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::MissingField => "missing_field",
            RejectReason::BadFormat => "bad_format",
            RejectReason::UnknownRoute => "unknown_route",
            RejectReason::UnknownStop => "unknown_stop",
            RejectReason::StopNotOnRoute => "stop_not_on_route",
            RejectReason::DeltaMismatch => "delta_mismatch",
            RejectReason::NegativeCount => "negative_count",
            RejectReason::DuplicateKey => "duplicate_key",
            RejectReason::UnmatchedTimestamp => "unmatched_timestamp",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a parsed record came from, kept so later stages can still reject it
/// with its original line.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceLine {
    pub line_number: u64,
    pub raw: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedRecord {
    pub source_file: SourceFile,
    pub line_number: u64,
    pub raw_line: String,
    pub reason: RejectReason,
}

impl RejectedRecord {
    fn new(source_file: SourceFile, line: &SourceLine, reason: RejectReason) -> Self {
        RejectedRecord {
            source_file,
            line_number: line.line_number,
            raw_line: line.raw.clone(),
            reason,
        }
    }

    /// Reject-log line: `file<TAB>line_number<TAB>reason<TAB>raw_line`.
    pub fn log_line(&self) -> String {
        format!("{}\t{}\t{}\t{}", self.source_file, self.line_number, self.reason, self.raw_line)
    }
}

/// Join key shared by all three record files.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RecordKey {
    pub route_id: String,
    pub trip_id: String,
    pub stop_id: String,
    pub service_date: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdherenceRecord {
    pub key: RecordKey,
    pub scheduled_departure: ServiceTime,
    pub actual_departure: ServiceTime,
    /// Always `actual - scheduled`. The file's own delta column is only used
    /// to cross-check the two timestamps.
    pub delta_seconds: i32,
    pub source: SourceLine,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountRecord {
    pub key: RecordKey,
    pub actual_departure: ServiceTime,
    pub fare_count: u32,
    pub boardings: u32,
    pub alightings: u32,
    pub source: SourceLine,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FareRecord {
    pub key: RecordKey,
    pub category: String,
    pub count: u64,
    pub source: SourceLine,
}

/// Output of one file parse. Every data line is in exactly one of the two lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub rejected: Vec<RejectedRecord>,
}

impl<T> Parsed<T> {
    pub fn lines_read(&self) -> u64 {
        (self.records.len() + self.rejected.len()) as u64
    }
}

/// Paths of one raw corpus.
#[derive(Debug, Clone)]
pub struct InputPaths {
    pub adherence: PathBuf,
    pub counts: PathBuf,
    pub fares: PathBuf,
    pub network: PathBuf,
}

impl InputPaths {
    /// The conventional file names inside one directory.
    pub fn in_dir(dir: &Path) -> Self {
        InputPaths {
            adherence: dir.join("adherence.csv"),
            counts: dir.join("counts.csv"),
            fares: dir.join("fares.csv"),
            network: dir.join("network.json"),
        }
    }
}

#[derive(Debug)]
pub struct IngestOutcome {
    pub network: Network,
    pub events: Vec<StopEvent>,
    pub fares: Vec<FareContribution>,
    pub rejected: Vec<RejectedRecord>,
    pub report: ValidationReport,
}

pub fn load_network(reader: impl io::Read) -> Result<Network, IngestError> {
    let mut bytes = Vec::new();
    let mut reader = reader;
    reader.read_to_end(&mut bytes).map_err(|source| IngestError::NetworkIo {
        path: PathBuf::from("<stream>"),
        source,
    })?;
    Ok(Network::from_json(&bytes)?)
}

fn open(path: &Path, file: SourceFile) -> Result<BufReader<File>, IngestError> {
    File::open(path)
        .map(|f| BufReader::with_capacity(1 << 20, f))
        .map_err(|source| IngestError::Io { file, source })
}

/// Reads, parses, and aligns one corpus. The three record files are parsed on
/// separate threads.
pub fn ingest_files(paths: &InputPaths, options: &AlignOptions) -> Result<IngestOutcome, IngestError> {
    let network_bytes = std::fs::read(&paths.network).map_err(|source| IngestError::NetworkIo {
        path: paths.network.clone(),
        source,
    })?;
    let network = Network::from_json(&network_bytes)?;

    let adherence = open(&paths.adherence, SourceFile::Adherence)?;
    let counts = open(&paths.counts, SourceFile::Counts)?;
    let fares = open(&paths.fares, SourceFile::Fares)?;

    let (adherence, counts, fares) = std::thread::scope(|s| {
        let a = s.spawn(|| parse_adherence(adherence));
        let c = s.spawn(|| parse_counts(counts));
        let f = s.spawn(|| parse_fares(fares));
        (
            a.join().expect("adherence parser panicked"),
            c.join().expect("counts parser panicked"),
            f.join().expect("fares parser panicked"),
        )
    });

    let alignment = validate_and_align(adherence?, counts?, fares?, &network, options);
    Ok(IngestOutcome {
        network,
        events: alignment.events,
        fares: alignment.fares,
        rejected: alignment.rejected,
        report: alignment.report,
    })
}

/// Writes one tab-separated line per rejection.
pub fn write_reject_log(mut out: impl Write, rejected: &[RejectedRecord]) -> io::Result<()> {
    for r in rejected {
        writeln!(out, "{}", r.log_line())?;
    }
    out.flush()
}
