use std::collections::BTreeMap;
use std::fmt;

use serde_json::{Map, Value};

use super::{RejectReason, SourceFile};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FileStats {
    pub read: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub reasons: BTreeMap<RejectReason, u64>,
}

impl FileStats {
    pub(super) fn record_rejection(&mut self, reason: RejectReason) {
        self.rejected += 1;
        *self.reasons.entry(reason).or_default() += 1;
    }

    /// `read == accepted + rejected`
    pub fn is_conserved(&self) -> bool {
        self.read == self.accepted + self.rejected
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub adherence: FileStats,
    pub counts: FileStats,
    pub fares: FileStats,
    /// Events retained with boardings above the capacity threshold.
    pub over_capacity: u64,
}

impl ValidationReport {
    pub fn stats(&self, file: SourceFile) -> &FileStats {
        match file {
            SourceFile::Adherence => &self.adherence,
            SourceFile::Counts => &self.counts,
            SourceFile::Fares => &self.fares,
        }
    }

    pub(super) fn stats_mut(&mut self, file: SourceFile) -> &mut FileStats {
        match file {
            SourceFile::Adherence => &mut self.adherence,
            SourceFile::Counts => &mut self.counts,
            SourceFile::Fares => &mut self.fares,
        }
    }

    pub fn total_rejected(&self) -> u64 {
        SourceFile::ALL.iter().map(|&f| self.stats(f).rejected).sum()
    }

    pub fn rejections_by_reason(&self) -> BTreeMap<RejectReason, u64> {
        let mut out = BTreeMap::new();
        for file in SourceFile::ALL {
            for (&reason, &n) in &self.stats(file).reasons {
                *out.entry(reason).or_default() += n;
            }
        }
        out
    }

    /// Flat JSON object: `<file>_read`, `<file>_accepted`, `<file>_rejected`,
    /// `<file>_rejected_<reason>` for every file and reason (zeros included),
    /// `rejected_<reason>` totals, and `over_capacity`.
    pub fn to_flat_json(&self) -> Value {
        let mut map = Map::new();
        for file in SourceFile::ALL {
            let s = self.stats(file);
            map.insert(format!("{file}_read"), s.read.into());
            map.insert(format!("{file}_accepted"), s.accepted.into());
            map.insert(format!("{file}_rejected"), s.rejected.into());
            for reason in RejectReason::ALL {
                let n = s.reasons.get(&reason).copied().unwrap_or(0);
                map.insert(format!("{file}_rejected_{reason}"), n.into());
            }
        }
        let totals = self.rejections_by_reason();
        for reason in RejectReason::ALL {
            map.insert(
                format!("rejected_{reason}"),
                totals.get(&reason).copied().unwrap_or(0).into(),
            );
        }
        map.insert("over_capacity".into(), self.over_capacity.into());
        Value::Object(map)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<10} {:>12} {:>12} {:>12}", "file", "read", "accepted", "rejected")?;
        for file in SourceFile::ALL {
            let s = self.stats(file);
            writeln!(f, "{:<10} {:>12} {:>12} {:>12}", file.as_str(), s.read, s.accepted, s.rejected)?;
        }
        let totals = self.rejections_by_reason();
        if !totals.is_empty() {
            writeln!(f)?;
            writeln!(f, "{:<22} {:>12}", "rejection reason", "count")?;
            for (reason, n) in totals {
                writeln!(f, "{:<22} {:>12}", reason.as_str(), n)?;
            }
        }
        writeln!(f)?;
        write!(f, "over-capacity events flagged: {}", self.over_capacity)
    }
}
