use super::AggregateError;
use crate::store::Store;

#[derive(Debug, Clone, PartialEq)]
pub struct FareEntry {
    pub category: String,
    pub count: u64,
    pub fraction: f64,
}

/// Fare mix at a stop. Entries are ordered by count (descending), then
/// category; empty when the stop has no fare data.
#[derive(Debug, Clone, PartialEq)]
pub struct FareDistribution {
    pub stop_id: String,
    pub total: u64,
    pub entries: Vec<FareEntry>,
}

pub fn fare_distribution(store: &Store, stop_id: &str) -> Result<FareDistribution, AggregateError> {
    let tally = store.fare_tally(stop_id)?;
    let total = tally.map_or(0, |t| t.total());
    let mut entries: Vec<FareEntry> = match tally {
        Some(t) if total > 0 => t
            .counts
            .iter()
            .map(|(category, &count)| FareEntry {
                category: category.clone(),
                count,
                fraction: count as f64 / total as f64,
            })
            .collect(),
        _ => Vec::new(),
    };
    entries.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.category.cmp(&b.category)));
    Ok(FareDistribution {
        stop_id: stop_id.to_string(),
        total,
        entries,
    })
}
