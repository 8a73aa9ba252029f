use serde::{Deserialize, Serialize};

use super::{AggregateError, Metric};

/// Number of color classes.
pub const BIN_COUNT: usize = 5;

/// Default adherence edges on mean |delta|: 1, 3, 5, and 10 minutes.
pub const ADHERENCE_EDGES_SECONDS: [f64; 4] = [60.0, 180.0, 300.0, 600.0];

/// Percentiles (nearest-rank) used as ridership edges.
pub const RIDERSHIP_PERCENTILES: [u32; 4] = [20, 40, 60, 80];

/// Four strictly increasing edges splitting `[0, inf)` into five bins.
/// Bin `i` holds values in `[edges[i-1], edges[i])` with the outer edges at
/// 0 and infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinScale {
    pub metric: Metric,
    pub edges: [f64; 4],
}

impl BinScale {
    pub fn new(metric: Metric, edges: [f64; 4]) -> Result<Self, AggregateError> {
        let valid = edges.iter().all(|e| e.is_finite() && *e >= 0.0) && edges.windows(2).all(|w| w[0] < w[1]);
        if !valid {
            return Err(AggregateError::InvalidScale(edges));
        }
        Ok(BinScale { metric, edges })
    }

    pub fn adherence() -> Self {
        BinScale {
            metric: Metric::Adherence,
            edges: ADHERENCE_EDGES_SECONDS,
        }
    }

    pub fn bin(&self, value: f64) -> u8 {
        bin_value(value, self)
    }
}

/// Color class of `value`: the number of edges at or below it.
pub fn bin_value(value: f64, scale: &BinScale) -> u8 {
    scale.edges.iter().filter(|&&e| e <= value).count() as u8
}

fn nearest_rank(sorted: &[f64], percentile: u32) -> f64 {
    let n = sorted.len() as u64;
    let rank = (u64::from(percentile) * n).div_ceil(100).max(1);
    sorted[(rank - 1) as usize]
}

/// Data-driven ridership scale: edges at the 20/40/60/80th nearest-rank
/// percentiles of `values`.
///
/// Every edge is kept strictly above the smallest value, so the minimum
/// always lands in bin 0, and colliding edges are pushed up one ulp at a time
/// to stay strictly increasing. Some bins may then be empty.
pub fn ridership_scale(values: &[f64]) -> Result<BinScale, AggregateError> {
    if values.is_empty() {
        return Err(AggregateError::EmptyScaleInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut floor = sorted[0];
    let mut edges = [0.0; 4];
    for (edge, p) in edges.iter_mut().zip(RIDERSHIP_PERCENTILES) {
        let candidate = nearest_rank(&sorted, p);
        *edge = if candidate > floor { candidate } else { floor.next_up() };
        floor = *edge;
    }
    BinScale::new(Metric::Ridership, edges)
}
