use serde::{Deserialize, Serialize};

use super::HarnessError;

/// Cross-run summary of final RMSE values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    /// Sample standard deviation (n - 1 divisor); 0 for a single run.
    pub sd: f64,
    pub count: usize,
}

pub fn aggregate(values: &[f64]) -> Result<Stats, HarnessError> {
    if values.is_empty() {
        return Err(HarnessError::Empty);
    }
    // Summing in sorted order makes the result independent of run order
    // down to the last bit.
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let values = &sorted[..];
    let n = values.len();
    let (min, max) = (values[0], values[n - 1]);
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    // Rounding in the sum can push the mean a hair outside [min, max].
    let mean = mean.clamp(min, max);
    Ok(Stats {
        min,
        mean,
        max,
        sd,
        count: n,
    })
}

/// Pointwise mean of equal-length traces.
pub fn mean_convergence<T: AsRef<[f64]>>(traces: &[T]) -> Result<Vec<f64>, HarnessError> {
    let first = traces.first().ok_or(HarnessError::Empty)?.as_ref().len();
    if let Some(bad) = traces.iter().find(|t| t.as_ref().len() != first) {
        return Err(HarnessError::Ragged {
            expected: first,
            found: bad.as_ref().len(),
        });
    }
    let n = traces.len() as f64;
    let mut mean = vec![0.0; first];
    for t in traces {
        for (m, v) in mean.iter_mut().zip(t.as_ref()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    Ok(mean)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankMetric {
    Min,
    Mean,
    Max,
}

impl RankMetric {
    pub const ALL: [RankMetric; 3] = [RankMetric::Min, RankMetric::Mean, RankMetric::Max];

    pub fn of(self, s: &Stats) -> f64 {
        match self {
            RankMetric::Min => s.min,
            RankMetric::Mean => s.mean,
            RankMetric::Max => s.max,
        }
    }
}

/// Rank 1 for the smallest value; tied values share the mean of their
/// rank positions.
pub fn rank_values(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start+1 ..= end share their average.
        let shared = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = shared;
        }
        start = end;
    }
    ranks
}

/// Ranks of each optimizer's `metric`, in input order.
pub fn rank_optimizers(stats: &[Stats], metric: RankMetric) -> Vec<f64> {
    let values: Vec<f64> = stats.iter().map(|s| metric.of(s)).collect();
    rank_values(&values)
}

/// Mean rank per optimizer over several conditions (`ranks[condition][optimizer]`).
pub fn average_ranks(ranks: &[Vec<f64>]) -> Result<Vec<f64>, HarnessError> {
    mean_convergence(ranks)
}
