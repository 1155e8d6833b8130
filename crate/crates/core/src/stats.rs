//! Answer-distribution summaries.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::question::{Answer, TaskKind};

/// Pearson statistic of `counts` against a uniform distribution over the
/// same cells. Zero for an empty histogram.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if counts.is_empty() || total == 0 {
        return 0.0;
    }
    let expected = total as f64 / counts.len() as f64;
    counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum()
}

/// Largest over smallest count; infinite when some cell is empty.
pub fn max_min_ratio(counts: &[u64]) -> f64 {
    let (Some(&hi), Some(&lo)) = (counts.iter().max(), counts.iter().min()) else {
        return f64::INFINITY;
    };
    if lo == 0 {
        f64::INFINITY
    } else {
        hi as f64 / lo as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskStats {
    pub task: TaskKind,
    pub questions: u64,
    /// Counts over the task's achievable answers, in vocabulary order.
    pub histogram: Vec<(String, u64)>,
    pub max_min_ratio: f64,
    pub chi_square: f64,
    pub degrees_of_freedom: u32,
}

impl TaskStats {
    /// `counts` pairs every achievable answer with how often it occurs.
    pub fn new(task: TaskKind, counts: &[(Answer, u64)]) -> Self {
        let cells: Vec<u64> = counts.iter().map(|(_, c)| *c).collect();
        Self {
            task,
            questions: cells.iter().sum(),
            histogram: counts.iter().map(|(a, c)| (alloc::format!("{a}"), *c)).collect(),
            max_min_ratio: max_min_ratio(&cells),
            chi_square: chi_square_uniform(&cells),
            degrees_of_freedom: cells.len().saturating_sub(1) as u32,
        }
    }

    /// Share of the most common answer: the accuracy of always guessing it.
    pub fn top_share(&self) -> f64 {
        let top = self.histogram.iter().map(|(_, c)| *c).max().unwrap_or(0);
        if self.questions == 0 {
            0.0
        } else {
            top as f64 / self.questions as f64
        }
    }
}
