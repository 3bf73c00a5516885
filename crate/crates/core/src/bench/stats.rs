//! Box-plot statistics and rank aggregation over run records.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::RunRecord;
use crate::error::{Error, Result};

/// Linear-interpolation quantile of sorted data (`(n−1)p` positions).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub n: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    /// Most extreme data within 1.5·IQR of the box.
    pub whisker_lo: f64,
    pub whisker_hi: f64,
    pub outliers: Vec<f64>,
}

impl BoxStats {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("box plot group".into()));
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q1 = quantile_sorted(&v, 0.25);
        let q3 = quantile_sorted(&v, 0.75);
        let iqr = q3 - q1;
        let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
        let inside: Vec<f64> = v.iter().copied().filter(|x| (lo_fence..=hi_fence).contains(x)).collect();
        Ok(Self {
            n: v.len(),
            median: quantile_sorted(&v, 0.5),
            q1,
            q3,
            whisker_lo: inside.first().copied().unwrap_or(q1),
            whisker_hi: inside.last().copied().unwrap_or(q3),
            outliers: v.iter().copied().filter(|x| !(lo_fence..=hi_fence).contains(x)).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRow {
    pub model: String,
    pub target: String,
    pub l: usize,
    pub stats: BoxStats,
}

/// Test-MSE box statistics per `(model, target, L)` over successful runs.
pub fn aggregate_boxplot(records: &[RunRecord]) -> Result<Vec<BoxRow>> {
    let mut groups: BTreeMap<(String, String, usize), Vec<f64>> = BTreeMap::new();
    for rec in records {
        if let Some(mse) = rec.test_mse {
            groups.entry((rec.model.clone(), rec.target.clone(), rec.l)).or_default().push(mse);
        }
    }
    if groups.is_empty() {
        return Err(Error::Empty("no successful records".into()));
    }
    groups
        .into_iter()
        .map(|((model, target, l), v)| Ok(BoxRow { model, target, l, stats: BoxStats::from_values(&v)? }))
        .collect()
}

/// Ranks of `values` ascending, ties receiving the average of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub l: usize,
    pub model: String,
    pub mean_rank: f64,
    /// Standard error of the mean.
    pub sem: f64,
    pub n: usize,
}

/// Mean rank per `(L, model)`: models are ranked by test MSE within each
/// `(target, replicate, L)` and the ranks averaged over targets and replicates.
pub fn aggregate_ranking(records: &[RunRecord]) -> Result<Vec<RankRow>> {
    let mut cells: BTreeMap<(usize, String, usize), Vec<(String, f64)>> = BTreeMap::new();
    for rec in records {
        if let Some(mse) = rec.test_mse {
            cells.entry((rec.l, rec.target.clone(), rec.replicate)).or_default().push((rec.model.clone(), mse));
        }
    }
    if cells.is_empty() {
        return Err(Error::Empty("no successful records".into()));
    }
    let mut ranks: BTreeMap<(usize, String), Vec<f64>> = BTreeMap::new();
    for ((l, _, _), entries) in cells {
        let values: Vec<f64> = entries.iter().map(|e| e.1).collect();
        for ((model, _), rank) in entries.into_iter().zip(average_ranks(&values)) {
            ranks.entry((l, model)).or_default().push(rank);
        }
    }
    Ok(ranks
        .into_iter()
        .map(|((l, model), r)| {
            let (mean, sem) = mean_sem(&r);
            RankRow { l, model, mean_rank: mean, sem, n: r.len() }
        })
        .collect())
}

/// Mean and standard error (sample standard deviation over `√n`; 0 for n = 1).
pub fn mean_sem(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_value_quartiles_by_hand() {
        // positions 1 and 3 of [1, 2, 3, 4, 100]
        let b = BoxStats::from_values(&[100.0, 3.0, 1.0, 4.0, 2.0]).unwrap();
        assert_eq!((b.q1, b.median, b.q3), (2.0, 3.0, 4.0));
        assert_eq!(b.outliers, vec![100.0]);
        assert_eq!((b.whisker_lo, b.whisker_hi), (1.0, 4.0));
    }

    #[test]
    fn interpolated_quartile() {
        // (n−1)p = 0.75 → 1 + 0.75·(2−1)
        assert_eq!(quantile_sorted(&[1.0, 2.0, 3.0, 4.0], 0.25), 1.75);
    }

    #[test]
    fn constant_values_give_zero_width() {
        let b = BoxStats::from_values(&[0.5; 7]).unwrap();
        assert_eq!(b.q3 - b.q1, 0.0);
        assert!(b.outliers.is_empty());
    }

    #[test]
    fn empty_group_is_an_error() {
        assert!(BoxStats::from_values(&[]).is_err());
    }

    #[test]
    fn ties_share_the_average_rank() {
        assert_eq!(average_ranks(&[0.3, 0.1, 0.3, 0.2]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn sem_by_hand() {
        let (m, s) = mean_sem(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
