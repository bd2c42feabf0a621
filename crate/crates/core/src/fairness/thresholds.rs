use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exhaustive search covers `101^groups` combinations; beyond three groups
/// that stops being practical.
pub const MAX_THRESHOLD_GROUPS: usize = 3;
const GRID_STEPS: usize = 100;
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdObjective {
    Eod,
    Dpd,
}

/// `0.00, 0.01, ..., 1.00`.
pub fn threshold_grid() -> Vec<f64> {
    (0..=GRID_STEPS).map(|i| i as f64 / GRID_STEPS as f64).collect()
}

/// Per-threshold counts of one group.
struct GroupCounts {
    n: usize,
    n_pos: usize,
    n_neg: usize,
    /// predicted positive among positives, per grid index
    tp: Vec<usize>,
    /// predicted positive among negatives, per grid index
    fp: Vec<usize>,
}

fn count_at_least(sorted: &[f64], t: f64) -> usize {
    sorted.len() - sorted.partition_point(|&s| s < t)
}

/// Grid search for one threshold per group minimizing the chosen fairness
/// gap; ties go to higher balanced accuracy, then to the lexicographically
/// lowest threshold vector (groups in lexicographic order).
pub fn fit_group_thresholds(
    scores: &[f64],
    group: &[String],
    y: &[bool],
    objective: ThresholdObjective,
) -> Result<BTreeMap<String, f64>> {
    if scores.len() != group.len() || scores.len() != y.len() {
        return Err(Error::Dimension {
            expected: scores.len(),
            actual: group.len().min(y.len()),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut rows: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, g) in group.iter().enumerate() {
        rows.entry(g.as_str()).or_default().push(i);
    }
    if rows.is_empty() {
        return Err(Error::Threshold("no rows to fit".into()));
    }
    if rows.len() > MAX_THRESHOLD_GROUPS {
        return Err(Error::Threshold(format!(
            "{} groups exceed the supported maximum of {MAX_THRESHOLD_GROUPS}",
            rows.len()
        )));
    }
    let grid = threshold_grid();
    let counts: Vec<GroupCounts> = rows
        .values()
        .map(|idx| {
            let mut pos: Vec<f64> = idx.iter().filter(|&&i| y[i]).map(|&i| scores[i]).collect();
            let mut neg: Vec<f64> = idx.iter().filter(|&&i| !y[i]).map(|&i| scores[i]).collect();
            pos.sort_by(f64::total_cmp);
            neg.sort_by(f64::total_cmp);
            GroupCounts {
                n: idx.len(),
                n_pos: pos.len(),
                n_neg: neg.len(),
                tp: grid.iter().map(|&t| count_at_least(&pos, t)).collect(),
                fp: grid.iter().map(|&t| count_at_least(&neg, t)).collect(),
            }
        })
        .collect();
    let total_pos: usize = counts.iter().map(|c| c.n_pos).sum();
    let total_neg: usize = counts.iter().map(|c| c.n_neg).sum();

    let evaluate = |combo: &[usize]| -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let (mut tp, mut fp) = (0, 0);
        for (c, &t) in counts.iter().zip(combo) {
            tp += c.tp[t];
            fp += c.fp[t];
            let rate = match objective {
                ThresholdObjective::Eod if c.n_pos == 0 => continue,
                ThresholdObjective::Eod => c.tp[t] as f64 / c.n_pos as f64,
                ThresholdObjective::Dpd => (c.tp[t] + c.fp[t]) as f64 / c.n as f64,
            };
            lo = lo.min(rate);
            hi = hi.max(rate);
        }
        let gap = if lo <= hi { hi - lo } else { 0.0 };
        let mut terms = 0.0;
        let mut k = 0.0;
        if total_pos > 0 {
            terms += tp as f64 / total_pos as f64;
            k += 1.0;
        }
        if total_neg > 0 {
            terms += 1.0 - fp as f64 / total_neg as f64;
            k += 1.0;
        }
        let bacc = if k > 0.0 { terms / k } else { 0.0 };
        (gap, bacc)
    };

    let n_groups = counts.len();
    let mut combo = vec![0usize; n_groups];
    let mut best = combo.clone();
    let (mut best_gap, mut best_bacc) = evaluate(&combo);
    // odometer over the grid, first group most significant
    'search: loop {
        let mut pos = n_groups;
        loop {
            if pos == 0 {
                break 'search;
            }
            pos -= 1;
            combo[pos] += 1;
            if combo[pos] <= GRID_STEPS {
                break;
            }
            combo[pos] = 0;
        }
        let (gap, bacc) = evaluate(&combo);
        let better = gap < best_gap - TIE_TOLERANCE
            || ((gap - best_gap).abs() <= TIE_TOLERANCE && bacc > best_bacc + TIE_TOLERANCE);
        if better {
            best_gap = gap;
            best_bacc = bacc;
            best.clone_from(&combo);
        }
    }
    Ok(rows
        .keys()
        .zip(best)
        .map(|(g, t)| (g.to_string(), grid[t]))
        .collect())
}

/// `score >= threshold[group]` per row.
pub fn apply_group_thresholds(
    scores: &[f64],
    group: &[String],
    thresholds: &BTreeMap<String, f64>,
) -> Result<Vec<bool>> {
    if scores.len() != group.len() {
        return Err(Error::Dimension {
            expected: scores.len(),
            actual: group.len(),
        });
    }
    scores
        .iter()
        .zip(group)
        .map(|(s, g)| {
            let t = thresholds
                .get(g)
                .ok_or_else(|| Error::Threshold(format!("no threshold for group `{g}`")))?;
            Ok(*s >= *t)
        })
        .collect()
}
