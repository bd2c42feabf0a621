use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const METRIC_NAMES: [&str; 4] = ["bacc", "f1", "eod", "dpd"];

/// Labels, hard predictions, optional scores and group membership per row.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedPredictions {
    pub y: Vec<bool>,
    pub y_hat: Vec<bool>,
    pub scores: Option<Vec<f64>>,
    pub group: Vec<String>,
}

impl GroupedPredictions {
    pub fn new(y: Vec<bool>, y_hat: Vec<bool>, group: Vec<String>) -> Result<Self> {
        for len in [y_hat.len(), group.len()] {
            if len != y.len() {
                return Err(Error::Dimension {
                    expected: y.len(),
                    actual: len,
                });
            }
        }
        Ok(Self {
            y,
            y_hat,
            scores: None,
            group,
        })
    }

    pub fn with_scores(mut self, scores: Vec<f64>) -> Result<Self> {
        if scores.len() != self.y.len() {
            return Err(Error::Dimension {
                expected: self.y.len(),
                actual: scores.len(),
            });
        }
        self.scores = Some(scores);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    fn confusion(&self) -> (usize, usize, usize, usize) {
        let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
        for (&y, &p) in self.y.iter().zip(&self.y_hat) {
            match (y, p) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (false, false) => tn += 1,
                (true, false) => fn_ += 1,
            }
        }
        (tp, fp, tn, fn_)
    }

    /// Row indices per group, groups in lexicographic order.
    fn by_group(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, g) in self.group.iter().enumerate() {
            groups.entry(g.as_str()).or_default().push(i);
        }
        groups
    }
}

fn spread(rates: impl Iterator<Item = f64>) -> Option<f64> {
    let (lo, hi) = rates.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
    (lo <= hi).then_some(hi - lo)
}

/// Mean of recall and specificity; `None` unless both classes occur.
pub fn balanced_accuracy(gp: &GroupedPredictions) -> Option<f64> {
    let (tp, fp, tn, fn_) = gp.confusion();
    if tp + fn_ == 0 || tn + fp == 0 {
        return None;
    }
    let recall = tp as f64 / (tp + fn_) as f64;
    let specificity = tn as f64 / (tn + fp) as f64;
    Some((recall + specificity) / 2.0)
}

/// Harmonic mean of precision and recall. Zero when nothing is predicted
/// positive; `None` when there are no actual positives.
pub fn f1_score(gp: &GroupedPredictions) -> Option<f64> {
    let (tp, fp, _, fn_) = gp.confusion();
    if tp + fn_ == 0 {
        return None;
    }
    if tp == 0 {
        return Some(0.0);
    }
    Some(2.0 * tp as f64 / (2 * tp + fp + fn_) as f64)
}

/// Largest gap in true-positive rate between groups that have positives.
pub fn equalized_odds_difference(gp: &GroupedPredictions) -> Option<f64> {
    let groups = gp.by_group();
    spread(groups.values().filter_map(|rows| {
        let pos: Vec<usize> = rows.iter().copied().filter(|&i| gp.y[i]).collect();
        (!pos.is_empty()).then(|| pos.iter().filter(|&&i| gp.y_hat[i]).count() as f64 / pos.len() as f64)
    }))
}

/// Largest gap in selection rate between groups.
pub fn demographic_parity_difference(gp: &GroupedPredictions) -> Option<f64> {
    let groups = gp.by_group();
    spread(
        groups
            .values()
            .map(|rows| rows.iter().filter(|&&i| gp.y_hat[i]).count() as f64 / rows.len() as f64),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricSet {
    pub bacc: Option<f64>,
    pub f1: Option<f64>,
    pub eod: Option<f64>,
    pub dpd: Option<f64>,
}

impl MetricSet {
    pub fn compute(gp: &GroupedPredictions) -> Self {
        Self {
            bacc: balanced_accuracy(gp),
            f1: f1_score(gp),
            eod: equalized_odds_difference(gp),
            dpd: demographic_parity_difference(gp),
        }
    }

    pub fn get(&self, metric: &str) -> Option<f64> {
        match metric {
            "bacc" => self.bacc,
            "f1" => self.f1,
            "eod" => self.eod,
            "dpd" => self.dpd,
            _ => None,
        }
    }

    /// `(name, value)` pairs in canonical order.
    pub fn entries(&self) -> [(&'static str, Option<f64>); 4] {
        [
            ("bacc", self.bacc),
            ("f1", self.f1),
            ("eod", self.eod),
            ("dpd", self.dpd),
        ]
    }
}
