//! Dataset meta-features, computed on the prepared table and on its
//! binarized transform.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{DType, Role, Table};
use crate::learn::{feature_matrix, fit_random_forest, rf_predict_proba, roc_auc, ForestConfig};
use crate::manifest::{DatasetAnnotation, Scenario};
use crate::rng::SeededRng;
use crate::transform::{MAJORITY, MINORITY};

/// Serializes non-finite floats as `null` and reads `null` back as NaN.
mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaProfile {
    pub meta_pretrans_n_rows: usize,
    pub meta_pretrans_n_cols: usize,
    pub meta_n_rows: usize,
    pub meta_n_cols: usize,
    #[serde(rename = "meta_pretrans_prop_NA_rows", with = "nullable")]
    pub meta_pretrans_prop_na_rows: f64,
    #[serde(rename = "meta_pretrans_prop_NA_cols", with = "nullable")]
    pub meta_pretrans_prop_na_cols: f64,
    #[serde(rename = "meta_pretrans_prop_NA_cells", with = "nullable")]
    pub meta_pretrans_prop_na_cells: f64,
    #[serde(rename = "meta_prop_NA_sens_minority", with = "nullable")]
    pub meta_prop_na_sens_minority: f64,
    #[serde(rename = "meta_prop_NA_sens_majority", with = "nullable")]
    pub meta_prop_na_sens_majority: f64,
    #[serde(with = "nullable")]
    pub meta_prop_cols_float: f64,
    #[serde(with = "nullable")]
    pub meta_prop_cols_int: f64,
    #[serde(with = "nullable")]
    pub meta_prop_cols_bool: f64,
    #[serde(with = "nullable")]
    pub meta_sens_predictability_roc_auc: f64,
    #[serde(with = "nullable")]
    pub meta_average_absolute_correlation: f64,
    #[serde(with = "nullable")]
    pub meta_maximum_absolute_correlation: f64,
    pub meta_pretrans_unique_group_counts_pre_agg: Vec<usize>,
    #[serde(with = "nullable")]
    pub meta_prev_sens_minority: f64,
    #[serde(with = "nullable")]
    pub meta_prev_sens_majority: f64,
    #[serde(with = "nullable")]
    pub meta_prev_sens_difference: f64,
    #[serde(with = "nullable")]
    pub meta_prev_sens_ratio: f64,
    #[serde(with = "nullable")]
    pub meta_prev_sens_gini: f64,
    #[serde(with = "nullable")]
    pub meta_base_rate_target: f64,
    #[serde(with = "nullable")]
    pub meta_base_rate_target_sens_minority: f64,
    #[serde(with = "nullable")]
    pub meta_base_rate_target_sens_majority: f64,
    #[serde(with = "nullable")]
    pub meta_base_rate_difference: f64,
    #[serde(with = "nullable")]
    pub meta_base_rate_ratio: f64,
    #[serde(with = "nullable")]
    pub meta_base_rate_sens_gini: f64,
}

impl MetaProfile {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Probability that two draws (with replacement) land in different groups.
pub fn gini_simpson(proportions: &[f64]) -> Result<f64> {
    if proportions.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::Proportions(format!("{proportions:?} has entries outside [0, 1]")));
    }
    let total: f64 = proportions.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Proportions(format!("{proportions:?} sums to {total}")));
    }
    Ok(1.0 - proportions.iter().map(|p| p * p).sum::<f64>())
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return 0.0;
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
}

/// 0/1 coding of a two-valued column: the lexicographically first value is 0
/// (`majority` before `minority`).
fn sensitive_coding(table: &Table, sensitive_col: &str) -> Result<Vec<bool>> {
    let col = table.column(sensitive_col)?;
    let values = col
        .rendered()
        .into_iter()
        .map(|v| v.ok_or_else(|| Error::NonBinarySensitive(format!("`{sensitive_col}` has missing values"))))
        .collect::<Result<Vec<_>>>()?;
    let distinct: BTreeSet<&String> = values.iter().collect();
    if distinct.len() > 2 {
        return Err(Error::NonBinarySensitive(sensitive_col.to_string()));
    }
    let first = distinct.into_iter().next().cloned();
    Ok(values.iter().map(|v| Some(v) != first.as_ref()).collect())
}

/// Mean and maximum absolute Pearson correlation between each feature and
/// the 0/1-coded sensitive column. Constant columns count as 0.
pub fn bivariate_correlations(table: &Table, sensitive_col: &str) -> Result<(f64, f64)> {
    let s: Vec<f64> = sensitive_coding(table, sensitive_col)?
        .into_iter()
        .map(|b| f64::from(u8::from(b)))
        .collect();
    let features: Vec<_> = table
        .columns_with_role(Role::Feature)
        .filter(|c| c.name() != sensitive_col)
        .collect();
    if features.is_empty() {
        return Err(Error::NoFeatures);
    }
    let mut sum = 0.0;
    let mut max: f64 = 0.0;
    for c in &features {
        let r = pearson(&c.dense_f64()?, &s).abs();
        sum += r;
        max = max.max(r);
    }
    Ok((sum / features.len() as f64, max))
}

/// Holdout ROC-AUC of a random forest predicting the sensitive column from
/// the features (stratified 70/30 split).
pub fn sensitive_auc(table: &Table, sensitive_col: &str, seed: u64) -> Result<f64> {
    let labels = sensitive_coding(table, sensitive_col)?;
    let (x, _) = feature_matrix(table)?;
    // rows in content order, so the result does not depend on row order
    let mut canonical: Vec<usize> = (0..labels.len()).collect();
    canonical.sort_by(|&a, &b| {
        x.row(a)
            .iter()
            .zip(x.row(b))
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(labels[a].cmp(&labels[b]))
    });
    let mut rng = SeededRng::new(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [false, true] {
        let mut idx: Vec<usize> = canonical.iter().copied().filter(|&i| labels[i] == class).collect();
        rng.shuffle(&mut idx);
        let n_test = (0.3 * idx.len() as f64).round() as usize;
        if n_test == 0 || n_test == idx.len() {
            return Err(Error::InsufficientSupport(format!(
                "sensitive class with {} rows cannot be stratified",
                idx.len()
            )));
        }
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    let rank: Vec<usize> = {
        let mut r = vec![0; canonical.len()];
        for (k, &i) in canonical.iter().enumerate() {
            r[i] = k;
        }
        r
    };
    train.sort_unstable_by_key(|&i| rank[i]);
    test.sort_unstable_by_key(|&i| rank[i]);
    let y_train: Vec<bool> = train.iter().map(|&i| labels[i]).collect();
    let y_test: Vec<bool> = test.iter().map(|&i| labels[i]).collect();
    let forest = fit_random_forest(&x.take_rows(&train), &y_train, &ForestConfig::default(), seed)?;
    roc_auc(&rf_predict_proba(&forest, &x.take_rows(&test))?, &y_test)
}

fn ratio(a: f64, b: f64) -> f64 {
    let (lo, hi) = (a.min(b), a.max(b));
    if hi == 0.0 {
        1.0
    } else {
        lo / hi
    }
}

/// All meta-features. `post` must be the binarized transform of `pre` with
/// rows aligned (no rows dropped).
pub fn profile_dataset(
    pre: &Table,
    post: &Table,
    annotation: &DatasetAnnotation,
    scenario: &Scenario,
    seed: u64,
) -> Result<MetaProfile> {
    if pre.n_rows() != post.n_rows() {
        return Err(Error::Dimension {
            expected: pre.n_rows(),
            actual: post.n_rows(),
        });
    }
    if scenario.dataset_id != annotation.dataset_id {
        return Err(Error::InvalidScenario(scenario.scenario_id.clone()));
    }
    let n = pre.n_rows() as f64;
    let row_missing = pre.rows_with_missing();
    let na_rows = row_missing.iter().filter(|m| **m).count() as f64;
    let na_cols = pre.columns().iter().filter(|c| c.n_missing() > 0).count() as f64;
    let cells = (pre.n_rows() * pre.n_cols()) as f64;

    let sens_col = post
        .columns_with_role(Role::Sensitive)
        .next()
        .ok_or_else(|| Error::NonBinarySensitive("no sensitive column".into()))?;
    let sensitive_col = sens_col.name().to_string();
    let groups = sens_col.rendered();
    for g in groups.iter() {
        if !matches!(g.as_deref(), Some(MAJORITY) | Some(MINORITY)) {
            return Err(Error::NonBinarySensitive(format!(
                "`{sensitive_col}` is not grouped into {MAJORITY}/{MINORITY}"
            )));
        }
    }
    let is_minority: Vec<bool> = groups.iter().map(|g| g.as_deref() == Some(MINORITY)).collect();
    let n_min = is_minority.iter().filter(|m| **m).count() as f64;
    let n_maj = n - n_min;

    let target = post
        .target()
        .ok_or_else(|| Error::UnknownColumn(annotation.target_column.clone()))?
        .dense_f64()?;
    let (mut pos_min, mut pos_maj, mut na_min, mut na_maj) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..post.n_rows() {
        let pos = f64::from(u8::from(target[i] != 0.0));
        let na = f64::from(u8::from(row_missing[i]));
        if is_minority[i] {
            pos_min += pos;
            na_min += na;
        } else {
            pos_maj += pos;
            na_maj += na;
        }
    }

    let n_post_cols = post.n_cols() as f64;
    let dtype_share = |d: DType| post.columns().iter().filter(|c| c.dtype() == d).count() as f64 / n_post_cols;

    let mut unique_counts = Vec::new();
    for attr in &scenario.sensitive_selection {
        let col = pre.column(attr)?;
        let distinct: BTreeSet<String> = col.rendered().into_iter().flatten().collect();
        unique_counts.push(distinct.len());
    }

    let p_min = n_min / n;
    let p_maj = n_maj / n;
    let br_min = pos_min / n_min;
    let br_maj = pos_maj / n_maj;
    let br_sum = br_min + br_maj;
    let br_gini = if br_sum > 0.0 {
        gini_simpson(&[br_maj / br_sum, br_min / br_sum])?
    } else if br_sum == 0.0 {
        0.5
    } else {
        f64::NAN
    };
    let (avg_corr, max_corr) = bivariate_correlations(post, &sensitive_col)?;

    Ok(MetaProfile {
        meta_pretrans_n_rows: pre.n_rows(),
        meta_pretrans_n_cols: pre.n_cols(),
        meta_n_rows: post.n_rows(),
        meta_n_cols: post.n_cols(),
        meta_pretrans_prop_na_rows: na_rows / n,
        meta_pretrans_prop_na_cols: na_cols / pre.n_cols() as f64,
        meta_pretrans_prop_na_cells: pre.n_missing_cells() as f64 / cells,
        meta_prop_na_sens_minority: na_min / n_min,
        meta_prop_na_sens_majority: na_maj / n_maj,
        meta_prop_cols_float: dtype_share(DType::Float),
        meta_prop_cols_int: dtype_share(DType::Int),
        meta_prop_cols_bool: dtype_share(DType::Bool),
        meta_sens_predictability_roc_auc: sensitive_auc(post, &sensitive_col, seed)?,
        meta_average_absolute_correlation: avg_corr,
        meta_maximum_absolute_correlation: max_corr,
        meta_pretrans_unique_group_counts_pre_agg: unique_counts,
        meta_prev_sens_minority: p_min,
        meta_prev_sens_majority: p_maj,
        meta_prev_sens_difference: (p_maj - p_min).abs(),
        meta_prev_sens_ratio: ratio(p_min, p_maj),
        meta_prev_sens_gini: gini_simpson(&[p_maj, p_min])?,
        meta_base_rate_target: (pos_min + pos_maj) / n,
        meta_base_rate_target_sens_minority: br_min,
        meta_base_rate_target_sens_majority: br_maj,
        meta_base_rate_difference: (br_maj - br_min).abs(),
        meta_base_rate_ratio: if br_min.is_finite() && br_maj.is_finite() {
            ratio(br_min, br_maj)
        } else {
            f64::NAN
        },
        meta_base_rate_sens_gini: br_gini,
    })
}
