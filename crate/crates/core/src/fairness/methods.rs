use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::frame::{Role, Table};
use crate::learn::{feature_matrix, fit_logistic, predict_proba, target_labels, LogisticConfig, LogisticModel};

use super::repair::disparate_impact_repair;
use super::thresholds::{apply_group_thresholds, fit_group_thresholds, ThresholdObjective};

/// A benchmarked method. It receives the binarized training split (one
/// sensitive column, a bool target, numeric/bool features) and returns a
/// model that labels a test split of the same shape.
pub trait Intervention: Send + Sync {
    fn id(&self) -> &str;
    fn fit(&self, train: &Table, seed: u64) -> Result<Box<dyn FittedModel>>;
}

pub trait FittedModel: Send {
    fn predict(&self, test: &Table) -> Result<Vec<bool>>;
}

/// Name and per-row values of the single sensitive column.
pub fn sensitive_groups(table: &Table) -> Result<(String, Vec<String>)> {
    let mut cols = table.columns_with_role(Role::Sensitive);
    let col = cols
        .next()
        .ok_or_else(|| Error::NonBinarySensitive("no sensitive column".into()))?;
    if cols.next().is_some() {
        return Err(Error::NonBinarySensitive("more than one sensitive column".into()));
    }
    let values = col
        .rendered()
        .into_iter()
        .map(|v| v.ok_or_else(|| Error::NonBinarySensitive(format!("`{}` has missing values", col.name()))))
        .collect::<Result<_>>()?;
    Ok((col.name().to_string(), values))
}

struct Logistic {
    model: LogisticModel,
    features: Vec<String>,
}

impl Logistic {
    fn fit(train: &Table) -> Result<Self> {
        let (x, features) = feature_matrix(train)?;
        let y = target_labels(train)?;
        let model = fit_logistic(&x, &y, &LogisticConfig::default())?;
        Ok(Self { model, features })
    }

    fn scores(&self, table: &Table) -> Result<Vec<f64>> {
        let (x, features) = feature_matrix(table)?;
        if features != self.features {
            return Err(Error::Dimension {
                expected: self.features.len(),
                actual: features.len(),
            });
        }
        predict_proba(&self.model, &x)
    }
}

impl FittedModel for Logistic {
    fn predict(&self, test: &Table) -> Result<Vec<bool>> {
        Ok(self.scores(test)?.into_iter().map(|p| p >= 0.5).collect())
    }
}

/// Plain logistic regression.
pub struct Baseline;

impl Intervention for Baseline {
    fn id(&self) -> &str {
        "baseline"
    }

    fn fit(&self, train: &Table, _seed: u64) -> Result<Box<dyn FittedModel>> {
        Ok(Box::new(Logistic::fit(train)?))
    }
}

/// Quantile repair of numeric features before logistic regression. The
/// test split is repaired on its own, using its own group distributions.
pub struct DisparateImpactRemover {
    pub repair_level: f64,
}

struct Repaired {
    inner: Logistic,
    sensitive: String,
    repair_level: f64,
}

impl FittedModel for Repaired {
    fn predict(&self, test: &Table) -> Result<Vec<bool>> {
        self.inner
            .predict(&disparate_impact_repair(test, &self.sensitive, self.repair_level)?)
    }
}

impl Intervention for DisparateImpactRemover {
    fn id(&self) -> &str {
        "dir"
    }

    fn fit(&self, train: &Table, _seed: u64) -> Result<Box<dyn FittedModel>> {
        let (sensitive, _) = sensitive_groups(train)?;
        let repaired = disparate_impact_repair(train, &sensitive, self.repair_level)?;
        Ok(Box::new(Repaired {
            inner: Logistic::fit(&repaired)?,
            sensitive,
            repair_level: self.repair_level,
        }))
    }
}

/// Logistic scores with per-group thresholds fitted on the training split.
pub struct GroupThresholdMethod {
    pub objective: ThresholdObjective,
}

struct Thresholded {
    inner: Logistic,
    thresholds: BTreeMap<String, f64>,
}

impl FittedModel for Thresholded {
    fn predict(&self, test: &Table) -> Result<Vec<bool>> {
        let (_, groups) = sensitive_groups(test)?;
        apply_group_thresholds(&self.inner.scores(test)?, &groups, &self.thresholds)
    }
}

impl Intervention for GroupThresholdMethod {
    fn id(&self) -> &str {
        match self.objective {
            ThresholdObjective::Eod => "group_thresholds_eod",
            ThresholdObjective::Dpd => "group_thresholds_dpd",
        }
    }

    fn fit(&self, train: &Table, _seed: u64) -> Result<Box<dyn FittedModel>> {
        let inner = Logistic::fit(train)?;
        let scores = inner.scores(train)?;
        let (_, groups) = sensitive_groups(train)?;
        let y = target_labels(train)?;
        let thresholds = fit_group_thresholds(&scores, &groups, &y, self.objective)?;
        Ok(Box::new(Thresholded { inner, thresholds }))
    }
}

pub fn builtin_method_ids() -> [&'static str; 4] {
    ["baseline", "dir", "group_thresholds_eod", "group_thresholds_dpd"]
}

pub fn builtin_method(id: &str) -> Option<Arc<dyn Intervention>> {
    Some(match id {
        "baseline" => Arc::new(Baseline),
        "dir" => Arc::new(DisparateImpactRemover { repair_level: 1.0 }),
        "group_thresholds_eod" => Arc::new(GroupThresholdMethod {
            objective: ThresholdObjective::Eod,
        }),
        "group_thresholds_dpd" => Arc::new(GroupThresholdMethod {
            objective: ThresholdObjective::Dpd,
        }),
        _ => return None,
    })
}
