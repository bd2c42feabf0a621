//! Greedy selection of scenarios whose delta-score vectors are as weakly
//! rank-correlated as possible.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fairness::{builtin_method_ids, DeltaRecord, DeltaStatus, BASELINE, METRIC_NAMES};
use crate::learn::average_ranks;
use crate::manifest::{CorpusRegistry, Scenario};

/// Below this many complete pairs a correlation is treated as +1.
pub const MIN_COMPLETE_PAIRS: usize = 3;

/// Spearman correlation over pairwise-complete entries: Pearson correlation
/// of average ranks. `None` with fewer than two complete pairs or when
/// either side is constant.
pub fn spearman(x: &[Option<f64>], y: &[Option<f64>]) -> Option<f64> {
    let (a, b): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
        .unzip();
    spearman_dense(&a, &b)
}

pub fn spearman_dense(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Correlation used for selection: undefined values and pairs with too
/// little overlap count as +1.
pub fn selection_correlation(x: &[Option<f64>], y: &[Option<f64>]) -> f64 {
    let complete = x.iter().zip(y).filter(|(a, b)| a.is_some() && b.is_some()).count();
    if complete < MIN_COMPLETE_PAIRS {
        return 1.0;
    }
    spearman(x, y).unwrap_or(1.0)
}

/// Per-scenario delta vectors over a shared `(method, seed, metric)` axis.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaMatrix {
    pub scenario_ids: Vec<String>,
    pub axis: Vec<(String, u64, String)>,
    pub values: Vec<Vec<Option<f64>>>,
}

fn canonical_rank(list: &[&str], name: &str) -> usize {
    list.iter().position(|m| *m == name).unwrap_or(list.len())
}

fn axis_order(a: &(String, u64, String), b: &(String, u64, String)) -> Ordering {
    let methods = builtin_method_ids();
    (canonical_rank(&methods, &a.0), &a.0, a.1, canonical_rank(&METRIC_NAMES, &a.2), &a.2).cmp(&(
        canonical_rank(&methods, &b.0),
        &b.0,
        b.1,
        canonical_rank(&METRIC_NAMES, &b.2),
        &b.2,
    ))
}

impl DeltaMatrix {
    /// Baseline rows are left out (their deltas are zero by construction);
    /// records without an ok status become missing entries.
    pub fn from_records(records: &[DeltaRecord]) -> Result<Self> {
        let mut axis_set = BTreeSet::new();
        let mut ids = BTreeSet::new();
        for r in records.iter().filter(|r| r.method != BASELINE) {
            axis_set.insert((r.method.clone(), r.seed, r.metric.clone()));
            ids.insert(r.scenario_id.clone());
        }
        let mut axis: Vec<_> = axis_set.into_iter().collect();
        axis.sort_by(axis_order);
        let pos: HashMap<&(String, u64, String), usize> = axis.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let scenario_ids: Vec<String> = ids.into_iter().collect();
        let row: HashMap<&str, usize> = scenario_ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut values = vec![vec![None; axis.len()]; scenario_ids.len()];
        for r in records.iter().filter(|r| r.method != BASELINE) {
            let key = (r.method.clone(), r.seed, r.metric.clone());
            let v = if r.status == DeltaStatus::Ok { r.delta } else { None };
            values[row[r.scenario_id.as_str()]][pos[&key]] = v;
        }
        Ok(Self {
            scenario_ids,
            axis,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.scenario_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenario_ids.is_empty()
    }

    /// Keeps only scenarios for which `keep` holds.
    pub fn retain(&mut self, mut keep: impl FnMut(&str) -> bool) {
        let mut ids = Vec::new();
        let mut values = Vec::new();
        for (id, v) in self.scenario_ids.drain(..).zip(self.values.drain(..)) {
            if keep(&id) {
                ids.push(id);
                values.push(v);
            }
        }
        self.scenario_ids = ids;
        self.values = values;
    }

    /// Pairwise selection correlations; diagonal is 1.
    pub fn correlation_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { 1.0 } else { selection_correlation(&self.values[i], &self.values[j]) })
                    .collect()
            })
            .collect()
    }

    /// True when every pair's correlation is undefined.
    fn all_undefined(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| {
            (0..n).all(|j| {
                i == j || {
                    let c = self.values[i].iter().zip(&self.values[j]).filter(|(a, b)| a.is_some() && b.is_some()).count();
                    c < MIN_COMPLETE_PAIRS || spearman(&self.values[i], &self.values[j]).is_none()
                }
            })
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKey {
    Dataset,
    Country,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionConstraints {
    pub k: Option<usize>,
    pub tau: Option<f64>,
    pub group_keys: Vec<GroupKey>,
    /// Label of the scenario filter applied before selection, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<String>,
}

impl SelectionConstraints {
    pub fn new(k: Option<usize>, tau: Option<f64>) -> Self {
        Self {
            k,
            tau,
            group_keys: vec![GroupKey::Dataset],
            filter: None,
        }
    }

    pub fn with_country(mut self) -> Self {
        if !self.group_keys.contains(&GroupKey::Country) {
            self.group_keys.push(GroupKey::Country);
        }
        self
    }

    fn validate(&self) -> Result<()> {
        if self.k.is_none() && self.tau.is_none() {
            return Err(Error::Selection("either k or tau is required".into()));
        }
        if self.k == Some(0) {
            return Err(Error::Selection("k must be positive".into()));
        }
        if self.tau.is_some_and(|t| !t.is_finite()) {
            return Err(Error::Selection("tau must be finite".into()));
        }
        Ok(())
    }
}

/// Exclusion attributes of a scenario.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioMeta {
    pub scenario_id: String,
    pub dataset_id: String,
    /// Empty when the country is not applicable.
    pub countries: Vec<String>,
}

impl ScenarioMeta {
    /// Dataset taken from the id; no country information.
    pub fn from_scenario_id(id: &str) -> Self {
        let dataset_id = id.split_once("::").map_or(id, |(d, _)| d).to_string();
        Self {
            scenario_id: id.to_string(),
            dataset_id,
            countries: Vec::new(),
        }
    }

    /// Dataset and country from the registry when the dataset is known.
    pub fn from_registry(id: &str, registry: &CorpusRegistry) -> Self {
        let mut meta = Self::from_scenario_id(id);
        if let Ok(sc) = Scenario::parse(id) {
            if let Ok(a) = registry.get(&sc.dataset_id) {
                meta.countries = a.country.codes().to_vec();
            }
        }
        meta
    }

    fn conflicts(&self, other: &ScenarioMeta, keys: &[GroupKey]) -> bool {
        self.dataset_id == other.dataset_id
            || (keys.contains(&GroupKey::Country) && self.countries.iter().any(|c| other.countries.contains(c)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectionEntry {
    pub scenario_id: String,
    pub dataset_id: String,
    pub avg_correlation_at_insertion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Collection {
    pub constraints: SelectionConstraints,
    pub entries: Vec<CollectionEntry>,
}

impl Collection {
    pub fn scenario_ids(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.scenario_id.as_str()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// argmin by value, ties broken by scenario id.
fn argmin(cands: &[usize], score: impl Fn(usize) -> f64, meta: &[ScenarioMeta]) -> Option<(usize, f64)> {
    cands
        .iter()
        .map(|&c| (c, score(c)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then_with(|| meta[a.0].scenario_id.cmp(&meta[b.0].scenario_id)))
}

/// Greedy selection over a precomputed correlation matrix; `meta[i]`
/// describes row `i`.
pub fn select_from_correlations(
    corr: &[Vec<f64>],
    meta: &[ScenarioMeta],
    constraints: &SelectionConstraints,
) -> Result<Collection> {
    constraints.validate()?;
    let n = meta.len();
    if n == 0 {
        return Err(Error::Selection("no scenarios to select from".into()));
    }
    if corr.len() != n || corr.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension {
            expected: n,
            actual: corr.len(),
        });
    }
    let all: Vec<usize> = (0..n).collect();
    let global_mean = |i: usize| {
        if n == 1 {
            0.0
        } else {
            (0..n).filter(|&j| j != i).map(|j| corr[i][j]).sum::<f64>() / (n - 1) as f64
        }
    };
    let (first, first_stat) = argmin(&all, global_mean, meta).expect("non-empty pool");
    let mut selected = vec![first];
    let mut entries = vec![CollectionEntry {
        scenario_id: meta[first].scenario_id.clone(),
        dataset_id: meta[first].dataset_id.clone(),
        avg_correlation_at_insertion: first_stat,
    }];
    let mut pool: Vec<usize> = all
        .into_iter()
        .filter(|&c| c != first && !meta[c].conflicts(&meta[first], &constraints.group_keys))
        .collect();
    while constraints.k.is_none_or(|k| selected.len() < k) && !pool.is_empty() {
        let mean_to_selected =
            |c: usize| selected.iter().map(|&s| corr[c][s]).sum::<f64>() / selected.len() as f64;
        let (pick, stat) = argmin(&pool, mean_to_selected, meta).expect("non-empty pool");
        if constraints.tau.is_some_and(|tau| stat >= tau) {
            break;
        }
        selected.push(pick);
        entries.push(CollectionEntry {
            scenario_id: meta[pick].scenario_id.clone(),
            dataset_id: meta[pick].dataset_id.clone(),
            avg_correlation_at_insertion: stat,
        });
        pool.retain(|&c| c != pick && !meta[c].conflicts(&meta[pick], &constraints.group_keys));
    }
    Ok(Collection {
        constraints: constraints.clone(),
        entries,
    })
}

/// Builds the correlation matrix from delta vectors and runs the greedy
/// selection. Scenarios without an entry in `meta` get dataset-only metadata.
pub fn select_collection(
    deltas: &DeltaMatrix,
    meta: &[ScenarioMeta],
    constraints: &SelectionConstraints,
) -> Result<Collection> {
    constraints.validate()?;
    if deltas.is_empty() {
        return Err(Error::Selection("no scenarios to select from".into()));
    }
    if deltas.len() > 1 && deltas.all_undefined() {
        return Err(Error::Selection("all delta vectors are constant or too sparse".into()));
    }
    let by_id: HashMap<&str, &ScenarioMeta> = meta.iter().map(|m| (m.scenario_id.as_str(), m)).collect();
    let rows: Vec<ScenarioMeta> = deltas
        .scenario_ids
        .iter()
        .map(|id| by_id.get(id.as_str()).map_or_else(|| ScenarioMeta::from_scenario_id(id), |m| (*m).clone()))
        .collect();
    select_from_correlations(&deltas.correlation_matrix(), &rows, constraints)
}
