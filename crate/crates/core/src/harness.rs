//! The benchmark loop: scenarios x seeds x methods, with per-cell error
//! and timeout isolation.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;
use std::sync::mpsc;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fairness::{
    builtin_method, builtin_method_ids, delta_scores, sensitive_groups, write_deltas_csv, DeltaRecord,
    GroupedPredictions, Intervention, MetricSet, RunStatus, ScoreRecord, BASELINE,
};
use crate::frame::{format_float, split_indices, Table};
use crate::ingest::{load_table, Cache};
use crate::learn::target_labels;
use crate::manifest::{CorpusRegistry, DatasetAnnotation, Scenario};
use crate::rng::derive_seed;
use crate::transform::{transform_pipeline, TransformConfig};

pub const DEFAULT_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
pub const DEFAULT_TEST_FRACTION: f64 = 0.3;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(300);
pub const RUNS_CSV_HEADER: [&str; 9] = [
    "scenario_id",
    "method",
    "seed",
    "status",
    "bacc",
    "f1",
    "eod",
    "dpd",
    "message",
];

#[derive(Debug, Clone)]
pub struct BenchmarkPlan {
    pub scenarios: Vec<Scenario>,
    pub methods: Vec<String>,
    pub seeds: Vec<u64>,
    pub test_fraction: f64,
    pub transform: TransformConfig,
    pub timeout: Duration,
}

impl BenchmarkPlan {
    pub fn new(scenarios: Vec<Scenario>, methods: Vec<String>) -> Self {
        Self {
            scenarios,
            methods,
            seeds: DEFAULT_SEEDS.to_vec(),
            test_fraction: DEFAULT_TEST_FRACTION,
            transform: TransformConfig::binarized(),
            timeout: DEFAULT_TIMEOUT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.methods.iter().any(|m| m == BASELINE) {
            return Err(Error::Plan(format!("methods must include `{BASELINE}`")));
        }
        if self.seeds.is_empty() {
            return Err(Error::Plan("at least one seed is required".into()));
        }
        if self.scenarios.is_empty() {
            return Err(Error::Plan("no scenarios".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Plan(format!("test fraction {} outside (0, 1)", self.test_fraction)));
        }
        let mut seen = std::collections::HashSet::new();
        for m in &self.methods {
            if !seen.insert(m) {
                return Err(Error::Plan(format!("method `{m}` listed twice")));
            }
        }
        Ok(())
    }
}

/// Methods available to a benchmark run, by id.
#[derive(Clone)]
pub struct MethodRegistry {
    methods: BTreeMap<String, Arc<dyn Intervention>>,
}

impl MethodRegistry {
    pub fn empty() -> Self {
        Self {
            methods: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        for id in builtin_method_ids() {
            r.register(builtin_method(id).expect("builtin id"));
        }
        r
    }

    pub fn register(&mut self, method: Arc<dyn Intervention>) {
        self.methods.insert(method.id().to_string(), method);
    }

    pub fn get(&self, id: &str) -> Result<Arc<dyn Intervention>> {
        self.methods
            .get(id)
            .cloned()
            .ok_or_else(|| Error::UnknownMethod(id.to_string()))
    }

    pub fn ids(&self) -> Vec<&str> {
        self.methods.keys().map(String::as_str).collect()
    }
}

impl Default for MethodRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub scenario_id: String,
    pub method: String,
    pub seed: u64,
    pub status: RunStatus,
    /// Present only when `status` is ok.
    pub metrics: Option<MetricSet>,
    pub message: Option<String>,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkResult {
    pub runs: Vec<RunRecord>,
    pub deltas: Vec<DeltaRecord>,
}

struct Prepared {
    train: Arc<Table>,
    test: Arc<Table>,
}

fn evaluate(method: &dyn Intervention, train: &Table, test: &Table, seed: u64) -> Result<MetricSet> {
    let predictions = method.fit(train, seed)?.predict(test)?;
    let (_, groups) = sensitive_groups(test)?;
    let gp = GroupedPredictions::new(target_labels(test)?, predictions, groups)?;
    Ok(MetricSet::compute(&gp))
}

fn run_cell(
    method: Arc<dyn Intervention>,
    data: &Prepared,
    seed: u64,
    timeout: Duration,
) -> (RunStatus, Option<MetricSet>, Option<String>, Duration) {
    let (tx, rx) = mpsc::channel();
    let train = Arc::clone(&data.train);
    let test = Arc::clone(&data.test);
    let start = Instant::now();
    let spawned = std::thread::Builder::new()
        .name(format!("cell-{}", method.id()))
        .spawn(move || {
            let _ = tx.send(evaluate(method.as_ref(), &train, &test, seed));
        });
    if let Err(e) = spawned {
        return (RunStatus::Error, None, Some(e.to_string()), start.elapsed());
    }
    match rx.recv_timeout(timeout) {
        Ok(Ok(metrics)) => (RunStatus::Ok, Some(metrics), None, start.elapsed()),
        Ok(Err(e)) => (RunStatus::Error, None, Some(e.to_string()), start.elapsed()),
        Err(mpsc::RecvTimeoutError::Timeout) => (
            RunStatus::Timeout,
            None,
            Some(format!("exceeded {} s", timeout.as_secs_f64())),
            start.elapsed(),
        ),
        Err(mpsc::RecvTimeoutError::Disconnected) => {
            (RunStatus::Error, None, Some("method panicked".into()), start.elapsed())
        }
    }
}

/// Runs every cell of the plan on tables supplied by `load`, which is
/// called once per dataset. Loading or transform failures mark the affected
/// cells as errors; only plan misconfiguration returns `Err`.
pub fn run_benchmark_with<F>(plan: &BenchmarkPlan, methods: &MethodRegistry, load: F) -> Result<BenchmarkResult>
where
    F: Fn(&str) -> Result<(DatasetAnnotation, Table)>,
{
    plan.validate()?;
    let resolved: Vec<Arc<dyn Intervention>> =
        plan.methods.iter().map(|m| methods.get(m)).collect::<Result<_>>()?;

    let mut loaded: HashMap<String, std::result::Result<(DatasetAnnotation, Table), String>> = HashMap::new();
    // (scenario index, seed) -> prepared split or failure message
    let mut prepared: Vec<std::result::Result<Prepared, String>> = Vec::new();
    for scenario in &plan.scenarios {
        let data = loaded
            .entry(scenario.dataset_id.clone())
            .or_insert_with(|| load(&scenario.dataset_id).map_err(|e| e.to_string()));
        let transformed = data.as_ref().map_err(Clone::clone).and_then(|(annotation, table)| {
            transform_pipeline(table, annotation, scenario, &plan.transform)
                .map(|(t, _)| t)
                .map_err(|e| e.to_string())
        });
        for &seed in &plan.seeds {
            prepared.push(transformed.as_ref().map_err(Clone::clone).and_then(|t| {
                let split_seed = derive_seed(seed, &scenario.scenario_id);
                let (train, test) =
                    split_indices(t.n_rows(), plan.test_fraction, split_seed).map_err(|e| e.to_string())?;
                Ok(Prepared {
                    train: Arc::new(t.take_rows(&train)),
                    test: Arc::new(t.take_rows(&test)),
                })
            }));
        }
    }

    let n_seeds = plan.seeds.len();
    let n_methods = resolved.len();
    let cells: Vec<(usize, usize, usize)> = (0..plan.scenarios.len())
        .flat_map(|s| (0..n_seeds).flat_map(move |k| (0..n_methods).map(move |m| (s, k, m))))
        .collect();
    let runs: Vec<RunRecord> = cells
        .par_iter()
        .map(|&(s, k, m)| {
            let scenario = &plan.scenarios[s];
            let seed = plan.seeds[k];
            let method_id = &plan.methods[m];
            let (status, metrics, message, wall_time) = match &prepared[s * n_seeds + k] {
                Ok(data) => {
                    let cell_seed = derive_seed(seed, &format!("{}/{}", scenario.scenario_id, method_id));
                    run_cell(Arc::clone(&resolved[m]), data, cell_seed, plan.timeout)
                }
                Err(msg) => (RunStatus::Error, None, Some(msg.clone()), Duration::ZERO),
            };
            RunRecord {
                scenario_id: scenario.scenario_id.clone(),
                method: method_id.clone(),
                seed,
                status,
                metrics,
                message,
                wall_time,
            }
        })
        .collect();

    let scores: Vec<ScoreRecord> = runs
        .iter()
        .flat_map(|r| {
            MetricSet::default().entries().map(|(name, _)| ScoreRecord {
                scenario_id: r.scenario_id.clone(),
                method: r.method.clone(),
                seed: r.seed,
                metric: name.to_string(),
                score: r.metrics.and_then(|m| m.get(name)),
                status: r.status,
            })
        })
        .collect();
    let deltas = delta_scores(&scores);
    Ok(BenchmarkResult { runs, deltas })
}

/// Runs the plan against datasets fetched through the cache.
pub fn run_benchmark(
    plan: &BenchmarkPlan,
    registry: &CorpusRegistry,
    cache: &Cache,
    methods: &MethodRegistry,
) -> Result<BenchmarkResult> {
    for s in &plan.scenarios {
        let a = registry.get(&s.dataset_id)?;
        for attr in &s.sensitive_selection {
            if !a.sensitive_attributes.contains(attr) {
                return Err(Error::Plan(format!("`{attr}` is not a sensitive attribute of `{}`", a.dataset_id)));
            }
        }
    }
    run_benchmark_with(plan, methods, |id| {
        let annotation = registry.get(id)?.clone();
        let table = load_table(&annotation, cache)?;
        Ok((annotation, table))
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

/// Run records without timings, so reruns are byte-identical.
pub fn write_runs_csv<W: Write>(runs: &[RunRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RUNS_CSV_HEADER)?;
    for r in runs {
        let m = r.metrics.unwrap_or_default();
        w.write_record([
            r.scenario_id.clone(),
            r.method.clone(),
            r.seed.to_string(),
            r.status.as_str().to_string(),
            opt(m.bacc),
            opt(m.f1),
            opt(m.eod),
            opt(m.dpd),
            r.message.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timings_csv<W: Write>(runs: &[RunRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["scenario_id", "method", "seed", "wall_time_s"])?;
    for r in runs {
        w.write_record([
            r.scenario_id.clone(),
            r.method.clone(),
            r.seed.to_string(),
            format!("{:.6}", r.wall_time.as_secs_f64()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `runs.csv`, `deltas.csv` and `timings.csv` into `dir`.
pub fn write_outputs(result: &BenchmarkResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_runs_csv(&result.runs, std::fs::File::create(dir.join("runs.csv"))?)?;
    write_deltas_csv(&result.deltas, std::fs::File::create(dir.join("deltas.csv"))?)?;
    write_timings_csv(&result.runs, std::fs::File::create(dir.join("timings.csv"))?)?;
    Ok(())
}
