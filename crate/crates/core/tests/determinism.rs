use std::sync::Arc;
use std::thread;

use faircorpus_core::harness::{run_benchmark_with, write_outputs, BenchmarkPlan, MethodRegistry};
use faircorpus_core::ingest::{fetch, load_table, Cache};
use faircorpus_core::manifest::{enumerate_scenarios, CorpusRegistry};
use faircorpus_core::profile::sensitive_auc;
use faircorpus_core::synthetic::{sensitive_independent, FIXTURE_SENSITIVE};
use faircorpus_core::SeededRng;

#[test]
fn sensitive_auc_ignores_row_order() {
    for seed in 0..3 {
        let t = sensitive_independent(2000, seed);
        let mut order: Vec<usize> = (0..t.n_rows()).collect();
        SeededRng::new(seed + 100).shuffle(&mut order);
        let a = sensitive_auc(&t, FIXTURE_SENSITIVE, seed).unwrap();
        let b = sensitive_auc(&t.take_rows(&order), FIXTURE_SENSITIVE, seed).unwrap();
        assert!((a - b).abs() <= 0.02, "{a} vs {b}");
    }
}

#[test]
fn concurrent_fetches_share_one_cache_entry() {
    let dir = tempfile::tempdir().unwrap();
    let a = Arc::new(CorpusRegistry::builtin().get("synthetic_lending").unwrap().clone());
    let handles: Vec<_> = (0..6)
        .map(|_| {
            let a = Arc::clone(&a);
            let root = dir.path().to_path_buf();
            thread::spawn(move || fetch(&a, &Cache::new(root)).unwrap())
        })
        .collect();
    let arts: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    assert!(arts.windows(2).all(|w| w[0].bytes == w[1].bytes));
    assert!(arts.iter().filter(|a| !a.from_cache).count() <= 1);
}

fn run_once(out: &std::path::Path, cache: &Cache) {
    let registry = CorpusRegistry::builtin();
    let annotation = registry.get("synthetic_lending").unwrap().clone();
    let scenarios = enumerate_scenarios(&annotation).unwrap().into_iter().take(2).collect();
    let mut plan = BenchmarkPlan::new(scenarios, vec!["baseline".into(), "dir".into()]);
    plan.seeds = vec![0, 1];
    let result = run_benchmark_with(&plan, &MethodRegistry::builtin(), |_| {
        Ok((annotation.clone(), load_table(&annotation, cache)?))
    })
    .unwrap();
    assert_eq!(result.runs.len(), 2 * 2 * 2);
    assert_eq!(result.deltas.len(), result.runs.len() * 4);
    write_outputs(&result, out).unwrap();
}

#[test]
fn benchmark_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path().join("cache"));
    run_once(&dir.path().join("a"), &cache);
    run_once(&dir.path().join("b"), &cache);
    for f in ["runs.csv", "deltas.csv"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}
