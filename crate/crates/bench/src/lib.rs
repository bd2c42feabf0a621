//! Inputs shared by the benchmarks.

use faircorpus_core::learn::Matrix;
use faircorpus_core::select::ScenarioMeta;
use faircorpus_core::SeededRng;

/// Random vector with many ties, as delta vectors tend to have.
pub fn tied_vector(n: usize, rng: &mut SeededRng) -> Vec<f64> {
    (0..n).map(|_| rng.below(20) as f64 * 0.01).collect()
}

/// Symmetric correlation matrix over `n` scenarios spread across `n / 3 + 1`
/// datasets.
pub fn correlation_fixture(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<ScenarioMeta>) {
    let mut rng = SeededRng::new(seed);
    let mut corr = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in 0..i {
            let c = rng.unit() * 2.0 - 1.0;
            corr[i][j] = c;
            corr[j][i] = c;
        }
    }
    let meta = (0..n)
        .map(|i| ScenarioMeta::from_scenario_id(&format!("d{}::s{i}", i % (n / 3 + 1))))
        .collect();
    (corr, meta)
}

/// Two noisy clusters in `d` dimensions.
pub fn classification_fixture(n: usize, d: usize, seed: u64) -> (Matrix, Vec<bool>) {
    let mut rng = SeededRng::new(seed);
    let y: Vec<bool> = (0..n).map(|_| rng.unit() < 0.4).collect();
    let rows: Vec<Vec<f64>> = y
        .iter()
        .map(|&l| (0..d).map(|_| rng.unit() + if l { 0.3 } else { 0.0 }).collect())
        .collect();
    (Matrix::from_rows(&rows).expect("rectangular rows"), y)
}
