use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, SeededRng};

use super::{check_labels, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub min_leaf: usize,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            min_leaf: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf {
        prob: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A CART classification tree storing the positive-class frequency per leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { prob } => return *prob,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
    pub n_trees: usize,
    pub seed: u64,
    n_features: usize,
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

struct Grower<'a> {
    x: &'a Matrix,
    y: &'a [bool],
    min_leaf: usize,
    n_candidates: usize,
    rng: SeededRng,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Grower<'_> {
    fn best_split_on(&self, rows: &[usize], feature: usize, parent: f64) -> Option<BestSplit> {
        let mut pairs: Vec<(f64, bool)> = rows.iter().map(|&r| (self.x.get(r, feature), self.y[r])).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = pairs.len();
        let total_pos = pairs.iter().filter(|p| p.1).count();
        let mut left_pos = 0;
        let mut best: Option<BestSplit> = None;
        for i in 0..n - 1 {
            left_pos += usize::from(pairs[i].1);
            let n_left = i + 1;
            if pairs[i].0 == pairs[i + 1].0 || n_left < self.min_leaf || n - n_left < self.min_leaf {
                continue;
            }
            let weighted = (n_left as f64 * gini(left_pos, n_left)
                + (n - n_left) as f64 * gini(total_pos - left_pos, n - n_left))
                / n as f64;
            let gain = parent - weighted;
            if gain > 1e-12 && best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(BestSplit {
                    feature,
                    threshold: 0.5 * (pairs[i].0 + pairs[i + 1].0),
                    gain,
                });
            }
        }
        best
    }

    fn grow(&mut self, rows: Vec<usize>) -> usize {
        let n = rows.len();
        let pos = rows.iter().filter(|&&r| self.y[r]).count();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            prob: pos as f64 / n as f64,
        });
        if pos == 0 || pos == n || n < 2 * self.min_leaf {
            return id;
        }
        let parent = gini(pos, n);
        // sample the candidate features; fall back to the rest, in random
        // order, if none of them yields a useful split
        let d = self.x.n_cols();
        let order = self.rng.sample_indices(d, d);
        let mut best: Option<BestSplit> = None;
        for (k, &f) in order.iter().enumerate() {
            if k >= self.n_candidates && best.is_some() {
                break;
            }
            if let Some(s) = self.best_split_on(&rows, f, parent) {
                if best.as_ref().is_none_or(|b| s.gain > b.gain) {
                    best = Some(s);
                }
            }
        }
        let Some(split) = best else { return id };
        let (left, right): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&r| self.x.get(r, split.feature) <= split.threshold);
        let l = self.grow(left);
        let r = self.grow(right);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: l,
            right: r,
        };
        id
    }
}

fn fit_tree(x: &Matrix, y: &[bool], config: &ForestConfig, seed: u64) -> DecisionTree {
    let mut rng = SeededRng::new(seed);
    let n = x.n_rows();
    let rows: Vec<usize> = (0..n).map(|_| rng.below(n)).collect();
    let d = x.n_cols();
    let mut grower = Grower {
        x,
        y,
        min_leaf: config.min_leaf.max(1),
        n_candidates: (d as f64).sqrt().ceil().max(1.0) as usize,
        rng,
        nodes: Vec::new(),
    };
    grower.grow(rows);
    DecisionTree { nodes: grower.nodes }
}

/// Bagged CART trees; each tree's seed is derived from `(seed, tree index)`
/// so the result does not depend on thread scheduling.
pub fn fit_random_forest(x: &Matrix, y: &[bool], config: &ForestConfig, seed: u64) -> Result<RandomForest> {
    check_labels(y, x.n_rows())?;
    if !x.all_finite() {
        return Err(Error::NonFinite);
    }
    if config.n_trees == 0 {
        return Err(Error::InsufficientSupport("a forest needs at least one tree".into()));
    }
    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|i| fit_tree(x, y, config, derive_seed(seed, &format!("tree/{i}"))))
        .collect();
    Ok(RandomForest {
        trees,
        n_trees: config.n_trees,
        seed,
        n_features: x.n_cols(),
    })
}

/// Mean of per-tree leaf frequencies.
pub fn rf_predict_proba(forest: &RandomForest, x: &Matrix) -> Result<Vec<f64>> {
    if x.n_cols() != forest.n_features {
        return Err(Error::Dimension {
            expected: forest.n_features,
            actual: x.n_cols(),
        });
    }
    Ok((0..x.n_rows())
        .map(|i| {
            let row = x.row(i);
            forest.trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / forest.trees.len() as f64
        })
        .collect())
}
