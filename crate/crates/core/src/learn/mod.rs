//! Small learners used by the profiler and the benchmark harness.

mod forest;
mod logistic;
mod metrics;

pub use forest::{fit_random_forest, rf_predict_proba, DecisionTree, ForestConfig, RandomForest};
pub use logistic::{
    fit_logistic, log_loss, log_loss_gradient, predict_labels, predict_proba, LogisticConfig,
    LogisticModel,
};
pub use metrics::{average_ranks, roc_auc};

use crate::error::{Error, Result};
use crate::frame::{Role, Table};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::Dimension {
                expected: n_rows * n_cols,
                actual: data.len(),
            });
        }
        Ok(Self { n_rows, n_cols, data })
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    /// Builds from rows; all rows must share a length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for r in rows {
            if r.len() != n_cols {
                return Err(Error::Dimension {
                    expected: n_cols,
                    actual: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            n_rows: rows.len(),
            n_cols,
            data,
        })
    }

    /// Builds from columns of equal length.
    pub fn from_columns(columns: &[Vec<f64>], n_rows: usize) -> Result<Self> {
        let n_cols = columns.len();
        let mut data = vec![0.0; n_rows * n_cols];
        for (j, c) in columns.iter().enumerate() {
            if c.len() != n_rows {
                return Err(Error::Dimension {
                    expected: n_rows,
                    actual: c.len(),
                });
            }
            for (i, v) in c.iter().enumerate() {
                data[i * n_cols + j] = *v;
            }
        }
        Ok(Self { n_rows, n_cols, data })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n_cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, j)).collect()
    }

    pub fn take_rows(&self, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.n_cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Matrix {
            n_rows: rows.len(),
            n_cols: self.n_cols,
            data,
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Feature-role columns of a fully numeric table as a matrix, with names.
pub fn feature_matrix(table: &Table) -> Result<(Matrix, Vec<String>)> {
    let cols: Vec<_> = table.columns_with_role(Role::Feature).collect();
    if cols.is_empty() {
        return Err(Error::NoFeatures);
    }
    let mut values = Vec::with_capacity(cols.len());
    for c in &cols {
        values.push(c.dense_f64()?);
    }
    let names = cols.iter().map(|c| c.name().to_string()).collect();
    Ok((Matrix::from_columns(&values, table.n_rows())?, names))
}

/// The target column as 0/1 labels.
pub fn target_labels(table: &Table) -> Result<Vec<bool>> {
    let target = table
        .target()
        .ok_or_else(|| Error::UnknownColumn("<target>".into()))?;
    Ok(target.dense_f64()?.into_iter().map(|v| v != 0.0).collect())
}

pub(crate) fn check_labels(y: &[bool], n_rows: usize) -> Result<()> {
    if y.len() != n_rows {
        return Err(Error::Dimension {
            expected: n_rows,
            actual: y.len(),
        });
    }
    let pos = y.iter().filter(|v| **v).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::SingleClass);
    }
    Ok(())
}
