use crate::error::{Error, Result};

use super::{check_labels, Matrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticConfig {
    pub max_iter: usize,
    pub tolerance: f64,
    pub learning_rate: f64,
    /// L2 strength on the (standardized) weights; the intercept is not penalized.
    pub ridge: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tolerance: 1e-6,
            learning_rate: 0.1,
            ridge: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    /// Weights on standardized features.
    pub weights: Vec<f64>,
    pub intercept: f64,
    /// Per-feature `(mean, stddev)`; zero-variance features get stddev 1 and weight 0.
    pub standardization: Vec<(f64, f64)>,
    pub iterations: usize,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn linear(x: &[f64], params: &[f64]) -> f64 {
    let d = x.len();
    x.iter().zip(&params[..d]).map(|(a, w)| a * w).sum::<f64>() + params[d]
}

/// Mean log-loss plus `ridge/2 * |w|^2`; `params` is `[w_1..w_d, b]`.
pub fn log_loss(x: &Matrix, y: &[bool], params: &[f64], ridge: f64) -> f64 {
    let n = x.n_rows() as f64;
    let mut total = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let z = linear(x.row(i), params);
        total += softplus(z) - if yi { z } else { 0.0 };
    }
    let d = x.n_cols();
    total / n + 0.5 * ridge * params[..d].iter().map(|w| w * w).sum::<f64>()
}

/// Analytic gradient of [`log_loss`] with respect to `params`.
pub fn log_loss_gradient(x: &Matrix, y: &[bool], params: &[f64], ridge: f64) -> Vec<f64> {
    let d = x.n_cols();
    let n = x.n_rows() as f64;
    let mut grad = vec![0.0; d + 1];
    for (i, &yi) in y.iter().enumerate() {
        let row = x.row(i);
        let r = sigmoid(linear(row, params)) - f64::from(u8::from(yi));
        for j in 0..d {
            grad[j] += r * row[j];
        }
        grad[d] += r;
    }
    for (j, g) in grad.iter_mut().enumerate() {
        *g /= n;
        if j < d {
            *g += ridge * params[j];
        }
    }
    grad
}

fn standardize(x: &Matrix) -> (Matrix, Vec<(f64, f64)>) {
    let n = x.n_rows() as f64;
    let mut stats = Vec::with_capacity(x.n_cols());
    for j in 0..x.n_cols() {
        let col = x.column(j);
        let mean = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        stats.push(if sd > 1e-12 { (mean, sd) } else { (mean, 1.0) });
    }
    (apply_standardization(x, &stats), stats)
}

fn apply_standardization(x: &Matrix, stats: &[(f64, f64)]) -> Matrix {
    let mut out = Matrix::zeros(x.n_rows(), x.n_cols());
    for i in 0..x.n_rows() {
        for (j, (m, s)) in stats.iter().enumerate() {
            out.set(i, j, (x.get(i, j) - m) / s);
        }
    }
    out
}

/// Full-batch gradient descent on standardized features. The step size
/// halves whenever a step would increase the loss.
pub fn fit_logistic(x: &Matrix, y: &[bool], config: &LogisticConfig) -> Result<LogisticModel> {
    check_labels(y, x.n_rows())?;
    if !x.all_finite() {
        return Err(Error::NonFinite);
    }
    let (xs, stats) = standardize(x);
    let d = x.n_cols();
    let mut params = vec![0.0; d + 1];
    let mut lr = config.learning_rate;
    let mut loss = log_loss(&xs, y, &params, config.ridge);
    let mut iterations = 0;
    while iterations < config.max_iter {
        let grad = log_loss_gradient(&xs, y, &params, config.ridge);
        if grad.iter().all(|g| g.abs() < config.tolerance) {
            break;
        }
        iterations += 1;
        loop {
            let candidate: Vec<f64> = params.iter().zip(&grad).map(|(p, g)| p - lr * g).collect();
            let new_loss = log_loss(&xs, y, &candidate, config.ridge);
            if new_loss <= loss || lr < 1e-12 {
                params = candidate;
                loss = new_loss;
                break;
            }
            lr *= 0.5;
        }
    }
    let intercept = params.pop().unwrap_or(0.0);
    Ok(LogisticModel {
        weights: params,
        intercept,
        standardization: stats,
        iterations,
    })
}

pub fn predict_proba(model: &LogisticModel, x: &Matrix) -> Result<Vec<f64>> {
    if x.n_cols() != model.weights.len() {
        return Err(Error::Dimension {
            expected: model.weights.len(),
            actual: x.n_cols(),
        });
    }
    Ok((0..x.n_rows())
        .map(|i| {
            let z: f64 = x
                .row(i)
                .iter()
                .zip(&model.standardization)
                .zip(&model.weights)
                .map(|((v, (m, s)), w)| (v - m) / s * w)
                .sum();
            sigmoid(z + model.intercept)
        })
        .collect())
}

/// Hard labels at a 0.5 threshold.
pub fn predict_labels(model: &LogisticModel, x: &Matrix) -> Result<Vec<bool>> {
    Ok(predict_proba(model, x)?.into_iter().map(|p| p >= 0.5).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable() -> (Matrix, Vec<bool>) {
        let rows = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.5],
            vec![0.5, 1.0],
            vec![1.0, 1.0],
            vec![3.0, 3.0],
            vec![4.0, 3.5],
            vec![3.5, 4.0],
            vec![4.0, 4.0],
        ];
        let y = vec![false, false, false, false, true, true, true, true];
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn separable_fits_perfectly() {
        let (x, y) = separable();
        let m = fit_logistic(&x, &y, &LogisticConfig::default()).unwrap();
        assert_eq!(predict_labels(&m, &x).unwrap(), y);
    }

    #[test]
    fn intercept_only_recovers_base_rate() {
        let x = Matrix::zeros(10, 1);
        let y: Vec<bool> = (0..10).map(|i| i < 3).collect();
        let m = fit_logistic(&x, &y, &LogisticConfig { max_iter: 5000, ..Default::default() }).unwrap();
        assert_eq!(m.weights, [0.0]);
        for p in predict_proba(&m, &x).unwrap() {
            assert!((p - 0.3).abs() < 1e-4, "{p}");
        }
    }

    #[test]
    fn single_class_rejected() {
        let x = Matrix::zeros(3, 1);
        assert!(matches!(
            fit_logistic(&x, &[true, true, true], &LogisticConfig::default()),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn non_finite_rejected() {
        let x = Matrix::from_rows(&[vec![f64::NAN], vec![1.0]]).unwrap();
        assert!(matches!(
            fit_logistic(&x, &[true, false], &LogisticConfig::default()),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn hand_computed_probability() {
        let m = LogisticModel {
            weights: vec![2.0, -1.0],
            intercept: 0.5,
            standardization: vec![(1.0, 2.0), (0.0, 1.0)],
            iterations: 0,
        };
        let x = Matrix::from_rows(&[vec![3.0, 1.0]]).unwrap();
        // z = 2*(3-1)/2 - 1*1 + 0.5 = 1.5
        let expected = 1.0 / (1.0 + (-1.5f64).exp());
        assert!((predict_proba(&m, &x).unwrap()[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn zero_model_is_half() {
        let m = LogisticModel {
            weights: vec![0.0],
            intercept: 0.0,
            standardization: vec![(0.0, 1.0)],
            iterations: 0,
        };
        let x = Matrix::from_rows(&[vec![5.0], vec![-3.0]]).unwrap();
        assert_eq!(predict_proba(&m, &x).unwrap(), [0.5, 0.5]);
        assert!(predict_proba(&m, &Matrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn saturation() {
        assert!(sigmoid(800.0) > 1.0 - 1e-12);
        assert!(sigmoid(-800.0) < 1e-12);
        assert!(softplus(800.0).is_finite());
    }
}
