use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::frame::{Column, DType, Role, Table};
use crate::learn::average_ranks;

/// Linear interpolation over sorted values at quantile `q` in `[0, 1]`.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.len() == 1 {
        return sorted[0];
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn repair_values(values: &[f64], groups: &[Vec<usize>], lambda: f64) -> Vec<f64> {
    let sorted: Vec<Vec<f64>> = groups
        .iter()
        .map(|rows| {
            let mut v: Vec<f64> = rows.iter().map(|&r| values[r]).collect();
            v.sort_by(f64::total_cmp);
            v
        })
        .collect();
    let mut out = values.to_vec();
    for rows in groups {
        let own: Vec<f64> = rows.iter().map(|&r| values[r]).collect();
        let ranks = average_ranks(&own);
        let n = rows.len();
        for (k, &r) in rows.iter().enumerate() {
            let q = if n == 1 { 0.5 } else { (ranks[k] - 1.0) / (n - 1) as f64 };
            let mut at_q: Vec<f64> = sorted.iter().map(|s| quantile(s, q)).collect();
            let target = median(&mut at_q);
            out[r] = (1.0 - lambda) * values[r] + lambda * target;
        }
    }
    out
}

/// Rank-preserving quantile repair of every numeric (float or int) feature
/// towards the median of the per-group quantile functions. Bool, categorical
/// and text columns are left untouched; repaired int columns become floats.
pub fn disparate_impact_repair(table: &Table, sensitive_col: &str, lambda: f64) -> Result<Table> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("repair level {lambda} outside [0, 1]")));
    }
    let sens = table.column(sensitive_col)?;
    let mut by_group: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for i in 0..table.n_rows() {
        let g = sens
            .render(i)
            .ok_or_else(|| Error::NonBinarySensitive(format!("`{sensitive_col}` has missing values")))?;
        by_group.entry(g).or_default().push(i);
    }
    if by_group.len() > 2 {
        return Err(Error::NonBinarySensitive(format!(
            "`{sensitive_col}` has {} groups",
            by_group.len()
        )));
    }
    let groups: Vec<Vec<usize>> = by_group.into_values().collect();
    let mut columns = Vec::with_capacity(table.n_cols());
    for c in table.columns() {
        let repairable = matches!(c.dtype(), DType::Float | DType::Int)
            && c.role() == Role::Feature
            && c.name() != sensitive_col;
        if !repairable || lambda == 0.0 || groups.is_empty() {
            columns.push(c.clone());
            continue;
        }
        let values = c.dense_f64()?;
        let repaired = repair_values(&values, &groups, lambda);
        columns.push(Column::float(c.name(), repaired.into_iter().map(Some).collect()).with_role(c.role()));
    }
    Table::with_rows(columns, table.n_rows())
}
