//! Immutable column-typed tables, summary helpers and seeded splitting.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DType {
    Float,
    Int,
    Bool,
    Categorical,
    Text,
}

impl DType {
    pub fn is_numeric(self) -> bool {
        matches!(self, DType::Float | DType::Int)
    }

    pub fn is_stringly(self) -> bool {
        matches!(self, DType::Categorical | DType::Text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    #[default]
    Feature,
    Sensitive,
    Target,
    Other,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Float(Vec<f64>),
    Int(Vec<i64>),
    Bool(Vec<bool>),
    /// Codes index into `categories`, which is sorted and duplicate free.
    Categorical {
        codes: Vec<u32>,
        categories: Vec<String>,
    },
    Text(Vec<String>),
}

impl ColumnData {
    fn len(&self) -> usize {
        match self {
            ColumnData::Float(v) => v.len(),
            ColumnData::Int(v) => v.len(),
            ColumnData::Bool(v) => v.len(),
            ColumnData::Categorical { codes, .. } => codes.len(),
            ColumnData::Text(v) => v.len(),
        }
    }
}

/// A borrowed view of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell<'a> {
    Missing,
    Float(f64),
    Int(i64),
    Bool(bool),
    Str(&'a str),
}

impl Cell<'_> {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Float(v) => Some(v),
            Cell::Int(v) => Some(v as f64),
            Cell::Bool(v) => Some(if v { 1.0 } else { 0.0 }),
            _ => None,
        }
    }

    /// Canonical text form. Booleans render as `0`/`1`, missing as `None`.
    pub fn render(&self) -> Option<String> {
        match *self {
            Cell::Missing => None,
            Cell::Float(v) => Some(format_float(v)),
            Cell::Int(v) => Some(v.to_string()),
            Cell::Bool(v) => Some(if v { "1" } else { "0" }.to_string()),
            Cell::Str(s) => Some(s.to_string()),
        }
    }

    /// Compares a cell against a literal taken from an annotation, such as
    /// a target level. Numbers compare numerically, booleans accept the
    /// usual spellings.
    pub fn matches_literal(&self, literal: &str) -> bool {
        let lit = literal.trim();
        match *self {
            Cell::Missing => false,
            Cell::Str(s) => s == literal || s.trim() == lit,
            Cell::Int(v) => lit.parse::<f64>().map(|x| x == v as f64).unwrap_or(false),
            Cell::Float(v) => lit.parse::<f64>().map(|x| x == v).unwrap_or(false),
            Cell::Bool(v) => match lit.to_ascii_lowercase().as_str() {
                "1" | "true" | "1.0" => v,
                "0" | "false" | "0.0" => !v,
                _ => false,
            },
        }
    }
}

pub(crate) fn format_float(v: f64) -> String {
    format!("{v}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    name: String,
    role: Role,
    data: ColumnData,
    missing: Vec<bool>,
}

impl Column {
    /// Builds a column; panics if `missing` and `data` lengths differ.
    pub fn new(name: impl Into<String>, data: ColumnData, missing: Vec<bool>) -> Self {
        assert_eq!(data.len(), missing.len(), "mask length mismatch");
        Self {
            name: name.into(),
            role: Role::Feature,
            data,
            missing,
        }
    }

    pub fn float(name: impl Into<String>, values: Vec<Option<f64>>) -> Self {
        let missing = values.iter().map(Option::is_none).collect();
        let data = values.into_iter().map(|v| v.unwrap_or(0.0)).collect();
        Self::new(name, ColumnData::Float(data), missing)
    }

    pub fn int(name: impl Into<String>, values: Vec<Option<i64>>) -> Self {
        let missing = values.iter().map(Option::is_none).collect();
        let data = values.into_iter().map(|v| v.unwrap_or(0)).collect();
        Self::new(name, ColumnData::Int(data), missing)
    }

    pub fn bool(name: impl Into<String>, values: Vec<Option<bool>>) -> Self {
        let missing = values.iter().map(Option::is_none).collect();
        let data = values.into_iter().map(|v| v.unwrap_or(false)).collect();
        Self::new(name, ColumnData::Bool(data), missing)
    }

    /// Categorical column with a sorted vocabulary of the observed values.
    pub fn categorical<S: AsRef<str>>(name: impl Into<String>, values: &[Option<S>]) -> Self {
        let vocab: BTreeSet<&str> = values.iter().flatten().map(|s| s.as_ref()).collect();
        let categories: Vec<String> = vocab.iter().map(|s| s.to_string()).collect();
        let index: HashMap<&str, u32> = vocab
            .iter()
            .enumerate()
            .map(|(i, s)| (*s, i as u32))
            .collect();
        let codes = values
            .iter()
            .map(|v| v.as_ref().map(|s| index[s.as_ref()]).unwrap_or(0))
            .collect();
        let missing = values.iter().map(Option::is_none).collect();
        Self::new(name, ColumnData::Categorical { codes, categories }, missing)
    }

    pub fn text<S: AsRef<str>>(name: impl Into<String>, values: &[Option<S>]) -> Self {
        let missing = values.iter().map(Option::is_none).collect();
        let data = values
            .iter()
            .map(|v| v.as_ref().map(|s| s.as_ref().to_string()).unwrap_or_default())
            .collect();
        Self::new(name, ColumnData::Text(data), missing)
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn data(&self) -> &ColumnData {
        &self.data
    }

    pub fn missing_mask(&self) -> &[bool] {
        &self.missing
    }

    pub fn len(&self) -> usize {
        self.missing.len()
    }

    pub fn is_empty(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn dtype(&self) -> DType {
        match self.data {
            ColumnData::Float(_) => DType::Float,
            ColumnData::Int(_) => DType::Int,
            ColumnData::Bool(_) => DType::Bool,
            ColumnData::Categorical { .. } => DType::Categorical,
            ColumnData::Text(_) => DType::Text,
        }
    }

    /// Vocabulary of a categorical column.
    pub fn categories(&self) -> Option<&[String]> {
        match &self.data {
            ColumnData::Categorical { categories, .. } => Some(categories),
            _ => None,
        }
    }

    pub fn is_missing(&self, row: usize) -> bool {
        self.missing[row]
    }

    pub fn n_missing(&self) -> usize {
        self.missing.iter().filter(|m| **m).count()
    }

    pub fn cell(&self, row: usize) -> Cell<'_> {
        if self.missing[row] {
            return Cell::Missing;
        }
        match &self.data {
            ColumnData::Float(v) => Cell::Float(v[row]),
            ColumnData::Int(v) => Cell::Int(v[row]),
            ColumnData::Bool(v) => Cell::Bool(v[row]),
            ColumnData::Categorical { codes, categories } => {
                Cell::Str(&categories[codes[row] as usize])
            }
            ColumnData::Text(v) => Cell::Str(&v[row]),
        }
    }

    pub fn render(&self, row: usize) -> Option<String> {
        self.cell(row).render()
    }

    /// Rendered values with `None` for missing cells.
    pub fn rendered(&self) -> Vec<Option<String>> {
        (0..self.len()).map(|i| self.render(i)).collect()
    }

    /// Numeric view (bool as 0/1); `None` for missing cells. Errors on
    /// categorical and text columns.
    pub fn numeric_values(&self) -> Result<Vec<Option<f64>>> {
        if self.dtype().is_stringly() {
            return Err(Error::ColumnType {
                column: self.name.clone(),
                message: format!("expected a numeric column, found {:?}", self.dtype()),
            });
        }
        Ok((0..self.len()).map(|i| self.cell(i).as_f64()).collect())
    }

    /// Dense numeric view; errors if any cell is missing.
    pub fn dense_f64(&self) -> Result<Vec<f64>> {
        self.numeric_values()?
            .into_iter()
            .map(|v| {
                v.ok_or_else(|| Error::ColumnType {
                    column: self.name.clone(),
                    message: "column contains missing values".into(),
                })
            })
            .collect()
    }

    pub fn take(&self, rows: &[usize]) -> Column {
        let missing = rows.iter().map(|&r| self.missing[r]).collect();
        let data = match &self.data {
            ColumnData::Float(v) => ColumnData::Float(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Int(v) => ColumnData::Int(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Bool(v) => ColumnData::Bool(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Categorical { codes, categories } => ColumnData::Categorical {
                codes: rows.iter().map(|&r| codes[r]).collect(),
                categories: categories.clone(),
            },
            ColumnData::Text(v) => ColumnData::Text(rows.iter().map(|&r| v[r].clone()).collect()),
        };
        Column {
            name: self.name.clone(),
            role: self.role,
            data,
            missing,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    columns: Vec<Column>,
    n_rows: usize,
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let n_rows = columns.first().map(Column::len).unwrap_or(0);
        Self::with_rows(columns, n_rows)
    }

    /// Like [`Table::new`] but keeps an explicit row count for tables
    /// without columns.
    pub fn with_rows(columns: Vec<Column>, n_rows: usize) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut targets = 0;
        for c in &columns {
            if c.len() != n_rows {
                return Err(Error::InvalidTable(format!(
                    "column `{}` has {} rows, expected {}",
                    c.name,
                    c.len(),
                    n_rows
                )));
            }
            if !seen.insert(c.name.as_str()) {
                return Err(Error::DuplicateColumn(c.name.clone()));
            }
            if c.role == Role::Target {
                targets += 1;
            }
        }
        if targets > 1 {
            return Err(Error::InvalidTable("more than one target column".into()));
        }
        Ok(Self { columns, n_rows })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn into_columns(self) -> Vec<Column> {
        self.columns
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.position(name).is_some()
    }

    pub fn columns_with_role(&self, role: Role) -> impl Iterator<Item = &Column> {
        self.columns.iter().filter(move |c| c.role == role)
    }

    pub fn target(&self) -> Option<&Column> {
        self.columns_with_role(Role::Target).next()
    }

    pub fn roles(&self) -> Vec<(&str, Role)> {
        self.columns.iter().map(|c| (c.name(), c.role)).collect()
    }

    /// Returns a copy with `name`'s role replaced.
    pub fn with_role(&self, name: &str, role: Role) -> Result<Table> {
        let idx = self
            .position(name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))?;
        let mut columns = self.columns.clone();
        columns[idx].role = role;
        Table::with_rows(columns, self.n_rows)
    }

    pub fn take_rows(&self, rows: &[usize]) -> Table {
        Table {
            columns: self.columns.iter().map(|c| c.take(rows)).collect(),
            n_rows: rows.len(),
        }
    }

    /// Rows with at least one missing cell.
    pub fn rows_with_missing(&self) -> Vec<bool> {
        let mut out = vec![false; self.n_rows];
        for c in &self.columns {
            for (o, m) in out.iter_mut().zip(&c.missing) {
                *o |= *m;
            }
        }
        out
    }

    pub fn n_missing_cells(&self) -> usize {
        self.columns.iter().map(Column::n_missing).sum()
    }

    /// Writes the table as CSV with a header row. Missing cells are empty
    /// fields, booleans are `0`/`1`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for row in 0..self.n_rows {
            w.write_record(
                self.columns
                    .iter()
                    .map(|c| c.render(row).unwrap_or_default()),
            )?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Table[{} rows x {} cols]", self.n_rows, self.columns.len())
    }
}

/// Splits rows into a train and a test part.
///
/// The test part has `round(test_fraction * n_rows)` rows chosen by a
/// seeded Fisher-Yates shuffle of the row indices (first rows of the
/// shuffle go to test). Both parts keep the original row order.
pub fn train_test_split(table: &Table, test_fraction: f64, seed: u64) -> Result<(Table, Table)> {
    let (train, test) = split_indices(table.n_rows(), test_fraction, seed)?;
    Ok((table.take_rows(&train), table.take_rows(&test)))
}

/// Index form of [`train_test_split`]: `(train_rows, test_rows)`, each sorted.
pub fn split_indices(n_rows: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidSplit(format!(
            "test fraction {test_fraction} is outside (0, 1)"
        )));
    }
    if n_rows < 2 {
        return Err(Error::InvalidSplit(format!("{n_rows} rows cannot be split")));
    }
    let n_test = (test_fraction * n_rows as f64).round() as usize;
    if n_test == 0 || n_test == n_rows {
        return Err(Error::InvalidSplit(format!(
            "fraction {test_fraction} of {n_rows} rows leaves an empty part"
        )));
    }
    let mut rng = SeededRng::new(seed);
    let mut order: Vec<usize> = (0..n_rows).collect();
    rng.shuffle(&mut order);
    let mut test = order[..n_test].to_vec();
    let mut train = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

/// Median of the non-missing values; the mean of the two middle values for
/// even counts.
pub fn column_median(col: &Column) -> Result<f64> {
    let mut values: Vec<f64> = col.numeric_values()?.into_iter().flatten().collect();
    median_of(&mut values).ok_or_else(|| Error::ColumnType {
        column: col.name().to_string(),
        message: "all values are missing".into(),
    })
}

pub(crate) fn median_of(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    })
}

/// Counts of the rendered non-missing values, ordered by descending count
/// and then by value.
pub fn value_frequencies(col: &Column) -> Vec<(String, usize)> {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for row in 0..col.len() {
        if let Some(v) = col.render(row) {
            *counts.entry(v).or_default() += 1;
        }
    }
    let mut out: Vec<(String, usize)> = counts.into_iter().collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ten_rows() -> Table {
        Table::new(vec![Column::int("x", (0..10).map(Some).collect())]).unwrap()
    }

    #[test]
    fn split_sizes_and_partition() {
        let t = ten_rows();
        let (train, test) = train_test_split(&t, 0.3, 80539).unwrap();
        assert_eq!(train.n_rows(), 7);
        assert_eq!(test.n_rows(), 3);
        let mut all: Vec<String> = train
            .column("x")
            .unwrap()
            .rendered()
            .into_iter()
            .chain(test.column("x").unwrap().rendered())
            .flatten()
            .collect();
        all.sort_by_key(|s| s.parse::<i64>().unwrap());
        assert_eq!(all, (0..10).map(|i| i.to_string()).collect::<Vec<_>>());
    }

    #[test]
    fn split_is_deterministic() {
        assert_eq!(split_indices(10, 0.3, 80539).unwrap(), split_indices(10, 0.3, 80539).unwrap());
    }

    #[test]
    fn split_seeds_differ() {
        // Enumerated from the generator: seed 1 and seed 2 pick different
        // halves of four rows.
        let a = split_indices(4, 0.5, 1).unwrap();
        let b = split_indices(4, 0.5, 2).unwrap();
        assert_ne!(a.1, b.1);
    }

    #[test]
    fn split_rejects_bad_fraction() {
        assert!(matches!(split_indices(10, 0.0, 1), Err(Error::InvalidSplit(_))));
        assert!(matches!(split_indices(10, 1.0, 1), Err(Error::InvalidSplit(_))));
        assert!(matches!(split_indices(3, 0.1, 1), Err(Error::InvalidSplit(_))));
        assert!(matches!(split_indices(1, 0.5, 1), Err(Error::InvalidSplit(_))));
    }

    #[test]
    fn median_examples() {
        let c = |v: &[f64]| Column::float("c", v.iter().copied().map(Some).collect());
        assert_eq!(column_median(&c(&[1.0, 2.0, 4.0])).unwrap(), 2.0);
        assert_eq!(column_median(&c(&[1.0, 3.0])).unwrap(), 2.0);
        assert_eq!(column_median(&c(&[5.0])).unwrap(), 5.0);
        let with_missing = Column::int("m", vec![Some(1), None, Some(4), Some(2)]);
        assert_eq!(column_median(&with_missing).unwrap(), 2.0);
    }

    #[test]
    fn median_errors() {
        assert!(column_median(&Column::float("a", vec![None, None])).is_err());
        assert!(column_median(&Column::categorical("a", &[Some("x")])).is_err());
    }

    #[test]
    fn frequencies_order() {
        let c = Column::categorical("c", &[Some("a"), Some("a"), Some("b")]);
        assert_eq!(value_frequencies(&c), vec![("a".into(), 2), ("b".into(), 1)]);
        let tie = Column::categorical("c", &[Some("b"), Some("a"), Some("a"), Some("b")]);
        assert_eq!(value_frequencies(&tie)[0].0, "a");
        let empty = Column::text::<&str>("c", &[None, None]);
        assert!(value_frequencies(&empty).is_empty());
    }

    #[test]
    fn table_rejects_duplicates_and_ragged() {
        let a = Column::int("a", vec![Some(1)]);
        assert!(matches!(
            Table::new(vec![a.clone(), a.clone()]),
            Err(Error::DuplicateColumn(_))
        ));
        let b = Column::int("b", vec![Some(1), Some(2)]);
        assert!(Table::new(vec![a, b]).is_err());
    }

    #[test]
    fn csv_export_format() {
        let t = Table::new(vec![
            Column::bool("b", vec![Some(true), None]),
            Column::float("f", vec![Some(1.5), Some(2.0)]),
        ])
        .unwrap();
        assert_eq!(t.to_csv_string().unwrap(), "b,f\n1,1.5\n,2\n");
    }

    #[test]
    fn literal_matching() {
        assert!(Cell::Int(1).matches_literal("1"));
        assert!(Cell::Float(1.0).matches_literal("1"));
        assert!(Cell::Bool(true).matches_literal("True"));
        assert!(Cell::Str(">50K").matches_literal(">50K"));
        assert!(!Cell::Missing.matches_literal(""));
    }
}
