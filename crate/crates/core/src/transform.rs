//! Dataset preparation: feature scoping, missing values, target and
//! sensitive-attribute binarization, categorical encoding.
//!
//! Every stage is split into a *fit* step, which inspects the data and
//! records its decisions in a report fragment, and an *apply* step, which
//! only reads the fragment. [`replay_transform`] reruns the apply steps from
//! a (possibly deserialized) [`TransformReport`].

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Stage};
use crate::frame::{column_median, format_float, value_frequencies, Column, DType, Role, Table};
use crate::manifest::{DatasetAnnotation, FeatureSelector, Scenario};

pub const MISSING_PLACEHOLDER: &str = "MISSING";
pub const OTHER_CATEGORY: &str = "OTHER";
pub const MAJORITY: &str = "majority";
pub const MINORITY: &str = "minority";
pub const DEFAULT_MAX_CARDINALITY: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureScope {
    #[default]
    Essential,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingMode {
    DropCols,
    DropRows,
    #[default]
    Impute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetMode {
    Preferable,
    MajorityMinority,
    #[default]
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensitiveMode {
    #[default]
    Separate,
    Intersect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensitiveGrouping {
    #[default]
    AsIs,
    MajorityMinority,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    #[default]
    Onehot,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformConfig {
    pub feature_scope: FeatureScope,
    pub missing: MissingMode,
    pub target_mode: TargetMode,
    pub sensitive_mode: SensitiveMode,
    pub sensitive_grouping: SensitiveGrouping,
    pub encoding: Encoding,
    pub max_cardinality: usize,
    pub binarized_preset: bool,
}

impl Default for TransformConfig {
    fn default() -> Self {
        Self {
            feature_scope: FeatureScope::default(),
            missing: MissingMode::default(),
            target_mode: TargetMode::default(),
            sensitive_mode: SensitiveMode::default(),
            sensitive_grouping: SensitiveGrouping::default(),
            encoding: Encoding::default(),
            max_cardinality: DEFAULT_MAX_CARDINALITY,
            binarized_preset: false,
        }
    }
}

impl TransformConfig {
    /// The binarized numerical representation used for benchmarking.
    pub fn binarized() -> Self {
        Self {
            binarized_preset: true,
            ..Self::default()
        }
        .effective()
    }

    /// Settings after the preset has overridden its four fields.
    pub fn effective(&self) -> Self {
        let mut c = *self;
        if c.binarized_preset {
            c.sensitive_mode = SensitiveMode::Intersect;
            c.sensitive_grouping = SensitiveGrouping::MajorityMinority;
            c.encoding = Encoding::Onehot;
            c.missing = MissingMode::Impute;
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImputedColumn {
    pub column: String,
    pub fill: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MissingReport {
    pub imputed_columns: Vec<ImputedColumn>,
    pub dropped_columns: Vec<String>,
    pub dropped_row_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetReport {
    pub target_column_out: String,
    pub target_value_map: BTreeMap<String, u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SensitiveReport {
    pub sensitive_columns_out: Vec<String>,
    /// `(left, right)` source columns when an intersection was built.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intersection_of: Option<(String, String)>,
    /// Per output sensitive column: original value -> majority/minority.
    pub sensitive_value_map: BTreeMap<String, BTreeMap<String, String>>,
    /// Output columns left with a single group.
    pub degenerate: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryMap {
    /// Indicator levels in output order.
    pub levels: Vec<String>,
    /// Whether values outside `levels` collapse into `OTHER`.
    pub grouped_other: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EncodingReport {
    pub category_maps: BTreeMap<String, CategoryMap>,
}

/// The full record of a pipeline run; enough to replay it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformReport {
    pub config: TransformConfig,
    pub selected_columns: Vec<String>,
    pub roles: BTreeMap<String, Role>,
    pub target_column_in: String,
    pub sensitive_columns_in: Vec<String>,
    pub sensitive_columns_out: Vec<String>,
    pub target_column_out: String,
    pub imputed_columns: Vec<ImputedColumn>,
    pub dropped_columns: Vec<String>,
    pub dropped_row_count: usize,
    pub category_maps: BTreeMap<String, CategoryMap>,
    pub target_value_map: BTreeMap<String, u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intersection_of: Option<(String, String)>,
    pub sensitive_value_map: BTreeMap<String, BTreeMap<String, String>>,
    pub degenerate_sensitive: Vec<String>,
}

impl TransformReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn missing_fragment(&self) -> MissingReport {
        MissingReport {
            imputed_columns: self.imputed_columns.clone(),
            dropped_columns: self.dropped_columns.clone(),
            dropped_row_count: self.dropped_row_count,
        }
    }

    fn sensitive_fragment(&self) -> SensitiveReport {
        SensitiveReport {
            sensitive_columns_out: self.sensitive_columns_out.clone(),
            intersection_of: self.intersection_of.clone(),
            sensitive_value_map: self.sensitive_value_map.clone(),
            degenerate: self.degenerate_sensitive.clone(),
        }
    }
}

fn rebuild(table: &Table, columns: Vec<Column>) -> Result<Table> {
    Table::with_rows(columns, table.n_rows())
}

fn replace_column(table: &Table, name: &str, col: Column) -> Result<Table> {
    let columns = table
        .columns()
        .iter()
        .map(|c| if c.name() == name { col.clone() } else { c.clone() })
        .collect();
    rebuild(table, columns)
}

// ---------------------------------------------------------------------------
// feature scoping

/// Column selection and roles for the scenario. Annotated sensitive
/// attributes outside the scenario are carried with role `Other` and never
/// become features.
fn fit_scope(
    table: &Table,
    annotation: &DatasetAnnotation,
    scenario: &Scenario,
    scope: FeatureScope,
) -> Result<(Vec<String>, BTreeMap<String, Role>)> {
    let target = &annotation.target_column;
    table.column(target)?;
    for s in &scenario.sensitive_selection {
        table.column(s)?;
    }
    let annotated_sensitive: HashSet<&str> = annotation
        .sensitive_attributes
        .iter()
        .map(String::as_str)
        .collect();
    let features: HashSet<&str> = match (&annotation.feature_selector, scope) {
        (_, FeatureScope::All) | (FeatureSelector::AllExceptTarget, _) => {
            table.column_names().into_iter().collect()
        }
        (FeatureSelector::Include(cols), FeatureScope::Essential) => {
            for c in cols {
                table.column(c)?;
            }
            cols.iter().map(String::as_str).collect()
        }
        (FeatureSelector::Exclude(cols), FeatureScope::Essential) => {
            let excluded: HashSet<&str> = cols.iter().map(String::as_str).collect();
            table
                .column_names()
                .into_iter()
                .filter(|c| !excluded.contains(c))
                .collect()
        }
    };
    let mut selected = Vec::new();
    let mut roles = BTreeMap::new();
    for name in table.column_names() {
        let role = if name == target {
            Role::Target
        } else if scenario.sensitive_selection.iter().any(|s| s == name) {
            Role::Sensitive
        } else if annotated_sensitive.contains(name) {
            Role::Other
        } else if features.contains(name) {
            Role::Feature
        } else {
            continue;
        };
        selected.push(name.to_string());
        roles.insert(name.to_string(), role);
    }
    Ok((selected, roles))
}

fn apply_scope(table: &Table, selected: &[String], roles: &BTreeMap<String, Role>) -> Result<Table> {
    let mut columns = Vec::with_capacity(selected.len());
    for name in selected {
        let role = *roles
            .get(name)
            .ok_or_else(|| Error::Replay(format!("no role recorded for `{name}`")))?;
        columns.push(table.column(name)?.clone().with_role(role));
    }
    rebuild(table, columns)
}

// ---------------------------------------------------------------------------
// missing values

/// Drops columns, drops rows or imputes (median for numeric columns,
/// `MISSING` for everything else). The result has no missing cells.
pub fn handle_missing(table: &Table, mode: MissingMode) -> Result<(Table, MissingReport)> {
    let report = fit_missing(table, mode)?;
    let out = apply_missing(table, mode, &report)?;
    Ok((out, report))
}

fn fit_missing(table: &Table, mode: MissingMode) -> Result<MissingReport> {
    let mut report = MissingReport::default();
    match mode {
        MissingMode::DropCols => {
            report.dropped_columns = table
                .columns()
                .iter()
                .filter(|c| c.n_missing() > 0)
                .map(|c| c.name().to_string())
                .collect();
        }
        MissingMode::DropRows => {
            report.dropped_row_count = table.rows_with_missing().iter().filter(|m| **m).count();
            if report.dropped_row_count == table.n_rows() && table.n_rows() > 0 {
                return Err(Error::EmptyAfterDrop);
            }
        }
        MissingMode::Impute => {
            for c in table.columns().iter().filter(|c| c.n_missing() > 0) {
                let fill = if c.dtype().is_numeric() {
                    format_float(column_median(c)?)
                } else {
                    MISSING_PLACEHOLDER.to_string()
                };
                report.imputed_columns.push(ImputedColumn {
                    column: c.name().to_string(),
                    fill,
                });
            }
        }
    }
    Ok(report)
}

fn apply_missing(table: &Table, mode: MissingMode, report: &MissingReport) -> Result<Table> {
    match mode {
        MissingMode::DropCols => {
            let drop: HashSet<&str> = report.dropped_columns.iter().map(String::as_str).collect();
            let columns = table
                .columns()
                .iter()
                .filter(|c| !drop.contains(c.name()))
                .cloned()
                .collect();
            rebuild(table, columns)
        }
        MissingMode::DropRows => {
            let keep: Vec<usize> = table
                .rows_with_missing()
                .iter()
                .enumerate()
                .filter(|(_, m)| !**m)
                .map(|(i, _)| i)
                .collect();
            if keep.is_empty() && table.n_rows() > 0 {
                return Err(Error::EmptyAfterDrop);
            }
            Ok(table.take_rows(&keep))
        }
        MissingMode::Impute => {
            let mut columns = Vec::with_capacity(table.n_cols());
            for c in table.columns() {
                let fill = report.imputed_columns.iter().find(|i| i.column == c.name());
                columns.push(match fill {
                    Some(f) => impute_column(c, &f.fill)?,
                    None if c.n_missing() > 0 => {
                        return Err(Error::Replay(format!(
                            "no fill value recorded for `{}`",
                            c.name()
                        )))
                    }
                    None => c.clone(),
                });
            }
            rebuild(table, columns)
        }
    }
}

fn impute_column(c: &Column, fill: &str) -> Result<Column> {
    let role = c.role();
    let name = c.name();
    let col = match c.dtype() {
        DType::Float | DType::Int => {
            let v: f64 = fill
                .parse()
                .map_err(|_| Error::Replay(format!("bad numeric fill `{fill}` for `{name}`")))?;
            if c.dtype() == DType::Int && v.fract() == 0.0 {
                let values = (0..c.len())
                    .map(|i| match c.cell(i) {
                        crate::frame::Cell::Int(x) => Some(x),
                        _ => Some(v as i64),
                    })
                    .collect();
                Column::int(name, values)
            } else {
                let values = c
                    .numeric_values()?
                    .into_iter()
                    .map(|x| Some(x.unwrap_or(v)))
                    .collect();
                Column::float(name, values)
            }
        }
        DType::Bool | DType::Categorical => {
            let values: Vec<Option<String>> = c
                .rendered()
                .into_iter()
                .map(|v| Some(v.unwrap_or_else(|| fill.to_string())))
                .collect();
            Column::categorical(name, &values)
        }
        DType::Text => {
            let values: Vec<Option<String>> = c
                .rendered()
                .into_iter()
                .map(|v| Some(v.unwrap_or_else(|| fill.to_string())))
                .collect();
            Column::text(name, &values)
        }
    };
    Ok(col.with_role(role))
}

// ---------------------------------------------------------------------------
// target

/// Recodes the target column as a bool column.
pub fn binarize_target(
    table: &Table,
    annotation: &DatasetAnnotation,
    mode: TargetMode,
) -> Result<(Table, TargetReport)> {
    let report = fit_target(table, annotation, mode)?;
    let out = apply_target(table, &annotation.target_column, &report)?;
    Ok((out, report))
}

fn fit_target(table: &Table, annotation: &DatasetAnnotation, mode: TargetMode) -> Result<TargetReport> {
    let name = &annotation.target_column;
    let col = table.column(name)?;
    let freqs = value_frequencies(col);
    if freqs.len() < 2 {
        return Err(Error::DegenerateTarget(name.clone()));
    }
    let mut map = BTreeMap::new();
    if col.dtype() == DType::Bool {
        // already binary: keep it so that a second pass is a no-op
        for (v, _) in &freqs {
            map.insert(v.clone(), u8::from(v == "1"));
        }
        return Ok(TargetReport {
            target_column_out: name.clone(),
            target_value_map: map,
        });
    }
    let good = annotation.target_lvl_good.as_deref();
    let mode = match mode {
        TargetMode::Auto if good.is_some() => TargetMode::Preferable,
        TargetMode::Auto => TargetMode::MajorityMinority,
        m => m,
    };
    match mode {
        TargetMode::Preferable => {
            let good = good.ok_or_else(|| Error::MissingGoodLevel(name.clone()))?;
            for row in 0..col.len() {
                let Some(v) = col.render(row) else { continue };
                map.insert(v, u8::from(col.cell(row).matches_literal(good)));
            }
        }
        TargetMode::MajorityMinority => {
            let modal = &freqs[0].0;
            for (v, _) in &freqs {
                map.insert(v.clone(), u8::from(v == modal));
            }
        }
        TargetMode::Auto => unreachable!(),
    }
    Ok(TargetReport {
        target_column_out: name.clone(),
        target_value_map: map,
    })
}

fn apply_target(table: &Table, target_in: &str, report: &TargetReport) -> Result<Table> {
    let col = table.column(target_in)?;
    let mut values = Vec::with_capacity(col.len());
    for row in 0..col.len() {
        values.push(match col.render(row) {
            None => None,
            Some(v) => Some(
                *report
                    .target_value_map
                    .get(&v)
                    .ok_or_else(|| Error::Replay(format!("target value `{v}` has no mapping")))?
                    == 1,
            ),
        });
    }
    let out = Column::bool(&report.target_column_out, values).with_role(Role::Target);
    replace_column(table, target_in, out)
}

// ---------------------------------------------------------------------------
// sensitive attributes

/// Optionally intersects two sensitive attributes into one `a×b` column
/// (sources kept with role `Other`) and optionally groups values into
/// majority (the modal value) and minority.
pub fn binarize_sensitive(
    table: &Table,
    scenario: &Scenario,
    mode: SensitiveMode,
    grouping: SensitiveGrouping,
) -> Result<(Table, SensitiveReport)> {
    let report = fit_sensitive(table, &scenario.sensitive_selection, mode, grouping)?;
    let out = apply_sensitive(table, &scenario.sensitive_selection, &report)?;
    Ok((out, report))
}

fn intersection_name(a: &str, b: &str) -> String {
    format!("{a}×{b}")
}

fn intersect_columns(table: &Table, a: &str, b: &str) -> Result<(Table, String)> {
    let ca = table.column(a)?;
    let cb = table.column(b)?;
    let values: Vec<Option<String>> = (0..table.n_rows())
        .map(|i| match (ca.render(i), cb.render(i)) {
            (Some(x), Some(y)) => Some(format!("{x}×{y}")),
            _ => None,
        })
        .collect();
    let name = intersection_name(a, b);
    let mut columns: Vec<Column> = table
        .columns()
        .iter()
        .map(|c| {
            if c.name() == a || c.name() == b {
                c.clone().with_role(Role::Other)
            } else {
                c.clone()
            }
        })
        .collect();
    columns.push(Column::categorical(&name, &values).with_role(Role::Sensitive));
    Ok((rebuild(table, columns)?, name))
}

fn fit_sensitive(
    table: &Table,
    selection: &[String],
    mode: SensitiveMode,
    grouping: SensitiveGrouping,
) -> Result<SensitiveReport> {
    for s in selection {
        table.column(s)?;
    }
    let mut report = SensitiveReport::default();
    let (work, outputs) = if mode == SensitiveMode::Intersect && selection.len() == 2 {
        let (t, name) = intersect_columns(table, &selection[0], &selection[1])?;
        report.intersection_of = Some((selection[0].clone(), selection[1].clone()));
        (t, vec![name])
    } else {
        (table.clone(), selection.to_vec())
    };
    for name in &outputs {
        let freqs = value_frequencies(work.column(name)?);
        if freqs.len() < 2 {
            report.degenerate.push(name.clone());
        }
        if grouping == SensitiveGrouping::MajorityMinority {
            let modal = freqs.first().map(|(v, _)| v.clone());
            // labels from an earlier pass map to themselves
            let grouped = freqs.iter().all(|(v, _)| v == MAJORITY || v == MINORITY);
            let map = freqs
                .iter()
                .map(|(v, _)| {
                    let g = if grouped {
                        v.as_str()
                    } else if Some(v) == modal.as_ref() {
                        MAJORITY
                    } else {
                        MINORITY
                    };
                    (v.clone(), g.to_string())
                })
                .collect();
            report.sensitive_value_map.insert(name.clone(), map);
        }
    }
    report.sensitive_columns_out = outputs;
    Ok(report)
}

fn apply_sensitive(table: &Table, selection: &[String], report: &SensitiveReport) -> Result<Table> {
    let mut work = match &report.intersection_of {
        Some((a, b)) => intersect_columns(table, a, b)?.0,
        None => {
            for s in selection {
                table.column(s)?;
            }
            table.clone()
        }
    };
    for (name, map) in &report.sensitive_value_map {
        let col = work.column(name)?;
        let mut values = Vec::with_capacity(col.len());
        for row in 0..col.len() {
            values.push(match col.render(row) {
                None => None,
                Some(v) => Some(
                    map.get(&v)
                        .ok_or_else(|| {
                            Error::Replay(format!("sensitive value `{v}` of `{name}` has no group"))
                        })?
                        .clone(),
                ),
            });
        }
        let grouped = Column::categorical(name, &values).with_role(Role::Sensitive);
        work = replace_column(&work, name, grouped)?;
    }
    Ok(work)
}

// ---------------------------------------------------------------------------
// categorical encoding

/// Caps every categorical/text feature at `max_cardinality` distinct values
/// (rarer values become `OTHER`) and expands it into `<col>=<value>` bool
/// indicators. Sensitive and target columns are left alone.
pub fn encode_categoricals(table: &Table, max_cardinality: usize) -> Result<(Table, EncodingReport)> {
    let report = fit_encoding(table, max_cardinality);
    let out = apply_encoding(table, &report)?;
    Ok((out, report))
}

fn encodable(c: &Column) -> bool {
    c.dtype().is_stringly() && matches!(c.role(), Role::Feature | Role::Other)
}

fn fit_encoding(table: &Table, max_cardinality: usize) -> EncodingReport {
    let cap = max_cardinality.max(1);
    let mut report = EncodingReport::default();
    for c in table.columns().iter().filter(|c| encodable(c)) {
        let freqs = value_frequencies(c);
        let grouped_other = freqs.len() > cap;
        let mut levels: BTreeSet<String> = if grouped_other {
            freqs.iter().take(cap - 1).map(|(v, _)| v.clone()).collect()
        } else {
            freqs.iter().map(|(v, _)| v.clone()).collect()
        };
        if grouped_other {
            levels.insert(OTHER_CATEGORY.to_string());
        }
        report.category_maps.insert(
            c.name().to_string(),
            CategoryMap {
                levels: levels.into_iter().collect(),
                grouped_other,
            },
        );
    }
    report
}

fn apply_encoding(table: &Table, report: &EncodingReport) -> Result<Table> {
    let mut columns = Vec::new();
    for c in table.columns() {
        let Some(map) = report.category_maps.get(c.name()) else {
            columns.push(c.clone());
            continue;
        };
        let level_set: HashSet<&str> = map.levels.iter().map(String::as_str).collect();
        let mut mapped = Vec::with_capacity(c.len());
        for row in 0..c.len() {
            mapped.push(match c.render(row) {
                None => None,
                Some(v) if level_set.contains(v.as_str()) => Some(v),
                Some(_) if map.grouped_other => Some(OTHER_CATEGORY.to_string()),
                Some(v) => {
                    return Err(Error::Replay(format!(
                        "value `{v}` of `{}` is not a recorded level",
                        c.name()
                    )))
                }
            });
        }
        for level in &map.levels {
            let values = mapped
                .iter()
                .map(|m| m.as_ref().map(|v| v == level))
                .collect();
            columns.push(Column::bool(format!("{}={}", c.name(), level), values).with_role(c.role()));
        }
    }
    rebuild(table, columns)
}

// ---------------------------------------------------------------------------
// pipeline

/// Runs scoping, missing handling, target binarization, sensitive
/// combination/grouping and encoding, in that order.
pub fn transform_pipeline(
    table: &Table,
    annotation: &DatasetAnnotation,
    scenario: &Scenario,
    config: &TransformConfig,
) -> Result<(Table, TransformReport)> {
    let config = config.effective();
    if scenario.dataset_id != annotation.dataset_id {
        return Err(Error::InvalidScenario(format!(
            "scenario `{}` does not belong to `{}`",
            scenario.scenario_id, annotation.dataset_id
        ))
        .at(Stage::FeatureScope));
    }

    let (selected, roles) = fit_scope(table, annotation, scenario, config.feature_scope)
        .map_err(|e| e.at(Stage::FeatureScope))?;
    let t = apply_scope(table, &selected, &roles).map_err(|e| e.at(Stage::FeatureScope))?;

    let (t, missing) = handle_missing(&t, config.missing).map_err(|e| e.at(Stage::Missing))?;

    let (t, target) =
        binarize_target(&t, annotation, config.target_mode).map_err(|e| e.at(Stage::Target))?;

    let (t, sensitive) = binarize_sensitive(
        &t,
        scenario,
        config.sensitive_mode,
        config.sensitive_grouping,
    )
    .map_err(|e| e.at(Stage::Sensitive))?;

    let (t, encoding) = match config.encoding {
        Encoding::Onehot => {
            encode_categoricals(&t, config.max_cardinality).map_err(|e| e.at(Stage::Encoding))?
        }
        Encoding::None => (t, EncodingReport::default()),
    };

    let report = TransformReport {
        config,
        selected_columns: selected,
        roles,
        target_column_in: annotation.target_column.clone(),
        sensitive_columns_in: scenario.sensitive_selection.clone(),
        sensitive_columns_out: sensitive.sensitive_columns_out.clone(),
        target_column_out: target.target_column_out,
        imputed_columns: missing.imputed_columns,
        dropped_columns: missing.dropped_columns,
        dropped_row_count: missing.dropped_row_count,
        category_maps: encoding.category_maps,
        target_value_map: target.target_value_map,
        intersection_of: sensitive.intersection_of,
        sensitive_value_map: sensitive.sensitive_value_map,
        degenerate_sensitive: sensitive.degenerate,
    };
    Ok((t, report))
}

/// Re-applies a recorded transform to a table without refitting anything.
pub fn replay_transform(table: &Table, report: &TransformReport) -> Result<Table> {
    let config = report.config;
    let t = apply_scope(table, &report.selected_columns, &report.roles)
        .map_err(|e| e.at(Stage::FeatureScope))?;
    let t = apply_missing(&t, config.missing, &report.missing_fragment())
        .map_err(|e| e.at(Stage::Missing))?;
    let target = TargetReport {
        target_column_out: report.target_column_out.clone(),
        target_value_map: report.target_value_map.clone(),
    };
    let t = apply_target(&t, &report.target_column_in, &target).map_err(|e| e.at(Stage::Target))?;
    let t = apply_sensitive(&t, &report.sensitive_columns_in, &report.sensitive_fragment())
        .map_err(|e| e.at(Stage::Sensitive))?;
    let t = apply_encoding(
        &t,
        &EncodingReport {
            category_maps: report.category_maps.clone(),
        },
    )
    .map_err(|e| e.at(Stage::Encoding))?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Cell;
    use crate::manifest::tests::annotation;

    fn scenario(attrs: &[&str]) -> Scenario {
        Scenario::new("d", attrs.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    #[test]
    fn missing_identity_on_complete_table() {
        let t = Table::new(vec![Column::int("a", vec![Some(1), Some(2)])]).unwrap();
        for mode in [MissingMode::DropCols, MissingMode::DropRows, MissingMode::Impute] {
            assert_eq!(handle_missing(&t, mode).unwrap().0, t);
        }
    }

    #[test]
    fn impute_uses_median() {
        let t = Table::new(vec![Column::int("a", vec![Some(1), None, Some(4), Some(2)])]).unwrap();
        let (out, rep) = handle_missing(&t, MissingMode::Impute).unwrap();
        assert_eq!(
            out.column("a").unwrap().rendered(),
            ["1", "2", "4", "2"].map(|s| Some(s.to_string()))
        );
        assert_eq!(rep.imputed_columns[0].fill, "2");
    }

    #[test]
    fn impute_placeholder_for_categoricals_and_bools() {
        let t = Table::new(vec![
            Column::categorical("c", &[Some("x"), None]),
            Column::bool("b", vec![None, Some(true)]),
        ])
        .unwrap();
        let (out, _) = handle_missing(&t, MissingMode::Impute).unwrap();
        assert_eq!(out.n_missing_cells(), 0);
        assert_eq!(out.column("c").unwrap().render(1).unwrap(), MISSING_PLACEHOLDER);
        assert_eq!(out.column("b").unwrap().render(0).unwrap(), MISSING_PLACEHOLDER);
    }

    #[test]
    fn drop_rows_and_cols() {
        let t = Table::new(vec![
            Column::int("a", vec![Some(1), None, Some(3)]),
            Column::int("b", vec![Some(1), Some(2), Some(3)]),
        ])
        .unwrap();
        let (rows, rep) = handle_missing(&t, MissingMode::DropRows).unwrap();
        assert_eq!(rows.n_rows(), 2);
        assert_eq!(rep.dropped_row_count, 1);
        let (cols, rep) = handle_missing(&t, MissingMode::DropCols).unwrap();
        assert_eq!(cols.column_names(), ["b"]);
        assert_eq!(rep.dropped_columns, ["a"]);
    }

    #[test]
    fn drop_rows_to_empty_is_error() {
        let t = Table::new(vec![Column::int("a", vec![None, None])]).unwrap();
        assert!(matches!(
            handle_missing(&t, MissingMode::DropRows),
            Err(Error::EmptyAfterDrop)
        ));
    }

    #[test]
    fn impute_all_missing_numeric_is_error() {
        let t = Table::new(vec![Column::float("a", vec![None, None])]).unwrap();
        assert!(handle_missing(&t, MissingMode::Impute).is_err());
    }

    fn target_table(values: &[&str]) -> Table {
        let v: Vec<Option<&str>> = values.iter().map(|s| Some(*s)).collect();
        Table::new(vec![Column::categorical("y", &v)]).unwrap()
    }

    #[test]
    fn target_preferable() {
        let t = target_table(&["good", "bad", "good"]);
        let mut a = annotation("d", &["s"]);
        a.target_lvl_good = Some("good".into());
        a.target_lvl_bad = Some("bad".into());
        let (out, rep) = binarize_target(&t, &a, TargetMode::Preferable).unwrap();
        assert_eq!(out.column("y").unwrap().dtype(), DType::Bool);
        assert_eq!(rep.target_value_map["good"], 1);
        assert_eq!(rep.target_value_map["bad"], 0);
    }

    #[test]
    fn target_majority_minority() {
        let mut values = vec!["a"; 60];
        values.extend(vec!["b"; 30]);
        values.extend(vec!["c"; 10]);
        let (_, rep) =
            binarize_target(&target_table(&values), &annotation("d", &["s"]), TargetMode::MajorityMinority)
                .unwrap();
        assert_eq!(rep.target_value_map["a"], 1);
        assert_eq!(rep.target_value_map["b"], 0);
        assert_eq!(rep.target_value_map["c"], 0);
    }

    #[test]
    fn target_binary_unchanged() {
        let t = Table::new(vec![Column::bool("y", vec![Some(true), Some(false)])]).unwrap();
        let a = annotation("d", &["s"]);
        let (out, _) = binarize_target(&t, &a, TargetMode::Auto).unwrap();
        assert_eq!(out.column("y").unwrap().rendered(), t.column("y").unwrap().rendered());
    }

    #[test]
    fn target_errors() {
        let mut a = annotation("d", &["s"]);
        a.target_lvl_good = None;
        assert!(matches!(
            binarize_target(&target_table(&["x", "y"]), &a, TargetMode::Preferable),
            Err(Error::MissingGoodLevel(_))
        ));
        assert!(matches!(
            binarize_target(&target_table(&["x", "x"]), &a, TargetMode::Auto),
            Err(Error::DegenerateTarget(_))
        ));
    }

    #[test]
    fn sensitive_grouping_modal() {
        let mut v = vec![Some("M"); 70];
        v.extend(vec![Some("F"); 30]);
        let t = Table::new(vec![Column::categorical("sex", &v).with_role(Role::Sensitive)]).unwrap();
        let (out, rep) = binarize_sensitive(
            &t,
            &scenario(&["sex"]),
            SensitiveMode::Separate,
            SensitiveGrouping::MajorityMinority,
        )
        .unwrap();
        assert_eq!(rep.sensitive_value_map["sex"]["M"], MAJORITY);
        assert_eq!(rep.sensitive_value_map["sex"]["F"], MINORITY);
        assert_eq!(out.column("sex").unwrap().render(99).unwrap(), MINORITY);
    }

    #[test]
    fn sensitive_single_group_is_degenerate() {
        let t = Table::new(vec![Column::categorical("sex", &[Some("M"), Some("M")])]).unwrap();
        let (out, rep) = binarize_sensitive(
            &t,
            &scenario(&["sex"]),
            SensitiveMode::Separate,
            SensitiveGrouping::MajorityMinority,
        )
        .unwrap();
        assert_eq!(rep.degenerate, ["sex"]);
        assert!(out
            .column("sex")
            .unwrap()
            .rendered()
            .iter()
            .all(|v| v.as_deref() == Some(MAJORITY)));
    }

    #[test]
    fn sensitive_intersection_values() {
        let t = Table::new(vec![
            Column::categorical("sex", &[Some("M"), Some("F"), Some("M")]),
            Column::categorical("race", &[Some("White"), Some("Black"), Some("Black")]),
        ])
        .unwrap();
        let (out, rep) = binarize_sensitive(
            &t,
            &scenario(&["sex", "race"]),
            SensitiveMode::Intersect,
            SensitiveGrouping::AsIs,
        )
        .unwrap();
        let name = &rep.sensitive_columns_out[0];
        assert_eq!(name, "sex×race");
        assert_eq!(
            out.column(name).unwrap().rendered(),
            ["M×White", "F×Black", "M×Black"].map(|s| Some(s.to_string()))
        );
        assert_eq!(out.column("sex").unwrap().role(), Role::Other);
        assert_eq!(out.column(name).unwrap().role(), Role::Sensitive);
    }

    #[test]
    fn onehot_indicators() {
        let t = Table::new(vec![Column::categorical("col", &[Some("a"), Some("b"), Some("a")])]).unwrap();
        let (out, _) = encode_categoricals(&t, 200).unwrap();
        assert_eq!(out.column_names(), ["col=a", "col=b"]);
        assert_eq!(out.column("col=a").unwrap().cell(0), Cell::Bool(true));
        assert_eq!(
            out.column("col=b").unwrap().rendered(),
            ["0", "1", "0"].map(|s| Some(s.to_string()))
        );
    }

    fn uniques(n: usize) -> Table {
        let v: Vec<Option<String>> = (0..n).map(|i| Some(format!("v{i:03}"))).collect();
        Table::new(vec![Column::text("t", &v)]).unwrap()
    }

    #[test]
    fn cap_below_limit() {
        let (out, rep) = encode_categoricals(&uniques(150), 200).unwrap();
        assert!(!rep.category_maps["t"].grouped_other);
        assert_eq!(out.n_cols(), 150);
    }

    #[test]
    fn cap_above_limit() {
        let (out, rep) = encode_categoricals(&uniques(300), 200).unwrap();
        let map = &rep.category_maps["t"];
        assert!(map.grouped_other);
        assert_eq!(map.levels.len(), 200);
        assert!(map.levels.contains(&OTHER_CATEGORY.to_string()));
        assert_eq!(out.n_cols(), 200);
    }

    #[test]
    fn sensitive_and_target_not_expanded() {
        let t = Table::new(vec![
            Column::categorical("s", &[Some("a"), Some("b")]).with_role(Role::Sensitive),
            Column::categorical("y", &[Some("a"), Some("b")]).with_role(Role::Target),
        ])
        .unwrap();
        let (out, _) = encode_categoricals(&t, 200).unwrap();
        assert_eq!(out, t);
    }

    fn mixed_fixture() -> (Table, DatasetAnnotation) {
        let t = Table::new(vec![
            Column::float("x", vec![Some(1.0), None, Some(3.0), Some(4.0)]),
            Column::categorical("cat", &[Some("p"), Some("q"), None, Some("p")]),
            Column::categorical("sex", &[Some("M"), Some("F"), Some("M"), Some("M")]),
            Column::categorical("race", &[Some("W"), Some("B"), Some("B"), None]),
            Column::categorical("y", &[Some("good"), Some("bad"), Some("bad"), Some("good")]),
            Column::int("unused", vec![Some(1), Some(2), Some(3), Some(4)]),
        ])
        .unwrap();
        let mut a = annotation("d", &["sex", "race"]);
        a.target_lvl_good = Some("good".into());
        a.target_lvl_bad = Some("bad".into());
        a.feature_selector = FeatureSelector::Include(vec!["x".into(), "cat".into()]);
        (t, a)
    }

    #[test]
    fn preset_postconditions() {
        let (t, a) = mixed_fixture();
        let (out, rep) =
            transform_pipeline(&t, &a, &scenario(&["sex", "race"]), &TransformConfig::binarized()).unwrap();
        assert_eq!(out.n_missing_cells(), 0);
        assert_eq!(out.column("y").unwrap().dtype(), DType::Bool);
        let sens: Vec<&Column> = out.columns_with_role(Role::Sensitive).collect();
        assert_eq!(sens.len(), 1);
        assert!(value_frequencies(sens[0]).len() <= 2);
        for c in out.columns().iter().filter(|c| c.role() != Role::Sensitive) {
            assert!(matches!(c.dtype(), DType::Bool | DType::Float | DType::Int), "{}", c.name());
        }
        assert!(!out.has_column("unused"));
        assert_eq!(rep.sensitive_columns_out, ["sex×race"]);
    }

    #[test]
    fn identity_configuration() {
        let t = Table::new(vec![
            Column::float("x", vec![Some(1.0), Some(2.0)]),
            Column::categorical("sex", &[Some("M"), Some("F")]),
            Column::bool("y", vec![Some(true), Some(false)]),
        ])
        .unwrap();
        let a = annotation("d", &["sex"]);
        let cfg = TransformConfig {
            feature_scope: FeatureScope::All,
            missing: MissingMode::DropRows,
            sensitive_grouping: SensitiveGrouping::AsIs,
            encoding: Encoding::None,
            ..TransformConfig::default()
        };
        let (out, _) = transform_pipeline(&t, &a, &scenario(&["sex"]), &cfg).unwrap();
        assert_eq!(out.n_rows(), t.n_rows());
        for (a, b) in out.columns().iter().zip(t.columns()) {
            assert_eq!(a.name(), b.name());
            assert_eq!(a.data(), b.data());
        }
    }

    #[test]
    fn essential_scope_containment() {
        let (t, a) = mixed_fixture();
        let cfg = TransformConfig {
            encoding: Encoding::None,
            ..TransformConfig::default()
        };
        let (out, _) = transform_pipeline(&t, &a, &scenario(&["sex"]), &cfg).unwrap();
        let allowed = ["x", "cat", "sex", "race", "y"];
        assert!(out.column_names().iter().all(|c| allowed.contains(c)));
        assert_eq!(out.column("race").unwrap().role(), Role::Other);
    }

    #[test]
    fn replay_reproduces_output() {
        let (t, a) = mixed_fixture();
        let (out, rep) =
            transform_pipeline(&t, &a, &scenario(&["sex", "race"]), &TransformConfig::binarized()).unwrap();
        let rep2 = TransformReport::from_json(&rep.to_json().unwrap()).unwrap();
        let again = replay_transform(&t, &rep2).unwrap();
        assert_eq!(out.to_csv_string().unwrap(), again.to_csv_string().unwrap());
    }

    #[test]
    fn stage_errors_are_tagged() {
        let (t, mut a) = mixed_fixture();
        a.target_lvl_good = None;
        let cfg = TransformConfig {
            target_mode: TargetMode::Preferable,
            ..TransformConfig::default()
        };
        match transform_pipeline(&t, &a, &scenario(&["sex"]), &cfg) {
            Err(Error::Transform { stage, .. }) => assert_eq!(stage, Stage::Target),
            other => panic!("unexpected {other:?}"),
        }
    }
}
