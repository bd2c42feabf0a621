//! Named dataset-specific processing hooks.
//!
//! Hooks are pure `Table -> Table` functions selected by the manifest's
//! `processing_hook` field. Besides the fixed names, `rename:OLD=NEW,...`
//! renames columns.

use crate::error::{Error, Result};
use crate::frame::{Column, Table};

type HookFn = fn(Table) -> Result<Table>;

const BUILTIN_HOOKS: &[(&str, HookFn)] = &[
    ("identity", identity),
    ("german_credit", german_credit),
    ("bank_marketing", bank_marketing),
];

pub fn hook_ids() -> Vec<&'static str> {
    let mut ids: Vec<&str> = BUILTIN_HOOKS.iter().map(|(id, _)| *id).collect();
    ids.push("rename:<old>=<new>,...");
    ids
}

pub fn apply_processing_hook(hook_id: &str, table: Table) -> Result<Table> {
    if let Some(mapping) = hook_id.strip_prefix("rename:") {
        return rename(mapping, table);
    }
    let hook = BUILTIN_HOOKS
        .iter()
        .find(|(id, _)| *id == hook_id)
        .map(|(_, f)| *f)
        .ok_or_else(|| Error::UnknownHook(hook_id.to_string()))?;
    hook(table).map_err(|e| match e {
        e @ Error::Hook { .. } => e,
        other => Error::Hook {
            hook: hook_id.to_string(),
            message: other.to_string(),
        },
    })
}

fn identity(table: Table) -> Result<Table> {
    Ok(table)
}

fn rename(mapping: &str, table: Table) -> Result<Table> {
    let mut pairs = Vec::new();
    for part in mapping.split(',').filter(|p| !p.is_empty()) {
        let (old, new) = part.split_once('=').ok_or_else(|| Error::Hook {
            hook: format!("rename:{mapping}"),
            message: format!("`{part}` is not OLD=NEW"),
        })?;
        table.column(old)?;
        pairs.push((old.trim().to_string(), new.trim().to_string()));
    }
    let n_rows = table.n_rows();
    let columns = table
        .into_columns()
        .into_iter()
        .map(|c| match pairs.iter().find(|(old, _)| old == c.name()) {
            Some((_, new)) => c.renamed(new.clone()),
            None => c,
        })
        .collect();
    Table::with_rows(columns, n_rows)
}

fn append(table: Table, column: Column) -> Result<Table> {
    let n_rows = table.n_rows();
    let mut columns = table.into_columns();
    columns.retain(|c| c.name() != column.name());
    columns.push(column);
    Table::with_rows(columns, n_rows)
}

fn age_bands(table: &Table, name: &str, band: impl Fn(f64) -> &'static str) -> Result<Column> {
    let ages = table.column("age")?.numeric_values()?;
    let values: Vec<Option<&str>> = ages.iter().map(|a| a.map(&band)).collect();
    Ok(Column::categorical(name, &values))
}

/// Derives `sex` from the coded personal status and a two-band `age_group`.
fn german_credit(table: Table) -> Result<Table> {
    let status = table.column("personal_status")?;
    let sex: Vec<Option<&str>> = (0..table.n_rows())
        .map(|i| {
            status.render(i).map(|code| match code.as_str() {
                "A92" | "A95" => "female",
                _ => "male",
            })
        })
        .collect();
    let sex = Column::categorical("sex", &sex);
    let age_group = age_bands(&table, "age_group", |a| if a <= 25.0 { "<=25" } else { ">25" })?;
    append(append(table, sex)?, age_group)
}

fn bank_marketing(table: Table) -> Result<Table> {
    let age_group = age_bands(&table, "age_group", |a| {
        if a < 25.0 {
            "<25"
        } else if a <= 60.0 {
            "25-60"
        } else {
            ">60"
        }
    })?;
    append(table, age_group)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Table {
        Table::new(vec![
            Column::int("V1", vec![Some(30), Some(22)]),
            Column::categorical("personal_status", &[Some("A92"), Some("A93")]),
            Column::int("age", vec![Some(30), Some(22)]),
        ])
        .unwrap()
    }

    #[test]
    fn identity_is_noop() {
        assert_eq!(apply_processing_hook("identity", table()).unwrap(), table());
    }

    #[test]
    fn rename_changes_only_names() {
        let out = apply_processing_hook("rename:V1=age_years", table()).unwrap();
        assert_eq!(out.column_names(), ["age_years", "personal_status", "age"]);
        assert_eq!(
            out.column("age_years").unwrap().rendered(),
            table().column("V1").unwrap().rendered()
        );
    }

    #[test]
    fn unknown_hook() {
        assert!(matches!(
            apply_processing_hook("nope", table()),
            Err(Error::UnknownHook(_))
        ));
    }

    #[test]
    fn german_credit_derives_columns() {
        let out = apply_processing_hook("german_credit", table()).unwrap();
        assert_eq!(
            out.column("sex").unwrap().rendered(),
            [Some("female".to_string()), Some("male".to_string())]
        );
        assert_eq!(
            out.column("age_group").unwrap().rendered(),
            [Some(">25".to_string()), Some("<=25".to_string())]
        );
    }
}
