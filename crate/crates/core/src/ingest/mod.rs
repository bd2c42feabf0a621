//! Dataset acquisition and parsing.

mod fetch;
mod hooks;
mod parse;

pub use fetch::{extract_member, fetch, Cache, RawArtifact, CACHE_ENV};
pub use hooks::{apply_processing_hook, hook_ids};
pub use parse::{parse_bytes, parse_table, ParserConfig, DEFAULT_NA_TOKENS};

use crate::error::Result;
use crate::frame::Table;
use crate::manifest::DatasetAnnotation;

/// Fetch, parse and run the annotation's processing hook: the prepared,
/// untransformed table.
pub fn load_table(annotation: &DatasetAnnotation, cache: &Cache) -> Result<Table> {
    let artifact = fetch(annotation, cache)?;
    let table = parse_table(&artifact, &ParserConfig::from_annotation(annotation))?;
    match &annotation.processing_hook {
        Some(hook) => apply_processing_hook(hook, table),
        None => Ok(table),
    }
}
