//! Corpus registry: dataset annotations, manifest parsing and scenario
//! enumeration.
//!
//! A manifest is a JSON document
//! `{"schema_version": "...", "datasets": [ ... ]}` where every dataset
//! object carries the annotation fields of [`DatasetAnnotation`] under
//! their snake_case names. Unknown keys are rejected in
//! [`ParseMode::Strict`] and kept verbatim in [`ParseMode::Lenient`].

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: &str = "1.0";

const BUILTIN_MANIFEST: &str = include_str!("../fixtures/corpus.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    #[default]
    Strict,
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Accessibility {
    Public,
    Manual,
    Restricted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FileFormat {
    Delimited,
    FixedWidth,
}

/// Which columns are model features.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSelector {
    /// Exactly these columns.
    Include(Vec<String>),
    /// Every column except these (and the target).
    Exclude(Vec<String>),
    /// Every column except the target.
    AllExceptTarget,
}

/// Source countries as ISO3 codes, or not applicable (synthetic data).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Countries {
    NotApplicable,
    Codes(Vec<String>),
}

impl Countries {
    pub fn codes(&self) -> &[String] {
        match self {
            Countries::NotApplicable => &[],
            Countries::Codes(c) => c,
        }
    }
}

impl Serialize for Countries {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Countries::NotApplicable => s.serialize_str("n/a"),
            Countries::Codes(c) => c.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Countries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            List(Vec<String>),
        }
        match Raw::deserialize(d)? {
            Raw::Text(t) if t == "n/a" => Ok(Countries::NotApplicable),
            Raw::Text(t) => Ok(Countries::Codes(vec![t])),
            Raw::List(l) if l.len() == 1 && l[0] == "n/a" => Ok(Countries::NotApplicable),
            Raw::List(l) => Ok(Countries::Codes(l)),
        }
    }
}

/// Accepts a string, number or boolean literal and keeps its text form.
fn de_literal<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<String>, D::Error> {
    let v = Option::<Value>::deserialize(d)?;
    match v {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(Value::Number(n)) => Ok(Some(n.to_string())),
        Some(Value::Bool(b)) => Ok(Some(b.to_string())),
        Some(other) => Err(serde::de::Error::custom(format!(
            "expected a scalar level literal, found {other}"
        ))),
    }
}

/// One corpus entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetAnnotation {
    pub dataset_id: String,
    pub dataset_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_dataset_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub download_url: Option<String>,
    pub is_accessible: Accessibility,
    pub format: FileFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delimiter: Option<char>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colnames: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_widths: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub na_tokens: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub archive_member: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub processing_hook: Option<String>,
    pub sensitive_attributes: Vec<String>,
    pub sensitive_categories: BTreeMap<String, Vec<String>>,
    pub feature_selector: FeatureSelector,
    pub target_column: String,
    #[serde(default, deserialize_with = "de_literal", skip_serializing_if = "Option::is_none")]
    pub target_lvl_good: Option<String>,
    #[serde(default, deserialize_with = "de_literal", skip_serializing_if = "Option::is_none")]
    pub target_lvl_bad: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub license: Option<String>,
    pub license_permissive: bool,
    pub country: Countries,
    pub domain: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_size_hint: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description_public: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes_public: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affiliation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub years_data: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub citation: Option<String>,
    /// Unrecognised keys kept under lenient parsing.
    #[serde(flatten, default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, Value>,
}

const KNOWN_KEYS: &[&str] = &[
    "dataset_id",
    "dataset_name",
    "base_dataset_name",
    "variant_id",
    "download_url",
    "is_accessible",
    "format",
    "delimiter",
    "colnames",
    "field_widths",
    "na_tokens",
    "archive_member",
    "sha256",
    "processing_hook",
    "sensitive_attributes",
    "sensitive_categories",
    "feature_selector",
    "target_column",
    "target_lvl_good",
    "target_lvl_bad",
    "license",
    "license_permissive",
    "country",
    "domain",
    "sample_size_hint",
    "description_public",
    "notes_public",
    "affiliation",
    "years_data",
    "citation",
];

impl DatasetAnnotation {
    /// Checks the per-annotation invariants.
    pub fn validate(&self) -> Result<()> {
        let id = self.dataset_id.as_str();
        if id.trim().is_empty() {
            return Err(Error::schema(id, "dataset_id", "must not be empty"));
        }
        if id.contains("::") {
            return Err(Error::schema(id, "dataset_id", "must not contain `::`"));
        }
        if let (Some(good), Some(bad)) = (&self.target_lvl_good, &self.target_lvl_bad) {
            if good == bad {
                return Err(Error::schema(
                    id,
                    "target_lvl_bad",
                    format!("equals target_lvl_good (`{good}`)"),
                ));
            }
        }
        let mut seen = HashSet::new();
        for attr in &self.sensitive_attributes {
            if !seen.insert(attr) {
                return Err(Error::schema(
                    id,
                    "sensitive_attributes",
                    format!("`{attr}` listed twice"),
                ));
            }
            if !self.sensitive_categories.contains_key(attr) {
                return Err(Error::schema(
                    id,
                    "sensitive_categories",
                    format!("missing entry for sensitive attribute `{attr}`"),
                ));
            }
            if attr.contains('+') {
                return Err(Error::schema(
                    id,
                    "sensitive_attributes",
                    format!("`{attr}` must not contain `+`"),
                ));
            }
        }
        if let FeatureSelector::Include(cols) = &self.feature_selector {
            if cols.contains(&self.target_column) {
                return Err(Error::schema(
                    id,
                    "feature_selector",
                    "positive selection includes the target column",
                ));
            }
        }
        if self.target_column.is_empty() {
            return Err(Error::schema(id, "target_column", "must not be empty"));
        }
        if let Some(d) = self.delimiter {
            if !d.is_ascii() {
                return Err(Error::schema(id, "delimiter", "must be an ASCII character"));
            }
        }
        if self.format == FileFormat::FixedWidth {
            let widths = self
                .field_widths
                .as_ref()
                .ok_or_else(|| Error::schema(id, "field_widths", "required for fixed_width"))?;
            let names = self
                .colnames
                .as_ref()
                .ok_or_else(|| Error::schema(id, "colnames", "required for fixed_width"))?;
            if widths.len() != names.len() || widths.contains(&0) {
                return Err(Error::schema(
                    id,
                    "field_widths",
                    "must be positive and match colnames in length",
                ));
            }
        }
        if let Some(url) = &self.download_url {
            if !url.contains("://") {
                return Err(Error::schema(id, "download_url", format!("`{url}` is not a URL")));
            }
        }
        if let Some(hash) = &self.sha256 {
            if hash.len() != 64 || !hash.chars().all(|c| c.is_ascii_hexdigit()) {
                return Err(Error::schema(id, "sha256", "must be 64 hex digits"));
            }
        }
        if let Countries::Codes(codes) = &self.country {
            for c in codes {
                if c.len() != 3 || !c.chars().all(|ch| ch.is_ascii_uppercase()) {
                    return Err(Error::schema(
                        id,
                        "country",
                        format!("`{c}` is not an ISO3 code"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// A license is known and marked permissive.
    pub fn is_permissively_licensed(&self) -> bool {
        self.license_permissive
            && self
                .license
                .as_deref()
                .is_some_and(|l| !l.trim().is_empty() && l.trim() != "?")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRegistry {
    pub schema_version: String,
    #[serde(rename = "datasets")]
    annotations: Vec<DatasetAnnotation>,
}

impl CorpusRegistry {
    pub fn new(schema_version: impl Into<String>, annotations: Vec<DatasetAnnotation>) -> Result<Self> {
        let mut seen = HashSet::new();
        for a in &annotations {
            a.validate()?;
            if !seen.insert(a.dataset_id.as_str()) {
                return Err(Error::DuplicateId(a.dataset_id.clone()));
            }
        }
        Ok(Self {
            schema_version: schema_version.into(),
            annotations,
        })
    }

    /// The fixture corpus compiled into the crate.
    pub fn builtin() -> Self {
        parse_manifest(BUILTIN_MANIFEST, ParseMode::Strict).expect("builtin manifest is valid")
    }

    pub fn annotations(&self) -> &[DatasetAnnotation] {
        &self.annotations
    }

    pub fn len(&self) -> usize {
        self.annotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.annotations.is_empty()
    }

    pub fn get(&self, id: &str) -> Result<&DatasetAnnotation> {
        self.annotations
            .iter()
            .find(|a| a.dataset_id == id)
            .ok_or_else(|| Error::UnknownDataset(id.to_string()))
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DatasetAnnotation> {
        self.annotations.iter()
    }

    /// Every scenario of every annotation, in registry order.
    pub fn scenarios(&self) -> Result<Vec<Scenario>> {
        let mut out = Vec::new();
        for a in &self.annotations {
            out.extend(enumerate_scenarios(a)?);
        }
        Ok(out)
    }

    /// Looks up a scenario by id and checks it against its annotation.
    pub fn scenario(&self, scenario_id: &str) -> Result<Scenario> {
        let s = Scenario::parse(scenario_id)?;
        let a = self.get(&s.dataset_id)?;
        Scenario::for_annotation(a, s.sensitive_selection)
    }
}

impl<'a> IntoIterator for &'a CorpusRegistry {
    type Item = &'a DatasetAnnotation;
    type IntoIter = std::slice::Iter<'a, DatasetAnnotation>;

    fn into_iter(self) -> Self::IntoIter {
        self.annotations.iter()
    }
}

pub fn parse_manifest(text: &str, mode: ParseMode) -> Result<CorpusRegistry> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::ManifestSyntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::schema("", "", "top level must be an object"))?;
    for key in obj.keys() {
        if key != "schema_version" && key != "datasets" && mode == ParseMode::Strict {
            return Err(Error::schema("", key, "unknown top-level key"));
        }
    }
    let schema_version = obj
        .get("schema_version")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::schema("", "schema_version", "missing or not a string"))?
        .to_string();
    let datasets = obj
        .get("datasets")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::schema("", "datasets", "missing or not an array"))?;

    let mut annotations = Vec::with_capacity(datasets.len());
    for (i, entry) in datasets.iter().enumerate() {
        let id = entry
            .get("dataset_id")
            .and_then(Value::as_str)
            .map(str::to_string)
            .unwrap_or_else(|| format!("#{i}"));
        let fields = entry
            .as_object()
            .ok_or_else(|| Error::schema(&id, "", "dataset entry must be an object"))?;
        if mode == ParseMode::Strict {
            if let Some(unknown) = fields.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
                return Err(Error::schema(&id, unknown, "unknown key"));
            }
        }
        let annotation: DatasetAnnotation = serde_json::from_value(entry.clone())
            .map_err(|e| Error::schema(&id, field_of(&e), e.to_string()))?;
        annotations.push(annotation);
    }
    CorpusRegistry::new(schema_version, annotations)
}

fn field_of(e: &serde_json::Error) -> &'static str {
    let msg = e.to_string();
    KNOWN_KEYS
        .iter()
        .find(|k| msg.contains(&format!("`{k}`")))
        .copied()
        .unwrap_or("")
}

pub fn serialize_manifest(registry: &CorpusRegistry) -> Result<String> {
    Ok(serde_json::to_string_pretty(registry)?)
}

/// A dataset paired with one or two of its sensitive attributes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scenario {
    pub scenario_id: String,
    pub dataset_id: String,
    pub sensitive_selection: Vec<String>,
}

impl Scenario {
    pub fn new(dataset_id: impl Into<String>, selection: Vec<String>) -> Result<Self> {
        let dataset_id = dataset_id.into();
        if selection.is_empty() || selection.len() > 2 {
            return Err(Error::InvalidScenario(format!(
                "{} sensitive attributes selected, expected 1 or 2",
                selection.len()
            )));
        }
        if selection.len() == 2 && selection[0] == selection[1] {
            return Err(Error::InvalidScenario("attribute selected twice".into()));
        }
        Ok(Self {
            scenario_id: format!("{dataset_id}::{}", selection.join("+")),
            dataset_id,
            sensitive_selection: selection,
        })
    }

    /// Parses `dataset::attr` or `dataset::attrA+attrB`.
    pub fn parse(id: &str) -> Result<Self> {
        let (ds, attrs) = id
            .split_once("::")
            .ok_or_else(|| Error::InvalidScenario(format!("`{id}` lacks `::`")))?;
        Scenario::new(ds, attrs.split('+').map(str::to_string).collect())
    }

    /// Builds a scenario after checking the selection against the annotation.
    pub fn for_annotation(annotation: &DatasetAnnotation, selection: Vec<String>) -> Result<Self> {
        for s in &selection {
            if !annotation.sensitive_attributes.contains(s) {
                return Err(Error::InvalidScenario(format!(
                    "`{s}` is not a sensitive attribute of `{}`",
                    annotation.dataset_id
                )));
            }
        }
        Scenario::new(annotation.dataset_id.clone(), selection)
    }

    pub fn is_intersection(&self) -> bool {
        self.sensitive_selection.len() == 2
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.scenario_id)
    }
}

/// Scenarios of one dataset: all single attributes, followed by all
/// unordered pairs when fewer than four attributes are annotated.
pub fn enumerate_scenarios(annotation: &DatasetAnnotation) -> Result<Vec<Scenario>> {
    let attrs = &annotation.sensitive_attributes;
    if attrs.is_empty() {
        return Err(Error::NoSensitiveAttributes(annotation.dataset_id.clone()));
    }
    let id = &annotation.dataset_id;
    let mut out: Vec<Scenario> = attrs
        .iter()
        .map(|a| Scenario::new(id.clone(), vec![a.clone()]))
        .collect::<Result<_>>()?;
    if attrs.len() < 4 {
        for i in 0..attrs.len() {
            for j in i + 1..attrs.len() {
                out.push(Scenario::new(id.clone(), vec![attrs[i].clone(), attrs[j].clone()])?);
            }
        }
    }
    Ok(out)
}

/// Keeps the annotations matching `predicate`, in order.
pub fn filter_registry<F>(registry: &CorpusRegistry, predicate: F) -> CorpusRegistry
where
    F: Fn(&DatasetAnnotation) -> bool,
{
    CorpusRegistry {
        schema_version: registry.schema_version.clone(),
        annotations: registry
            .annotations
            .iter()
            .filter(|a| predicate(a))
            .cloned()
            .collect(),
    }
}

pub fn permissive_license(a: &DatasetAnnotation) -> bool {
    a.is_permissively_licensed()
}

pub fn has_country(a: &DatasetAnnotation) -> bool {
    !a.country.codes().is_empty()
}

pub fn country_in<'a>(countries: &'a [&'a str]) -> impl Fn(&DatasetAnnotation) -> bool + 'a {
    move |a| a.country.codes().iter().any(|c| countries.contains(&c.as_str()))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn annotation(id: &str, attrs: &[&str]) -> DatasetAnnotation {
        DatasetAnnotation {
            dataset_id: id.to_string(),
            dataset_name: id.to_string(),
            base_dataset_name: None,
            variant_id: None,
            download_url: Some("https://example.org/data.csv".into()),
            is_accessible: Accessibility::Public,
            format: FileFormat::Delimited,
            delimiter: Some(','),
            colnames: None,
            field_widths: None,
            na_tokens: None,
            archive_member: None,
            sha256: None,
            processing_hook: None,
            sensitive_attributes: attrs.iter().map(|s| s.to_string()).collect(),
            sensitive_categories: attrs
                .iter()
                .map(|s| (s.to_string(), vec!["a".to_string(), "b".to_string()]))
                .collect(),
            feature_selector: FeatureSelector::AllExceptTarget,
            target_column: "y".into(),
            target_lvl_good: Some("1".into()),
            target_lvl_bad: Some("0".into()),
            license: Some("CC0".into()),
            license_permissive: true,
            country: Countries::Codes(vec!["USA".into()]),
            domain: "finance".into(),
            sample_size_hint: None,
            description_public: None,
            notes_public: None,
            affiliation: None,
            years_data: None,
            citation: None,
            extra: BTreeMap::new(),
        }
    }

    const MINIMAL: &str = r#"{
      "schema_version": "1.0",
      "datasets": [{
        "dataset_id": "toy",
        "dataset_name": "Toy",
        "download_url": "https://example.org/toy.csv",
        "is_accessible": "public",
        "format": "delimited",
        "sensitive_attributes": ["sex"],
        "sensitive_categories": {"sex": ["M", "F"]},
        "feature_selector": "all_except_target",
        "target_column": "y",
        "target_lvl_good": 1,
        "license_permissive": true,
        "license": "CC0",
        "country": "n/a",
        "domain": "synthetic"
      }]
    }"#;

    #[test]
    fn parses_minimal_manifest() {
        let reg = parse_manifest(MINIMAL, ParseMode::Strict).unwrap();
        assert_eq!(reg.len(), 1);
        let a = reg.get("toy").unwrap();
        assert_eq!(a.target_lvl_good.as_deref(), Some("1"));
        assert_eq!(a.country, Countries::NotApplicable);
    }

    #[test]
    fn rejects_equal_levels() {
        let text = MINIMAL.replace(r#""target_lvl_good": 1,"#, r#""target_lvl_good": 1, "target_lvl_bad": "1","#);
        match parse_manifest(&text, ParseMode::Strict) {
            Err(Error::Schema { dataset_id, field, .. }) => {
                assert_eq!(dataset_id, "toy");
                assert_eq!(field, "target_lvl_bad");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_error_reports_position() {
        match parse_manifest("{\n  \"schema_version\": ,", ParseMode::Strict) {
            Err(Error::ManifestSyntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let a = annotation("d", &["s"]);
        assert!(matches!(
            CorpusRegistry::new("1.0", vec![a.clone(), a]),
            Err(Error::DuplicateId(_))
        ));
    }

    #[test]
    fn unknown_keys_strict_vs_lenient() {
        let text = MINIMAL.replace(r#""domain": "synthetic""#, r#""domain": "synthetic", "curator": "x""#);
        assert!(matches!(
            parse_manifest(&text, ParseMode::Strict),
            Err(Error::Schema { .. })
        ));
        let reg = parse_manifest(&text, ParseMode::Lenient).unwrap();
        assert_eq!(reg.get("toy").unwrap().extra["curator"], Value::from("x"));
        let again = parse_manifest(&serialize_manifest(&reg).unwrap(), ParseMode::Lenient).unwrap();
        assert_eq!(reg, again);
    }

    #[test]
    fn missing_sensitive_category_rejected() {
        let mut a = annotation("d", &["s"]);
        a.sensitive_categories.clear();
        assert!(a.validate().is_err());
    }

    #[test]
    fn positive_selector_with_target_rejected() {
        let mut a = annotation("d", &["s"]);
        a.feature_selector = FeatureSelector::Include(vec!["x".into(), "y".into()]);
        assert!(a.validate().is_err());
    }

    #[test]
    fn scenario_counts() {
        for (s, expected) in [(1, 1), (2, 3), (3, 6), (4, 4), (5, 5)] {
            let attrs: Vec<String> = (0..s).map(|i| format!("a{i}")).collect();
            let refs: Vec<&str> = attrs.iter().map(String::as_str).collect();
            let scenarios = enumerate_scenarios(&annotation("d", &refs)).unwrap();
            assert_eq!(scenarios.len(), expected, "S = {s}");
        }
    }

    #[test]
    fn scenario_order_and_ids() {
        let got: Vec<String> = enumerate_scenarios(&annotation("d", &["x", "y", "z"]))
            .unwrap()
            .into_iter()
            .map(|s| s.scenario_id)
            .collect();
        assert_eq!(got, ["d::x", "d::y", "d::z", "d::x+y", "d::x+z", "d::y+z"]);
    }

    #[test]
    fn no_sensitive_attributes_error() {
        let mut a = annotation("d", &[]);
        a.sensitive_categories.clear();
        assert!(matches!(enumerate_scenarios(&a), Err(Error::NoSensitiveAttributes(_))));
    }

    #[test]
    fn scenario_id_parse_round_trip() {
        let s = Scenario::parse("adult::sex+race").unwrap();
        assert_eq!(s.dataset_id, "adult");
        assert_eq!(s.sensitive_selection, ["sex", "race"]);
        assert_eq!(s.scenario_id, "adult::sex+race");
        assert!(Scenario::parse("adult").is_err());
    }

    #[test]
    fn permissive_filter() {
        let mut a = annotation("a", &["s"]);
        a.license = Some("CC0".into());
        let mut b = annotation("b", &["s"]);
        b.license = Some("?".into());
        b.license_permissive = false;
        let mut c = annotation("c", &["s"]);
        c.license = Some("CC BY 4.0".into());
        let reg = CorpusRegistry::new("1.0", vec![a, b, c]).unwrap();
        let ids: Vec<_> = filter_registry(&reg, permissive_license)
            .iter()
            .map(|a| a.dataset_id.clone())
            .collect();
        assert_eq!(ids, ["a", "c"]);
        assert_eq!(filter_registry(&reg, |_| true), reg);
        assert!(filter_registry(&reg, |_| false).is_empty());
    }

    #[test]
    fn country_predicates() {
        let mut a = annotation("a", &["s"]);
        a.country = Countries::NotApplicable;
        let b = annotation("b", &["s"]);
        let reg = CorpusRegistry::new("1.0", vec![a, b]).unwrap();
        assert_eq!(filter_registry(&reg, has_country).len(), 1);
        assert_eq!(filter_registry(&reg, country_in(&["DEU"])).len(), 0);
        assert_eq!(filter_registry(&reg, country_in(&["USA"])).len(), 1);
    }

    #[test]
    fn builtin_fixture_corpus() {
        let reg = CorpusRegistry::builtin();
        assert_eq!(reg.len(), 5);
        let mut ids: Vec<_> = reg.iter().map(|a| a.dataset_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 5);
    }
}
