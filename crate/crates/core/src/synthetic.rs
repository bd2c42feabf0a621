//! Seeded synthetic data: the offline lending dataset served under
//! `synthetic://` URLs, random messy tables, and sensitive-attribute
//! fixtures with known proxy structure.

use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::frame::{Column, Role, Table};
use crate::manifest::{
    Accessibility, Countries, DatasetAnnotation, FeatureSelector, FileFormat, Scenario,
};
use crate::rng::SeededRng;

/// Generates the bytes behind `synthetic://<generator>?rows=N&seed=S`.
pub fn generate_from_url(url: &str) -> Result<Vec<u8>> {
    let bad = |m: &str| Error::Network {
        url: url.to_string(),
        message: m.to_string(),
    };
    let rest = url
        .strip_prefix("synthetic://")
        .ok_or_else(|| bad("not a synthetic url"))?;
    let (name, query) = rest.split_once('?').unwrap_or((rest, ""));
    let mut rows = 1000usize;
    let mut seed = 0u64;
    for pair in query.split('&').filter(|p| !p.is_empty()) {
        let (k, v) = pair.split_once('=').ok_or_else(|| bad("malformed query"))?;
        match k {
            "rows" => rows = v.parse().map_err(|_| bad("rows must be an integer"))?,
            "seed" => seed = v.parse().map_err(|_| bad("seed must be an integer"))?,
            _ => return Err(bad(&format!("unknown parameter `{k}`"))),
        }
    }
    match name {
        "lending" => Ok(lending_csv(rows, seed).into_bytes()),
        other => Err(bad(&format!("unknown generator `{other}`"))),
    }
}

fn pick<'a>(rng: &mut SeededRng, items: &[(&'a str, f64)]) -> &'a str {
    let u = rng.unit();
    let mut acc = 0.0;
    for (v, p) in items {
        acc += p;
        if u < acc {
            return v;
        }
    }
    items.last().unwrap().0
}

/// A loan-approval table with group-dependent outcomes and scattered
/// missing values in several encodings.
pub fn lending_csv(rows: usize, seed: u64) -> String {
    let mut rng = SeededRng::new(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "sex",
        "race",
        "age",
        "age_band",
        "income",
        "credit_score",
        "employment",
        "region",
        "loan_amount",
        "years_employed",
        "has_guarantor",
        "approved",
    ])
    .unwrap();
    for _ in 0..rows {
        let sex = pick(&mut rng, &[("male", 0.55), ("female", 0.45)]);
        let race = pick(
            &mut rng,
            &[("group_a", 0.6), ("group_b", 0.25), ("group_c", 0.15)],
        );
        let age = (18.0 + 50.0 * rng.unit()).floor() as i64;
        let age_band = if age < 30 {
            "young"
        } else if age <= 55 {
            "middle"
        } else {
            "senior"
        };
        let z1: f64 = normal.sample(rng.inner_mut());
        let z2: f64 = normal.sample(rng.inner_mut());
        let z3: f64 = normal.sample(rng.inner_mut());
        let income = 42_000.0 + 12_000.0 * z1 + if sex == "male" { 4_000.0 } else { 0.0 };
        let credit = (650.0 + 60.0 * z2 - if race == "group_a" { 0.0 } else { 25.0 })
            .clamp(300.0, 850.0)
            .round() as i64;
        let employment = pick(
            &mut rng,
            &[
                ("salaried", 0.6),
                ("self_employed", 0.2),
                ("contract", 0.12),
                ("unemployed", 0.08),
            ],
        );
        let region = format!("region_{:02}", rng.below(30));
        let loan = (15_000.0 + 5_000.0 * z3).max(1_000.0);
        let years = rng.below(((age - 16) as usize).max(1)) as i64;
        let guarantor = rng.unit() < 0.3;
        let score = (income - 42_000.0) / 12_000.0 + (credit as f64 - 650.0) / 60.0
            - (loan - 15_000.0) / 10_000.0
            + if employment == "unemployed" { -1.5 } else { 0.3 }
            + if guarantor { 0.5 } else { 0.0 };
        let p = 1.0 / (1.0 + (-score).exp());
        let approved = if rng.unit() < p { "yes" } else { "no" };

        let income_s = if rng.unit() < 0.05 {
            "NA".to_string()
        } else {
            format!("{income:.2}")
        };
        let credit_s = if rng.unit() < 0.02 {
            "?".to_string()
        } else {
            credit.to_string()
        };
        let employment_s = if rng.unit() < 0.03 { "" } else { employment };
        w.write_record([
            sex,
            race,
            &age.to_string(),
            age_band,
            &income_s,
            &credit_s,
            employment_s,
            &region,
            &format!("{loan:.2}"),
            &years.to_string(),
            if guarantor { "true" } else { "false" },
            approved,
        ])
        .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// A randomly shaped table plus a matching annotation and scenario.
#[derive(Debug, Clone)]
pub struct MessyCase {
    pub table: Table,
    pub annotation: DatasetAnnotation,
    pub scenario: Scenario,
}

fn maybe_missing<T>(rng: &mut SeededRng, rate: f64, v: T) -> Option<T> {
    (rng.unit() >= rate).then_some(v)
}

/// Random mixed-type table with missing cells, skewed categories and, for
/// some seeds, a text column with more than 200 distinct values.
pub fn messy_case(seed: u64) -> MessyCase {
    let mut rng = SeededRng::new(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let high_cardinality = rng.unit() < 0.25;
    let n = if high_cardinality {
        320 + rng.below(200)
    } else {
        30 + rng.below(200)
    };
    let mut columns = Vec::new();

    let n_sensitive = 1 + rng.below(3);
    let mut sensitive = Vec::new();
    for s in 0..n_sensitive {
        let name = format!("sens_{s}");
        let levels = 2 + rng.below(4);
        let rate = if rng.unit() < 0.5 { 0.0 } else { 0.1 };
        let numeric = rng.unit() < 0.3;
        let mut values: Vec<Option<String>> = (0..n)
            .map(|_| {
                // skewed level probabilities
                let u = rng.unit();
                let lvl = ((u * u) * levels as f64) as usize;
                let v = if numeric {
                    (20 + 10 * lvl).to_string()
                } else {
                    format!("L{lvl}")
                };
                maybe_missing(&mut rng, rate, v)
            })
            .collect();
        values[0] = Some(if numeric { "20".into() } else { "L0".into() });
        let col = if numeric {
            Column::int(&name, values.iter().map(|v| v.as_ref().map(|s| s.parse().unwrap())).collect())
        } else {
            Column::categorical(&name, &values)
        };
        columns.push(col);
        sensitive.push(name);
    }

    let target_levels = 2 + rng.below(3);
    let target_is_int = target_levels == 2 && rng.unit() < 0.5;
    let mut target: Vec<Option<String>> = (0..n)
        .map(|_| {
            let lvl = rng.below(target_levels);
            let v = if target_is_int {
                lvl.to_string()
            } else {
                format!("t{lvl}")
            };
            maybe_missing(&mut rng, 0.03, v)
        })
        .collect();
    target[0] = Some(if target_is_int { "0".into() } else { "t0".into() });
    target[1] = Some(if target_is_int { "1".into() } else { "t1".into() });
    columns.push(if target_is_int {
        Column::int("target", target.iter().map(|v| v.as_ref().map(|s| s.parse().unwrap())).collect())
    } else {
        Column::categorical("target", &target)
    });

    let n_features = 2 + rng.below(7);
    let mut features = Vec::new();
    for f in 0..n_features {
        let name = format!("f{f}");
        let rate = [0.0, 0.05, 0.3][rng.below(3)];
        let kind = rng.below(5);
        let mut col = match kind {
            0 => Column::float(
                &name,
                (0..n)
                    .map(|_| {
                        let v: f64 = normal.sample(rng.inner_mut());
                        maybe_missing(&mut rng, rate, v * 10.0)
                    })
                    .collect(),
            ),
            1 => Column::int(
                &name,
                (0..n)
                    .map(|_| {
                        let v = rng.below(50) as i64 - 10;
                        maybe_missing(&mut rng, rate, v)
                    })
                    .collect(),
            ),
            2 => Column::bool(
                &name,
                (0..n)
                    .map(|_| {
                        let v = rng.unit() < 0.4;
                        maybe_missing(&mut rng, rate, v)
                    })
                    .collect(),
            ),
            3 => {
                let values: Vec<Option<String>> = (0..n)
                    .map(|_| {
                        let v = format!("c{}", rng.below(6));
                        maybe_missing(&mut rng, rate, v)
                    })
                    .collect();
                Column::categorical(&name, &values)
            }
            _ => {
                let vocab = if high_cardinality && f == 0 { 400 } else { 25 };
                let values: Vec<Option<String>> = (0..n)
                    .map(|_| {
                        let v = format!("w{}", rng.below(vocab));
                        maybe_missing(&mut rng, rate, v)
                    })
                    .collect();
                Column::text(&name, &values)
            }
        };
        if kind <= 1 && col.n_missing() == n {
            col = Column::float(&name, vec![Some(0.0); n]);
        }
        columns.push(col);
        features.push(name);
    }
    // guarantee at least one high-cardinality column when requested
    if high_cardinality {
        let values: Vec<Option<String>> = (0..n)
            .map(|i| Some(format!("id{:04}", if i % 3 == 0 { 0 } else { i })))
            .collect();
        columns.push(Column::text("record_code", &values));
        features.push("record_code".into());
    }
    columns.push(Column::float(
        "ignored_col",
        (0..n).map(|_| Some(rng.unit())).collect(),
    ));

    let feature_selector = match rng.below(3) {
        0 => FeatureSelector::AllExceptTarget,
        1 => FeatureSelector::Include(features.clone()),
        _ => FeatureSelector::Exclude(vec!["ignored_col".into()]),
    };
    let good = if rng.unit() < 0.7 {
        Some(if target_is_int { "1".to_string() } else { "t1".to_string() })
    } else {
        None
    };
    let annotation = DatasetAnnotation {
        dataset_id: format!("messy_{seed}"),
        dataset_name: format!("Messy {seed}"),
        base_dataset_name: None,
        variant_id: None,
        download_url: None,
        is_accessible: Accessibility::Public,
        format: FileFormat::Delimited,
        delimiter: None,
        colnames: None,
        field_widths: None,
        na_tokens: None,
        archive_member: None,
        sha256: None,
        processing_hook: None,
        sensitive_attributes: sensitive.clone(),
        sensitive_categories: sensitive.iter().map(|s| (s.clone(), Vec::new())).collect(),
        feature_selector,
        target_column: "target".into(),
        target_lvl_good: good,
        target_lvl_bad: None,
        license: Some("CC0".into()),
        license_permissive: true,
        country: Countries::NotApplicable,
        domain: "synthetic".into(),
        sample_size_hint: Some(n as u64),
        description_public: None,
        notes_public: None,
        affiliation: None,
        years_data: None,
        citation: None,
        extra: Default::default(),
    };
    let selection = if n_sensitive >= 2 && rng.unit() < 0.5 {
        vec![sensitive[0].clone(), sensitive[1].clone()]
    } else {
        vec![sensitive[rng.below(n_sensitive)].clone()]
    };
    let scenario = Scenario::for_annotation(&annotation, selection).expect("valid selection");
    MessyCase {
        table: Table::new(columns).expect("generated table is consistent"),
        annotation,
        scenario,
    }
}

pub const FIXTURE_SENSITIVE: &str = "group";

/// Binarized table whose numeric features are independent of the
/// sensitive column (about 30% minority).
pub fn sensitive_independent(n: usize, seed: u64) -> Table {
    sensitive_fixture(n, seed, false)
}

/// Like [`sensitive_independent`] but feature `x0` is an exact 0/1 copy of
/// the minority indicator.
pub fn sensitive_proxy(n: usize, seed: u64) -> Table {
    sensitive_fixture(n, seed, true)
}

fn sensitive_fixture(n: usize, seed: u64, proxy: bool) -> Table {
    let mut rng = SeededRng::new(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let minority: Vec<bool> = (0..n).map(|_| rng.unit() < 0.3).collect();
    let groups: Vec<Option<&str>> = minority
        .iter()
        .map(|m| Some(if *m { "minority" } else { "majority" }))
        .collect();
    let mut columns = vec![Column::categorical(FIXTURE_SENSITIVE, &groups).with_role(Role::Sensitive)];
    for j in 0..4 {
        let values = (0..n)
            .map(|i| {
                let noise: f64 = normal.sample(rng.inner_mut());
                Some(if proxy && j == 0 {
                    if minority[i] {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    noise
                })
            })
            .collect();
        columns.push(Column::float(format!("x{j}"), values));
    }
    columns.push(Column::bool("y", (0..n).map(|_| Some(rng.unit() < 0.4)).collect()).with_role(Role::Target));
    Table::new(columns).expect("fixture table is consistent")
}
