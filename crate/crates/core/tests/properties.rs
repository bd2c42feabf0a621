use std::collections::{BTreeSet, HashSet};

use proptest::prelude::*;

use faircorpus_core::fairness::{
    apply_group_thresholds, balanced_accuracy, demographic_parity_difference, disparate_impact_repair,
    equalized_odds_difference, f1_score, fit_group_thresholds, threshold_grid, GroupedPredictions,
    ThresholdObjective,
};
use faircorpus_core::frame::{split_indices, value_frequencies, Column, DType, Role, Table};
use faircorpus_core::learn::{
    fit_random_forest, log_loss, log_loss_gradient, rf_predict_proba, roc_auc, ForestConfig, Matrix,
};
use faircorpus_core::manifest::{enumerate_scenarios, parse_manifest, serialize_manifest, CorpusRegistry, ParseMode};
use faircorpus_core::profile::gini_simpson;
use faircorpus_core::select::{select_from_correlations, spearman_dense, ScenarioMeta, SelectionConstraints};
use faircorpus_core::synthetic::messy_case;
use faircorpus_core::transform::{
    encode_categoricals, replay_transform, transform_pipeline, TransformConfig, OTHER_CATEGORY,
};

fn grouped(rows: &[(bool, bool, u8)]) -> GroupedPredictions {
    GroupedPredictions::new(
        rows.iter().map(|r| r.0).collect(),
        rows.iter().map(|r| r.1).collect(),
        rows.iter().map(|r| format!("g{}", r.2)).collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn manifest_round_trip(_x in 0u8..1) {
        let reg = CorpusRegistry::builtin();
        let text = serialize_manifest(&reg).unwrap();
        prop_assert_eq!(parse_manifest(&text, ParseMode::Strict).unwrap(), reg);
    }

    #[test]
    fn scenario_counts_follow_rule(s in 1usize..7) {
        let attrs: Vec<String> = (0..s).map(|i| format!("a{i}")).collect();
        let mut a = CorpusRegistry::builtin().get("synthetic_lending").unwrap().clone();
        a.sensitive_categories = attrs.iter().map(|n| (n.clone(), vec!["x".to_string()])).collect();
        a.sensitive_attributes = attrs;
        let n = enumerate_scenarios(&a).unwrap().len();
        let expected = if s < 4 { s + s * (s - 1) / 2 } else { s };
        prop_assert_eq!(n, expected);
    }

    #[test]
    fn split_partitions_rows(n in 1usize..400, f in 0.05f64..0.95, seed in any::<u64>()) {
        let n_test = (f * n as f64).round() as usize;
        if n_test == 0 || n_test == n {
            prop_assert!(split_indices(n, f, seed).is_err());
            return Ok(());
        }
        let (train, test) = split_indices(n, f, seed).unwrap();
        prop_assert_eq!(test.len(), n_test);
        let all: BTreeSet<usize> = train.iter().chain(&test).copied().collect();
        prop_assert_eq!(all.len(), n);
        prop_assert_eq!(split_indices(n, f, seed).unwrap(), (train, test));
    }

    #[test]
    fn metrics_permutation_invariant(
        rows in prop::collection::vec((any::<bool>(), any::<bool>(), 0u8..3), 1..60),
        seed in any::<u64>(),
    ) {
        let mut shuffled = rows.clone();
        let mut rng = faircorpus_core::SeededRng::new(seed);
        rng.shuffle(&mut shuffled);
        let (a, b) = (grouped(&rows), grouped(&shuffled));
        prop_assert_eq!(balanced_accuracy(&a), balanced_accuracy(&b));
        prop_assert_eq!(f1_score(&a), f1_score(&b));
        prop_assert_eq!(equalized_odds_difference(&a), equalized_odds_difference(&b));
        prop_assert_eq!(demographic_parity_difference(&a), demographic_parity_difference(&b));
    }

    #[test]
    fn bacc_of_flipped_predictor(rows in prop::collection::vec((any::<bool>(), any::<bool>(), 0u8..2), 2..60)) {
        let flipped: Vec<_> = rows.iter().map(|r| (r.0, !r.1, r.2)).collect();
        if let (Some(a), Some(b)) = (balanced_accuracy(&grouped(&rows)), balanced_accuracy(&grouped(&flipped))) {
            prop_assert!((a + b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn label_only_predictor_is_fair(
        rows in prop::collection::vec((any::<bool>(), 0u8..3), 1..40),
        pos_pred in any::<bool>(), neg_pred in any::<bool>(),
    ) {
        // the same predictor replicated in every group
        let mut all = Vec::new();
        for g in 0..3u8 {
            for r in &rows {
                all.push((r.0, if r.0 { pos_pred } else { neg_pred }, g));
            }
        }
        let gp = grouped(&all);
        if let Some(e) = equalized_odds_difference(&gp) { prop_assert_eq!(e, 0.0); }
        prop_assert_eq!(demographic_parity_difference(&gp), Some(0.0));
    }

    #[test]
    fn gini_max_at_uniform(p in 0.0f64..=1.0) {
        let g = gini_simpson(&[p, 1.0 - p]).unwrap();
        prop_assert!(g <= 0.5 + 1e-15);
        prop_assert!(g >= 0.0);
    }

    #[test]
    fn auc_invariants(
        data in prop::collection::vec((0.0f64..1.0, any::<bool>()), 2..80),
    ) {
        let scores: Vec<f64> = data.iter().map(|d| (d.0 * 10.0).round() / 10.0).collect();
        let labels: Vec<bool> = data.iter().map(|d| d.1).collect();
        prop_assume!(labels.iter().any(|l| *l) && labels.iter().any(|l| !*l));
        let auc = roc_auc(&scores, &labels).unwrap();
        let mono: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 7.0).collect();
        prop_assert!((roc_auc(&mono, &labels).unwrap() - auc).abs() < 1e-12);
        let inv: Vec<bool> = labels.iter().map(|l| !l).collect();
        prop_assert!((roc_auc(&scores, &inv).unwrap() + auc - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spearman_bounds_and_symmetry(
        pairs in prop::collection::vec((-5i32..5, -5i32..5), 3..40),
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
        if let Some(r) = spearman_dense(&x, &y) {
            prop_assert!((-1.0..=1.0).contains(&r));
            prop_assert_eq!(spearman_dense(&y, &x), Some(r));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn logistic_gradient_matches_finite_differences(
        rows in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 3), 4..20),
        labels in prop::collection::vec(any::<bool>(), 20),
        params in prop::collection::vec(-1.0f64..1.0, 4),
    ) {
        let x = Matrix::from_rows(&rows).unwrap();
        let y = &labels[..rows.len()];
        let g = log_loss_gradient(&x, y, &params, 1e-6);
        for j in 0..params.len() {
            let h = 1e-5;
            let mut up = params.clone();
            let mut down = params.clone();
            up[j] += h;
            down[j] -= h;
            let fd = (log_loss(&x, y, &up, 1e-6) - log_loss(&x, y, &down, 1e-6)) / (2.0 * h);
            prop_assert!((fd - g[j]).abs() <= 1e-4 * g[j].abs().max(1e-3), "{} vs {}", fd, g[j]);
        }
    }

    #[test]
    fn forest_is_convex_combination(seed in any::<u64>()) {
        let mut rng = faircorpus_core::SeededRng::new(seed);
        let rows: Vec<Vec<f64>> = (0..80).map(|_| vec![rng.unit(), rng.unit()]).collect();
        let y: Vec<bool> = rows.iter().map(|r| r[0] + 0.3 * rng.unit() > 0.6).collect();
        prop_assume!(y.iter().any(|v| *v) && y.iter().any(|v| !*v));
        let x = Matrix::from_rows(&rows).unwrap();
        let f = fit_random_forest(&x, &y, &ForestConfig { n_trees: 7, ..Default::default() }, seed).unwrap();
        let p = rf_predict_proba(&f, &x).unwrap();
        for (i, pi) in p.iter().enumerate() {
            let per_tree: Vec<f64> = f.trees.iter().map(|t| t.predict_row(x.row(i))).collect();
            let lo = per_tree.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = per_tree.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(*pi >= lo - 1e-12 && *pi <= hi + 1e-12);
        }
    }

    #[test]
    fn dpd_thresholds_dominate_shared(
        data in prop::collection::vec((0.0f64..1.0, any::<bool>(), any::<bool>()), 4..30),
    ) {
        let scores: Vec<f64> = data.iter().map(|d| d.0).collect();
        let y: Vec<bool> = data.iter().map(|d| d.1).collect();
        let g: Vec<String> = data.iter().map(|d| if d.2 { "a".into() } else { "b".into() }).collect();
        let t = fit_group_thresholds(&scores, &g, &y, ThresholdObjective::Dpd).unwrap();
        let dpd = |pred: Vec<bool>| demographic_parity_difference(&GroupedPredictions::new(y.clone(), pred, g.clone()).unwrap()).unwrap();
        let fitted = dpd(apply_group_thresholds(&scores, &g, &t).unwrap());
        for shared in threshold_grid() {
            prop_assert!(fitted <= dpd(scores.iter().map(|s| *s >= shared).collect()) + 1e-12);
        }
    }

    #[test]
    fn repair_preserves_within_group_order(
        data in prop::collection::vec((-10.0f64..10.0, any::<bool>()), 3..50),
        lambda in 0.0f64..=1.0,
    ) {
        let x: Vec<Option<f64>> = data.iter().map(|d| Some(d.0)).collect();
        let s: Vec<Option<&str>> = data.iter().map(|d| Some(if d.1 { "majority" } else { "minority" })).collect();
        let t = Table::new(vec![
            Column::float("x", x),
            Column::categorical("s", &s).with_role(Role::Sensitive),
        ]).unwrap();
        let out = disparate_impact_repair(&t, "s", lambda).unwrap();
        let rx = out.column("x").unwrap().dense_f64().unwrap();
        for i in 0..data.len() {
            for j in 0..data.len() {
                if data[i].1 == data[j].1 && data[i].0 < data[j].0 {
                    prop_assert!(rx[i] <= rx[j] + 1e-9);
                }
            }
        }
    }

    #[test]
    fn full_repair_aligns_equal_size_groups(
        a in prop::collection::vec(-10.0f64..10.0, 2..30),
        b_seed in any::<u64>(),
    ) {
        let mut rng = faircorpus_core::SeededRng::new(b_seed);
        let b: Vec<f64> = a.iter().map(|_| rng.unit() * 20.0 - 5.0).collect();
        let mut x: Vec<Option<f64>> = a.iter().map(|v| Some(*v)).collect();
        x.extend(b.iter().map(|v| Some(*v)));
        let mut s = vec![Some("majority"); a.len()];
        s.extend(vec![Some("minority"); b.len()]);
        let t = Table::new(vec![
            Column::float("x", x),
            Column::categorical("s", &s).with_role(Role::Sensitive),
        ]).unwrap();
        let rx = disparate_impact_repair(&t, "s", 1.0).unwrap().column("x").unwrap().dense_f64().unwrap();
        let mut ra = rx[..a.len()].to_vec();
        let mut rb = rx[a.len()..].to_vec();
        ra.sort_by(f64::total_cmp);
        rb.sort_by(f64::total_cmp);
        for (p, q) in ra.iter().zip(&rb) {
            prop_assert!((p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn preset_postconditions_and_replay(seed in any::<u64>()) {
        let case = messy_case(seed);
        let (out, report) = transform_pipeline(&case.table, &case.annotation, &case.scenario, &TransformConfig::binarized()).unwrap();
        prop_assert_eq!(out.n_missing_cells(), 0);
        prop_assert_eq!(out.target().unwrap().dtype(), DType::Bool);
        let sens: Vec<&Column> = out.columns_with_role(Role::Sensitive).collect();
        prop_assert_eq!(sens.len(), 1);
        prop_assert!(value_frequencies(sens[0]).len() <= 2);
        for c in out.columns().iter().filter(|c| c.role() != Role::Sensitive) {
            prop_assert!(matches!(c.dtype(), DType::Bool | DType::Float | DType::Int));
        }
        for map in report.category_maps.values() {
            prop_assert!(map.levels.len() <= 200);
        }
        let replayed = replay_transform(&case.table, &faircorpus_core::TransformReport::from_json(&report.to_json().unwrap()).unwrap()).unwrap();
        prop_assert_eq!(out.to_csv_string().unwrap(), replayed.to_csv_string().unwrap());
    }

    #[test]
    fn pipeline_is_idempotent(seed in any::<u64>()) {
        let mut case = messy_case(seed);
        case.annotation.feature_selector = faircorpus_core::manifest::FeatureSelector::AllExceptTarget;
        let scenario = faircorpus_core::Scenario::new(
            case.annotation.dataset_id.clone(),
            vec![case.scenario.sensitive_selection[0].clone()],
        ).unwrap();
        let cfg = TransformConfig::binarized();
        let (once, _) = transform_pipeline(&case.table, &case.annotation, &scenario, &cfg).unwrap();
        let (twice, _) = transform_pipeline(&once, &case.annotation, &scenario, &cfg).unwrap();
        prop_assert_eq!(once.to_csv_string().unwrap(), twice.to_csv_string().unwrap());
    }

    #[test]
    fn cap_bounds_distinct_values(n in 1usize..400, cap in 1usize..60) {
        let v: Vec<Option<String>> = (0..n).map(|i| Some(format!("v{}", i % 97 + i / 7))).collect();
        let t = Table::new(vec![Column::text("t", &v)]).unwrap();
        let (out, rep) = encode_categoricals(&t, cap).unwrap();
        let map = &rep.category_maps["t"];
        prop_assert!(map.levels.len() <= cap);
        prop_assert_eq!(out.n_cols(), map.levels.len());
        prop_assert_eq!(map.grouped_other, map.levels.contains(&OTHER_CATEGORY.to_string()));
    }

    #[test]
    fn na_proportion_bounds(seed in any::<u64>()) {
        let t = messy_case(seed).table;
        let cells = t.n_missing_cells() as f64 / (t.n_rows() * t.n_cols()) as f64;
        let rows = t.rows_with_missing().iter().filter(|m| **m).count() as f64 / t.n_rows() as f64;
        let cols = t.columns().iter().filter(|c| c.n_missing() > 0).count() as f64 / t.n_cols() as f64;
        prop_assert!(cells <= rows && rows <= 1.0);
        prop_assert!(cells <= cols);
    }

    #[test]
    fn selection_respects_constraints(
        n in 2usize..9,
        seed in any::<u64>(),
        tau in prop::option::of(-0.5f64..0.5),
        k in prop::option::of(1usize..6),
    ) {
        prop_assume!(tau.is_some() || k.is_some());
        let mut rng = faircorpus_core::SeededRng::new(seed);
        let mut corr = vec![vec![1.0; n]; n];
        for i in 0..n {
            for j in 0..i {
                let c = (rng.unit() * 2.0 - 1.0) * 0.9;
                corr[i][j] = c;
                corr[j][i] = c;
            }
        }
        let countries = ["USA", "DEU", "FRA"];
        let meta: Vec<ScenarioMeta> = (0..n).map(|i| ScenarioMeta {
            scenario_id: format!("d{}::s{i}", rng.below(n)),
            dataset_id: String::new(),
            countries: if rng.unit() < 0.5 { vec![] } else { vec![countries[rng.below(3)].to_string()] },
        }).map(|mut m| { m.dataset_id = m.scenario_id.split("::").next().unwrap().to_string(); m }).collect();
        let ids: HashSet<&String> = meta.iter().map(|m| &m.scenario_id).collect();
        prop_assume!(ids.len() == n);
        let cons = SelectionConstraints::new(k, tau).with_country();
        let c = select_from_correlations(&corr, &meta, &cons).unwrap();
        prop_assert_eq!(&c, &select_from_correlations(&corr, &meta, &cons).unwrap());
        if let Some(k) = k { prop_assert!(c.entries.len() <= k); }
        if let Some(tau) = tau {
            for e in &c.entries[1..] { prop_assert!(e.avg_correlation_at_insertion < tau); }
        }
        let chosen: Vec<&ScenarioMeta> = c.entries.iter()
            .map(|e| meta.iter().find(|m| m.scenario_id == e.scenario_id).unwrap()).collect();
        for (i, a) in chosen.iter().enumerate() {
            for b in &chosen[i + 1..] {
                prop_assert_ne!(&a.dataset_id, &b.dataset_id);
                prop_assert!(a.countries.iter().all(|x| !b.countries.contains(x)));
            }
        }
    }
}
