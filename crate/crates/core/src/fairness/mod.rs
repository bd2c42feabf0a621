//! Performance and fairness metrics, delta scores and the built-in
//! interventions.

mod delta;
mod methods;
mod metrics;
mod repair;
mod thresholds;

pub use delta::{
    delta_scores, read_deltas_csv, write_deltas_csv, DeltaRecord, DeltaStatus, RunStatus, ScoreRecord,
    BASELINE, DELTA_CSV_HEADER,
};
pub use methods::{
    builtin_method, builtin_method_ids, sensitive_groups, Baseline, DisparateImpactRemover,
    FittedModel, GroupThresholdMethod, Intervention,
};
pub use metrics::{
    balanced_accuracy, demographic_parity_difference, equalized_odds_difference, f1_score,
    GroupedPredictions, MetricSet, METRIC_NAMES,
};
pub use repair::disparate_impact_repair;
pub use thresholds::{
    apply_group_thresholds, fit_group_thresholds, threshold_grid, ThresholdObjective, MAX_THRESHOLD_GROUPS,
};
