//! Manifest-driven loading, preparation, profiling and fairness
//! benchmarking of tabular datasets.

pub mod error;
pub mod fairness;
pub mod frame;
pub mod harness;
pub mod ingest;
pub mod learn;
pub mod manifest;
pub mod profile;
pub mod rng;
pub mod select;
pub mod synthetic;
pub mod transform;

pub use error::{Error, Result, Stage};
pub use fairness::{DeltaRecord, GroupedPredictions, Intervention, MetricSet, RunStatus};
pub use frame::{Column, DType, Role, Table};
pub use harness::{run_benchmark, BenchmarkPlan, BenchmarkResult, MethodRegistry, RunRecord};
pub use ingest::{fetch, load_table, parse_table, Cache, ParserConfig, RawArtifact};
pub use manifest::{enumerate_scenarios, CorpusRegistry, DatasetAnnotation, ParseMode, Scenario};
pub use profile::{profile_dataset, MetaProfile};
pub use rng::SeededRng;
pub use select::{select_collection, Collection, DeltaMatrix, SelectionConstraints};
pub use transform::{replay_transform, transform_pipeline, TransformConfig, TransformReport};
