use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use faircorpus_core::fairness::read_deltas_csv;
use faircorpus_core::frame::train_test_split;
use faircorpus_core::harness::{run_benchmark, write_outputs, BenchmarkPlan, MethodRegistry};
use faircorpus_core::ingest::{fetch, load_table, Cache};
use faircorpus_core::manifest::{enumerate_scenarios, parse_manifest, CorpusRegistry, ParseMode};
use faircorpus_core::select::{select_collection, DeltaMatrix, ScenarioMeta, SelectionConstraints};
use faircorpus_core::transform::{
    Encoding, FeatureScope, MissingMode, SensitiveMode, TargetMode, TransformConfig,
};
use faircorpus_core::{profile_dataset, transform_pipeline, Error, Result, Scenario, Table};

#[derive(Parser, Debug)]
#[command(name = "faircorpus", version, about = "Load, prepare, profile and benchmark tabular fairness datasets")]
struct Cli {
    /// Download cache directory (default: $FAIRCORPUS_CACHE or the user cache dir)
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Corpus manifest JSON (default: the built-in corpus)
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Inspect the corpus manifest
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
    /// Download a dataset into the cache
    Fetch { id: String },
    /// Write the parsed, untransformed table as CSV
    Prepare {
        id: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transform a dataset for one scenario; writes CSV and a `.report.json` sidecar
    Transform {
        /// Dataset id or scenario id (`dataset::attr`)
        id: String,
        #[command(flatten)]
        opts: TransformOpts,
        #[arg(long)]
        out: PathBuf,
    },
    /// Seeded train/test split of the prepared table
    Split {
        id: String,
        #[arg(long, default_value_t = 0.3)]
        test_size: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_train: PathBuf,
        #[arg(long)]
        out_test: PathBuf,
    },
    /// Meta-feature profile of one scenario as JSON
    Profile {
        /// Dataset id or scenario id (`dataset::attr`)
        id: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run methods over scenarios and seeds; writes runs, deltas and timings CSVs
    Bench {
        /// `all` or a comma-separated list of scenario ids
        #[arg(long, default_value = "all")]
        scenarios: String,
        /// Comma-separated method ids
        #[arg(long, value_delimiter = ',', default_values_t = default_methods())]
        methods: Vec<String>,
        /// Number of seeds, run as 0..n
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long, default_value_t = 0.3)]
        test_size: f64,
        /// Per-run timeout in seconds
        #[arg(long, default_value_t = 300)]
        timeout: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Greedy de-correlated scenario selection from a deltas CSV
    Select {
        #[arg(long)]
        deltas: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<f64>,
        #[arg(long, value_enum)]
        constraint: Vec<ConstraintArg>,
        #[arg(long, value_enum)]
        filter: Option<FilterArg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum CorpusAction {
    List,
    Show { id: String },
}

#[derive(clap::Args, Debug)]
struct TransformOpts {
    /// Binarized preset: overrides --impute, --sensitive and --encode
    #[arg(long)]
    binarize: bool,
    #[arg(long, value_enum, default_value_t = ImputeArg::Median)]
    impute: ImputeArg,
    #[arg(long, value_enum, default_value_t = TargetArg::Auto)]
    target: TargetArg,
    #[arg(long, value_enum, default_value_t = SensitiveArg::Intersect)]
    sensitive: SensitiveArg,
    #[arg(long, value_enum, default_value_t = EncodeArg::Onehot)]
    encode: EncodeArg,
    #[arg(long, value_enum, default_value_t = FeaturesArg::Essential)]
    features: FeaturesArg,
    #[arg(long, default_value_t = 200)]
    max_cardinality: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ImputeArg {
    Median,
    DropRows,
    DropCols,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TargetArg {
    Auto,
    Preferable,
    Majority,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SensitiveArg {
    Separate,
    Intersect,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum EncodeArg {
    Onehot,
    None,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FeaturesArg {
    Essential,
    All,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum ConstraintArg {
    Country,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FilterArg {
    Permissive,
}

fn default_methods() -> Vec<String> {
    MethodRegistry::builtin().ids().into_iter().map(String::from).collect()
}

impl TransformOpts {
    fn config(&self) -> TransformConfig {
        TransformConfig {
            feature_scope: match self.features {
                FeaturesArg::Essential => FeatureScope::Essential,
                FeaturesArg::All => FeatureScope::All,
            },
            missing: match self.impute {
                ImputeArg::Median => MissingMode::Impute,
                ImputeArg::DropRows => MissingMode::DropRows,
                ImputeArg::DropCols => MissingMode::DropCols,
            },
            target_mode: match self.target {
                TargetArg::Auto => TargetMode::Auto,
                TargetArg::Preferable => TargetMode::Preferable,
                TargetArg::Majority => TargetMode::MajorityMinority,
            },
            sensitive_mode: match self.sensitive {
                SensitiveArg::Separate => SensitiveMode::Separate,
                SensitiveArg::Intersect => SensitiveMode::Intersect,
            },
            encoding: match self.encode {
                EncodeArg::Onehot => Encoding::Onehot,
                EncodeArg::None => Encoding::None,
            },
            max_cardinality: self.max_cardinality,
            binarized_preset: self.binarize,
            ..TransformConfig::default()
        }
        .effective()
    }
}

struct Context {
    registry: CorpusRegistry,
    cache: Cache,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self> {
        let registry = match &cli.manifest {
            Some(path) => parse_manifest(&std::fs::read_to_string(path)?, ParseMode::Strict)?,
            None => CorpusRegistry::builtin(),
        };
        Ok(Self {
            registry,
            cache: Cache::resolve(cli.cache_dir.as_deref())?,
        })
    }

    /// A scenario id selects itself; a bare dataset id selects the
    /// dataset's first scenario.
    fn scenario(&self, id: &str) -> Result<Scenario> {
        if id.contains("::") {
            return self.registry.scenario(id);
        }
        let a = self.registry.get(id)?;
        Ok(enumerate_scenarios(a)?.remove(0))
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    let mut w = output(path)?;
    w.write_all(text.as_bytes())?;
    w.write_all(b"\n")?;
    Ok(())
}

fn write_table(table: &Table, path: Option<&Path>) -> Result<()> {
    table.write_csv(output(path)?)
}

fn run(cli: Cli) -> Result<()> {
    let ctx = Context::new(&cli)?;
    match cli.command {
        Command::Corpus { action: CorpusAction::List } => {
            let rows: Vec<_> = ctx
                .registry
                .iter()
                .map(|a| {
                    json!({
                        "dataset_id": a.dataset_id,
                        "sensitive_attributes": a.sensitive_attributes,
                        "license": a.license,
                        "scenarios": enumerate_scenarios(a).map(|s| s.len()).unwrap_or(0),
                    })
                })
                .collect();
            write_text(None, &serde_json::to_string_pretty(&rows)?)
        }
        Command::Corpus { action: CorpusAction::Show { id } } => {
            let a = ctx.registry.get(&id)?;
            write_text(None, &serde_json::to_string_pretty(a)?)
        }
        Command::Fetch { id } => {
            let a = ctx.registry.get(&id)?;
            let art = fetch(a, &ctx.cache)?;
            let url = a.download_url.as_deref().unwrap_or_default();
            let summary = json!({
                "dataset_id": a.dataset_id,
                "source_url": art.source_url,
                "bytes": art.bytes.len(),
                "from_cache": art.from_cache,
                "fetched_at": art.fetched_at,
                "path": ctx.cache.entry_path(&a.dataset_id, url),
            });
            write_text(None, &serde_json::to_string_pretty(&summary)?)
        }
        Command::Prepare { id, out } => {
            let table = load_table(ctx.registry.get(&id)?, &ctx.cache)?;
            write_table(&table, out.as_deref())
        }
        Command::Transform { id, opts, out } => {
            let scenario = ctx.scenario(&id)?;
            let annotation = ctx.registry.get(&scenario.dataset_id)?;
            let table = load_table(annotation, &ctx.cache)?;
            let (t, report) = transform_pipeline(&table, annotation, &scenario, &opts.config())?;
            write_table(&t, Some(&out))?;
            write_text(Some(&out.with_extension("report.json")), &report.to_json()?)
        }
        Command::Split {
            id,
            test_size,
            seed,
            out_train,
            out_test,
        } => {
            let table = load_table(ctx.registry.get(&id)?, &ctx.cache)?;
            let (train, test) = train_test_split(&table, test_size, seed)?;
            write_table(&train, Some(&out_train))?;
            write_table(&test, Some(&out_test))
        }
        Command::Profile { id, seed, out } => {
            let scenario = ctx.scenario(&id)?;
            let annotation = ctx.registry.get(&scenario.dataset_id)?;
            let pre = load_table(annotation, &ctx.cache)?;
            let (post, _) = transform_pipeline(&pre, annotation, &scenario, &TransformConfig::binarized())?;
            let profile = profile_dataset(&pre, &post, annotation, &scenario, seed)?;
            write_text(out.as_deref(), &profile.to_json()?)
        }
        Command::Bench {
            scenarios,
            methods,
            seeds,
            test_size,
            timeout,
            out_dir,
        } => {
            let scenarios = if scenarios == "all" {
                ctx.registry.scenarios()?
            } else {
                scenarios
                    .split(',')
                    .map(|s| ctx.registry.scenario(s.trim()))
                    .collect::<Result<_>>()?
            };
            let mut plan = BenchmarkPlan::new(scenarios, methods);
            plan.seeds = (0..seeds).collect();
            plan.test_fraction = test_size;
            plan.timeout = Duration::from_secs(timeout);
            let result = run_benchmark(&plan, &ctx.registry, &ctx.cache, &MethodRegistry::builtin())?;
            write_outputs(&result, &out_dir)?;
            let failed = result.runs.iter().filter(|r| r.status.as_str() != "ok").count();
            eprintln!("{} runs, {failed} not ok; outputs in {}", result.runs.len(), out_dir.display());
            Ok(())
        }
        Command::Select {
            deltas,
            k,
            tau,
            constraint,
            filter,
            out,
        } => {
            let records = read_deltas_csv(File::open(&deltas)?)?;
            let mut matrix = DeltaMatrix::from_records(&records)?;
            let mut constraints = SelectionConstraints::new(k, tau);
            if constraint.contains(&ConstraintArg::Country) {
                constraints = constraints.with_country();
            }
            if let Some(FilterArg::Permissive) = filter {
                let registry = &ctx.registry;
                matrix.retain(|id| {
                    let ds = id.split("::").next().unwrap_or(id);
                    registry.get(ds).is_ok_and(|a| a.is_permissively_licensed())
                });
                constraints.filter = Some("permissive".into());
            }
            let meta: Vec<ScenarioMeta> = matrix
                .scenario_ids
                .iter()
                .map(|id| ScenarioMeta::from_registry(id, &ctx.registry))
                .collect();
            let collection = select_collection(&matrix, &meta, &constraints)?;
            write_text(out.as_deref(), &collection.to_json()?)
        }
    }
}

/// 1 usage, 2 data, 3 runtime.
fn exit_code(err: &Error) -> u8 {
    match err {
        _ if err.is_runtime() => 3,
        Error::Plan(_)
        | Error::UnknownMethod(_)
        | Error::UnknownDataset(_)
        | Error::InvalidScenario(_)
        | Error::InvalidParameter(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
