use std::fmt;

/// Pipeline stage that produced a transform error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    FeatureScope,
    Missing,
    Target,
    Sensitive,
    Encoding,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::FeatureScope => "feature_scope",
            Stage::Missing => "missing",
            Stage::Target => "target",
            Stage::Sensitive => "sensitive",
            Stage::Encoding => "encoding",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("manifest syntax error at line {line}, column {column}: {message}")]
    ManifestSyntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema violation in dataset `{dataset_id}`, field `{field}`: {message}")]
    Schema {
        dataset_id: String,
        field: String,
        message: String,
    },
    #[error("duplicate dataset id `{0}`")]
    DuplicateId(String),
    #[error("unknown dataset id `{0}`")]
    UnknownDataset(String),
    #[error("dataset `{0}` has no sensitive attributes")]
    NoSensitiveAttributes(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("dataset `{0}` requires a manual download")]
    ManualDownloadRequired(String),
    #[error("dataset `{0}` has no download url")]
    MissingUrl(String),
    #[error("network error fetching {url}: {message}")]
    Network { url: String, message: String },
    #[error("HTTP status {status} fetching {url}")]
    HttpStatus { url: String, status: u16 },
    #[error("archive member `{0}` not found")]
    MissingArchiveMember(String),
    #[error("archive error: {0}")]
    Archive(String),
    #[error("checksum mismatch for {url}: expected {expected}, got {actual}")]
    Checksum {
        url: String,
        expected: String,
        actual: String,
    },
    #[error("empty artifact from {0}")]
    EmptyArtifact(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid parser configuration: {0}")]
    ParserConfig(String),
    #[error("unknown processing hook `{0}`")]
    UnknownHook(String),
    #[error("processing hook `{hook}` failed: {message}")]
    Hook { hook: String, message: String },

    #[error("invalid table: {0}")]
    InvalidTable(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("column `{column}`: {message}")]
    ColumnType { column: String, message: String },
    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("{stage} stage: {source}")]
    Transform {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
    #[error("degenerate target column `{0}`: fewer than two distinct values")]
    DegenerateTarget(String),
    #[error("no annotated good level for target `{0}`")]
    MissingGoodLevel(String),
    #[error("dropping rows with missing values leaves an empty table")]
    EmptyAfterDrop,
    #[error("cannot replay transform: {0}")]
    Replay(String),

    #[error("invalid proportions: {0}")]
    Proportions(String),
    #[error("insufficient support: {0}")]
    InsufficientSupport(String),
    #[error("no non-sensitive features available")]
    NoFeatures,

    #[error("labels contain a single class")]
    SingleClass,
    #[error("non-finite input values")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("sensitive column `{0}` is not binary")]
    NonBinarySensitive(String),
    #[error("invalid threshold input: {0}")]
    Threshold(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("selection error: {0}")]
    Selection(String),
    #[error("invalid benchmark plan: {0}")]
    Plan(String),
    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at(self, stage: Stage) -> Error {
        match self {
            e @ Error::Transform { .. } => e,
            other => Error::Transform {
                stage,
                source: Box::new(other),
            },
        }
    }

    pub(crate) fn schema(dataset_id: &str, field: &str, message: impl Into<String>) -> Error {
        Error::Schema {
            dataset_id: dataset_id.to_string(),
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// True for failures caused by the environment (network, filesystem)
    /// rather than by the data or configuration.
    pub fn is_runtime(&self) -> bool {
        matches!(
            self,
            Error::Network { .. } | Error::HttpStatus { .. } | Error::Io(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
