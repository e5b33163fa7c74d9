use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no narrative content left after cleaning")]
    NoNarrativeContent,

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("empty excerpt")]
    EmptyExcerpt,

    #[error("orphan rewrite: sample `{id}` references missing source `{source_id}`")]
    OrphanRewrite { id: String, source_id: String },

    #[error("split ratios {0:?} do not sum to 1")]
    BadRatios([f64; 3]),

    #[error("class {label} is empty in the {split} split")]
    EmptyClass { label: u8, split: String },

    #[error("class {label} has no tokens")]
    EmptyClassTokens { label: u8 },

    #[error("corpus contains no letters a-z")]
    NoLetters,

    #[error("entropy of an empty token list is undefined")]
    EmptyTokenList,

    #[error("vocabulary mismatch: model was trained against {expected}, got {found}")]
    VocabularyMismatch { expected: String, found: String },

    #[error("non-finite loss at epoch {epoch} (learning rate too high?): {detail}")]
    NonFiniteLoss { epoch: u32, detail: String },

    #[error("unknown annotation code `{code}` on line {line}")]
    UnknownAnnotationCode { code: String, line: usize },

    #[error("malformed annotation line {line}: {detail}")]
    BadAnnotationLine { line: usize, detail: String },

    #[error("sample `{0}` not found in dataset")]
    SampleNotFound(String),

    #[error("model file (format {0}) is not supported")]
    UnsupportedModelFormat(u32),

    #[error("model file is a `{found}` model, expected `{expected}`")]
    WrongModelKind { expected: String, found: String },

    #[error("rewrite request for `{source_id}` failed after {attempts} attempts: {detail}")]
    RewriteFailed {
        source_id: String,
        attempts: u32,
        detail: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(
        "stage `{stage}` needs `{path}` which no earlier stage produces and which does not exist"
    )]
    MissingStageInput { stage: String, path: String },

    #[error("output `{0}` already exists (pass --force to overwrite)")]
    OutputExists(String),

    #[error("malformed dataset record on line {line}: {source}")]
    BadRecord {
        line: usize,
        source: serde_json::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("failed to parse config: {0}")]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Http(#[from] reqwest::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
