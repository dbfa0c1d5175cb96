use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("unknown check `{name}`; valid checks are: {}", valid.join(", "))]
    UnknownCheck { name: String, valid: Vec<&'static str> },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("bad override `{spec}`: {reason}")]
    Override { spec: String, reason: String },

    #[error("unknown report format `{0}` (expected json-lines or csv)")]
    Format(String),

    #[error("malformed report: {0}")]
    Report(String),

    #[error(transparent)]
    Core(#[from] mdlab_core::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
