use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] mwlab_core::Error),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("thread pool: {0}")]
    Pool(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

impl CliError {
    pub fn kind(&self) -> &'static str {
        use mwlab_core::Error as E;
        match self {
            CliError::Core(E::Validation(_)) => "validation",
            CliError::Core(E::Resource { .. }) => "resource",
            CliError::Core(E::Accuracy { .. }) => "accuracy",
            CliError::Core(E::Divergence(_)) => "divergence",
            CliError::Core(E::Io(_)) | CliError::Io { .. } => "io",
            CliError::Core(E::Json(_)) | CliError::Config(_) => "config",
            CliError::Pool(_) => "resource",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "resource" | "accuracy" | "divergence" => EXIT_NUMERICAL,
            _ => EXIT_VALIDATION,
        }
    }

    /// One-line JSON object for stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": { "kind": self.kind(), "message": self.to_string() } }).to_string()
    }
}
