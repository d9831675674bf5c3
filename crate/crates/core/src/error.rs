use thiserror::Error;

/// Errors raised across the crate.
///
/// The variants are grouped into three failure classes (configuration, data,
/// numerical) which the command line front end maps to exit codes.
#[derive(Debug, Error)]
pub enum H1Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    Domain(String),

    #[error("invalid panel: {0}")]
    Panel(String),

    #[error("data error at row {row}: {msg}")]
    Data { row: usize, msg: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("singular inflection equation near t = {t}")]
    Singular { t: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Failure classes, one per command line exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureClass {
    Config,
    Data,
    Numerical,
}

impl FailureClass {
    pub fn exit_code(self) -> i32 {
        match self {
            FailureClass::Config => 2,
            FailureClass::Data => 3,
            FailureClass::Numerical => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FailureClass::Config => "config",
            FailureClass::Data => "data",
            FailureClass::Numerical => "numerical",
        }
    }
}

impl H1Error {
    pub fn class(&self) -> FailureClass {
        match self {
            H1Error::InvalidParams(_) | H1Error::Config(_) | H1Error::Json(_) => {
                FailureClass::Config
            }
            H1Error::Domain(_)
            | H1Error::Panel(_)
            | H1Error::Data { .. }
            | H1Error::Io(_)
            | H1Error::Csv(_) => FailureClass::Data,
            H1Error::Numerical(_) | H1Error::Singular { .. } => FailureClass::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, H1Error>;
