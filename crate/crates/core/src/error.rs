use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown {kind} `{name}`; valid names: {valid}")]
    UnknownCatalog {
        kind: &'static str,
        name: String,
        valid: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("quadrature self-test failed: {0}")]
    SelfTest(String),

    #[error("invalid-cell budget exceeded: {invalid} of {total} sweep cells violate the boundary condition")]
    InvalidCells { invalid: usize, total: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable identifier, written into failure reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnknownCatalog { .. } => "catalog_miss",
            Error::Config(_) => "config_invalid",
            Error::SelfTest(_) => "quadrature_self_test",
            Error::InvalidCells { .. } => "invalid_cell_budget",
            Error::Precondition(_) => "precondition",
            Error::Degenerate(_) => "degenerate_input",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }

    /// Process exit status used by the command-line runner.
    pub fn exit_status(&self) -> i32 {
        match self {
            Error::UnknownCatalog { .. } | Error::Config(_) | Error::Json(_) => 2,
            Error::SelfTest(_) => 3,
            _ => 1,
        }
    }
}
