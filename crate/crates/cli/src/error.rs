use std::fmt;

use serde::Serialize;

/// Failure classes with their process exit codes.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Invalid configuration, flags or input file layout (exit 2).
    Schema(String),
    /// A mandatory fit did not converge (exit 3).
    Fit(String),
    /// Reading or writing files failed (exit 4).
    Io(String),
    /// reproduce-paper ran but at least one row is outside tolerance (exit 1).
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Check(_) => 1,
            CliError::Schema(_) => 2,
            CliError::Fit(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Schema(_) => "schema",
            CliError::Fit(_) => "fit",
            CliError::Io(_) => "io",
            CliError::Check(_) => "check",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Schema(m) | CliError::Fit(m) | CliError::Io(m) | CliError::Check(m) => m,
        }
    }

    /// One-line JSON record for stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            error: &'a str,
            message: &'a str,
            exit_code: i32,
        }
        serde_json::to_string(&Record {
            error: self.kind(),
            message: self.message(),
            exit_code: self.exit_code(),
        })
        .expect("error record is serialisable")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind(), self.message())
    }
}

impl std::error::Error for CliError {}

impl From<coherence_core::Error> for CliError {
    fn from(e: coherence_core::Error) -> Self {
        use coherence_core::Error as E;
        match e {
            E::InvalidParameter { .. } | E::StepSize { .. } | E::Data(_) => CliError::Schema(e.to_string()),
            E::Fit { .. } => CliError::Fit(e.to_string()),
            E::Csv(ref c) if !c.is_io_error() => CliError::Schema(e.to_string()),
            E::Io(_) | E::Csv(_) => CliError::Io(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
