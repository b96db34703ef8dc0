use thiserror::Error;

/// Broad classes of failure; the CLI maps these onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Numerical,
    Simulation,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("missing cell: variable={variable}, good={good}, month={month}")]
    MissingCell {
        variable: String,
        good: u32,
        month: String,
    },

    #[error("duplicate cell: variable={variable}, good={good}, month={month}")]
    DuplicateCell {
        variable: String,
        good: u32,
        month: String,
    },

    #[error("non-positive level {value} at variable={variable}, good={good}, month={month}")]
    NonPositive {
        variable: String,
        good: u32,
        month: String,
        value: f64,
    },

    #[error("ragged month range: series {series} covers {first}..{last}, panel covers {panel_first}..{panel_last}")]
    RaggedRange {
        series: String,
        first: String,
        last: String,
        panel_first: String,
        panel_last: String,
    },

    #[error("degenerate series {0}: zero variance")]
    DegenerateSeries(String),

    #[error("label mismatch: {0}")]
    LabelMismatch(String),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NotConverged { sweeps: usize, off_norm: f64 },

    #[error("undefined phase: {0}")]
    UndefinedPhase(String),

    #[error("degenerate simulation: {0}")]
    SimulationDegenerate(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NotConverged { .. } | Error::UndefinedPhase(_) => ErrorKind::Numerical,
            Error::SimulationDegenerate(_) => ErrorKind::Simulation,
            Error::Stage { source, .. } => source.kind(),
            _ => ErrorKind::Input,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Wrap an error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
