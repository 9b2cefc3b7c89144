use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller broke a documented precondition (dimensions, ranges, set relations).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The objective or an iterate became non-finite.
    #[error("numerical failure at outer iteration {iteration}: {message}")]
    Numerical { iteration: usize, message: String },

    #[error("fit failed at grid cell (lambda = {lambda}, gamma = {gamma}): {source}")]
    GridCell {
        lambda: f64,
        gamma: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("no feasible model under s_n cap {cap}: all {cells} grid cells exceed it")]
    NoFeasibleModel { cap: usize, cells: usize },

    #[error("matrix is numerically singular (min eigenvalue {min_eigenvalue:e}, max {max_eigenvalue:e}); inverse refused")]
    Singular {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("cannot estimate f(0): {0}; supply the density value explicitly")]
    DegenerateResiduals(String),

    /// Malformed input data; `row` and `column` are 1-based when known.
    #[error("data error{}: {message}", location(*row, *column))]
    Data {
        row: Option<usize>,
        column: Option<usize>,
        message: String,
    },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("{failed} of {reps} replications failed (more than 10%); first failure: {first}")]
    ScenarioFailed {
        failed: usize,
        reps: usize,
        first: String,
    },
}

fn location(row: Option<usize>, column: Option<usize>) -> String {
    match (row, column) {
        (Some(r), Some(c)) => format!(" at row {r}, column {c}"),
        (Some(r), None) => format!(" at row {r}"),
        (None, Some(c)) => format!(" at column {c}"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn data(row: Option<usize>, column: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Data {
            row,
            column,
            message: msg.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Contract(_) => 1,
            Error::Data { .. } | Error::Io(_) | Error::DegenerateResiduals(_) => 2,
            Error::Numerical { .. }
            | Error::Singular { .. }
            | Error::NoFeasibleModel { .. }
            | Error::ScenarioFailed { .. } => 3,
            Error::GridCell { source, .. } => source.exit_code(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
