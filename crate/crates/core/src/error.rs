use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singularity at t = {time}: {msg}")]
    Singularity { time: f64, msg: String },

    #[error("step size fell below {dt_min:e} at t = {time}")]
    Stiffness { time: f64, dt_min: f64 },

    #[error("config error{}: {msg}", at_line(*line))]
    /// `line` is 0 when the problem is not tied to one line.
    Config { line: usize, msg: String },

    #[error("malformed diagnostics input at row {row}: {msg}")]
    Parse { row: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

fn at_line(line: usize) -> String {
    if line > 0 {
        format!(" at line {line}")
    } else {
        String::new()
    }
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Failing simulation time, when the error carries one.
    pub fn time(&self) -> Option<f64> {
        match self {
            Error::Singularity { time, .. } | Error::Stiffness { time, .. } => Some(*time),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
