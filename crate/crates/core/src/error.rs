use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The inputs violate one or more model invariants.
    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidInput(Vec<String>),

    #[error("point {0} lies on a slit; use the bank evaluation instead")]
    OnSlit(String),

    #[error("singular solvability system (determinant {0:e})")]
    SingularSystem(f64),

    #[error("closed-form and general solvability constants disagree by {deviation:e} ({what})")]
    CrossCheck { what: &'static str, deviation: f64 },

    #[error("degenerate ellipse: delta = {0}")]
    DegenerateEllipse(String),

    #[error("non-finite value produced while {0}")]
    NonFinite(&'static str),

    #[error("config parse error at line {line}, column {column}: {message}")]
    Config {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("contour CSV error: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the error stems from user input rather than the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::OnSlit(_)
                | Error::DegenerateEllipse(_)
                | Error::Config { .. }
                | Error::Csv(_)
                | Error::Io(_)
        )
    }
}
