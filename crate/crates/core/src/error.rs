use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside the range an operation accepts.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A signal value the encoders cannot represent.
    #[error("domain error: {0}")]
    Domain(String),
    /// The signal is not suitable for the requested analysis.
    #[error("analysis error: {0}")]
    Analysis(String),
    /// A linear system could not be solved.
    #[error("solver error: {0}")]
    Solver(String),
    /// A network or neuron configuration cannot be built.
    #[error("configuration error: {0}")]
    Config(String),
    /// Energy per spike is undefined for fewer than one expected spike.
    #[error("undefined energy per spike: rate * time = {0} < 1")]
    UndefinedEnergy(f64),
    /// Malformed CSV or text input.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Argument(msg()))
    }
}
