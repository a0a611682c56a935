use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode index {index} out of range 1..={modes}")]
    ModeIndex { index: usize, modes: usize },

    #[error("actuator index {index} out of range 1..={count}")]
    ActuatorIndex { index: usize, count: usize },

    #[error("point {x} outside the domain [0, {length})")]
    OutsideDomain { x: f64, length: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid function has {got} values, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("spectrum not bracketed: growth rate of mode {modes} is {rate} >= 0")]
    SpectrumNotBracketed { modes: usize, rate: f64 },

    #[error("Gram matrix is singular or ill-conditioned (condition number {condition:e})")]
    SingularGram { condition: f64 },

    #[error("solver blew up at step {step} (t = {time})")]
    BlowUp { step: usize, time: f64 },

    #[error("too few positive samples for a decay fit ({0})")]
    TooFewSamples(usize),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("malformed manifest {path}: {message}")]
    Manifest { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
