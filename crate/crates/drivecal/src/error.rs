use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid vehicle parameters: {0}")]
    InvalidParams(String),

    #[error("non-finite state at t = {t:.6} s")]
    NonFiniteState { t: f64 },

    #[error("chassis mass matrix is singular or ill-conditioned at t = {t:.6} s (residual {residual:.3e})")]
    SingularMassMatrix { t: f64, residual: f64 },

    #[error("control schedule is empty")]
    EmptySchedule,

    #[error("keyframe times must be strictly increasing (keyframe {index})")]
    NonIncreasingKeyframes { index: usize },

    #[error("control value out of range at keyframe {index}: {channel} = {value}")]
    ControlOutOfRange {
        index: usize,
        channel: &'static str,
        value: f64,
    },

    #[error("time series has no channels")]
    EmptyChannels,

    #[error("channel '{channel}' has {len} values, expected {expected}")]
    ChannelLengthMismatch {
        channel: String,
        len: usize,
        expected: usize,
    },

    #[error("time axis is not strictly increasing and uniform (sample {index})")]
    NonUniformTime { index: usize },

    #[error("sample interval {sample_dt} is not an integer multiple of the step size {dt}")]
    SampleInterval { dt: f64, sample_dt: f64 },

    #[error("unknown channel '{name}'; available channels: {available}")]
    UnknownChannel { name: String, available: String },

    #[error("{path}:{line}: {message}")]
    CsvParse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("data time {t:.9} s is not on the model grid")]
    TimestampMismatch { t: f64 },

    #[error("parameter vector has {got} entries, expected {expected}: [{names}]")]
    ParamCountMismatch {
        got: usize,
        expected: usize,
        names: String,
    },

    #[error("unknown parameter '{0}'")]
    UnknownParam(String),

    #[error("prior for '{name}' is invalid: {message}")]
    InvalidPrior { name: String, message: String },

    #[error("all particles have zero likelihood; widen the priors or check the stage data and warm-start state")]
    AllParticlesDiverged,

    #[error("stage '{stage}' (needed to fix parameter '{param}') has no upstream result")]
    MissingUpstream { stage: String, param: String },

    #[error("not enough samples: got {got}, need at least {required}")]
    NotEnoughSamples { got: usize, required: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("chain file error: {0}")]
    ChainFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
