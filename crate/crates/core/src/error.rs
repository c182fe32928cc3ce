use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("aliasing: sample rate {sample_rate} Hz cannot carry {frequency} Hz")]
    Aliasing { sample_rate: u32, frequency: f64 },

    #[error("time went backwards: {now} s after {last} s")]
    TimeRegression { now: f64, last: f64 },

    #[error("rank deficient design matrix for {0} model")]
    Rank(&'static str),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{activity}: score {score} not in allowed set {allowed:?}")]
    InvalidScore {
        activity: &'static str,
        score: u32,
        allowed: &'static [u32],
    },

    #[error("assessment structure: {0}")]
    Structure(String),

    #[error("missing sessions: {0:?}")]
    MissingSessions(Vec<u32>),

    #[error("{0}")]
    Insufficient(String),

    #[error("frame error: {0}")]
    Frame(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
