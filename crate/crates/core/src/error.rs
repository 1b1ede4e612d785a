use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid system: {0}")]
    InvalidSpec(String),

    #[error("word {word} is not admissible: {reason}")]
    Inadmissible { word: String, reason: String },

    #[error("enumeration cap exceeded: more than {cap} words (reduce the depth)")]
    CapExceeded { cap: usize },

    #[error("assumption regime mismatch: {0}")]
    Regime(String),

    #[error("matrix is reducible: vertex {to} is not reachable from vertex {from}")]
    Reducible { from: usize, to: usize },

    #[error("power iteration did not converge after {iterations} iterations (last bounds {history:?})")]
    NonConvergence {
        iterations: usize,
        history: Vec<(f64, f64)>,
    },

    #[error("root bracket failure: {0}")]
    Bracket(String),

    #[error("anti-chain is not maximal: word {0} has no prefix in the set")]
    NotMaximal(String),

    #[error("missing geometry")]
    MissingGeometry,

    #[error("geometry violates separation: {0}")]
    Separation(String),

    #[error("unknown fixture {0:?}")]
    UnknownFixture(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Exit code contract of the command-line front end.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::NonConvergence { .. } | Error::Bracket(_) => 1,
            _ => 2,
        }
    }
}
