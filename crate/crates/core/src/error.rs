use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("energy {energy} is a branch point of the closed form ({what})")]
    BranchPoint { energy: f64, what: &'static str },

    #[error("numeric range exceeded: {0}")]
    Range(String),

    #[error(
        "product overflowed between re-orthonormalizations at step {step} (qr_stride = {stride}); \
         use a smaller qr_stride"
    )]
    StrideTooLarge { stride: usize, step: u64 },

    #[error("seed {index} is not in sp2(R): residual {residual:e} exceeds {limit:e}")]
    InvalidSeed {
        index: usize,
        residual: f64,
        limit: f64,
    },

    #[error("energy {energy} outside the regime {regime}")]
    OutOfRegime { energy: f64, regime: &'static str },

    #[error("degenerate energy {energy}: normalization divisor {divisor:e} vanishes ({what})")]
    DegenerateEnergy {
        energy: f64,
        divisor: f64,
        what: &'static str,
    },

    #[error("invalid interval ({lo}, {hi}): {reason}")]
    InvalidInterval { lo: f64, hi: f64, reason: String },

    #[error("certificate {0} vanishes identically on the interval; its zeros cannot be isolated")]
    VanishingCertificate(&'static str),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status for this error: 3 configuration, 4 I/O, 5 numeric range.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. }
            | Error::Json(_)
            | Error::InvalidInput(_)
            | Error::InvalidInterval { .. } => 3,
            Error::Io { .. } => 4,
            Error::BranchPoint { .. }
            | Error::Range(_)
            | Error::StrideTooLarge { .. }
            | Error::InvalidSeed { .. }
            | Error::OutOfRegime { .. }
            | Error::DegenerateEnergy { .. }
            | Error::VanishingCertificate(_) => 5,
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
