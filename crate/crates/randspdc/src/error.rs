use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("frequency {omega_rad_per_fs} rad/fs outside supported band of {material} ({lambda_min_um}..{lambda_max_um} um)")]
    OutOfBand {
        material: String,
        omega_rad_per_fs: f64,
        lambda_min_um: f64,
        lambda_max_um: f64,
    },

    #[error("unknown material id {0:?}")]
    UnknownMaterial(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("evanescent ambient wave: external angle {theta_rad} rad is not propagating")]
    EvanescentInput { theta_rad: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("incompatible ensemble reports: {0}")]
    IncompatibleReports(String),

    #[error("transmission peak lost at signal angle {theta_rad} rad")]
    PeakLost { theta_rad: f64 },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn json(path: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }

    /// Exit code the CLI maps this error to: 2 for validation problems,
    /// 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) | Error::PeakLost { .. } => 3,
            _ => 2,
        }
    }
}
