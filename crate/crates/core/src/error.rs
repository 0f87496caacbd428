//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Satellite and user positions are (nearly) coincident; line-of-sight
    /// geometry is undefined.
    #[error("degenerate geometry: satellite-user range {range_m:.3} m below 1 m")]
    DegenerateGeometry { range_m: f64 },

    /// A channel id that is not part of the scenario.
    #[error("unknown channel prn {prn}")]
    UnknownChannel { prn: u16 },

    /// Scenario or almanac configuration is invalid.
    #[error("config error: {0}")]
    Config(String),

    /// Config/almanac file parse failure with location context.
    #[error("parse error in {path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
