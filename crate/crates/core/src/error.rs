use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("layer `{layer}` is {found_rows}x{found_cols}, expected {rows}x{cols}")]
    DimensionMismatch {
        layer: String,
        rows: usize,
        cols: usize,
        found_rows: usize,
        found_cols: usize,
    },

    #[error("unknown habitat code {code} at ({row}, {col})")]
    HabitatCode { code: i64, row: usize, col: usize },

    #[error("negative value {value} in layer `{layer}` at ({row}, {col})")]
    NegativeValue {
        layer: String,
        value: f64,
        row: usize,
        col: usize,
    },

    #[error("coral + turf = {sum} exceeds 1 at ({row}, {col})")]
    CoverOverflow { sum: f64, row: usize, col: usize },

    #[error("land cell ({row}, {col}) carries non-zero `{layer}`")]
    LandNotEmpty {
        layer: String,
        row: usize,
        col: usize,
    },

    #[error("no fishable cells")]
    NoFishableCells,

    #[error("invalid world: {0}")]
    InvalidWorld(String),

    #[error("cell ({row}, {col}) is not navigable")]
    NotNavigable { row: usize, col: usize },

    #[error("invalid island spec: {0}")]
    IslandSpec(String),

    #[error("calibration reference for {group} / {term} is {value}, must be > 0")]
    Calibration {
        group: String,
        term: String,
        value: f64,
    },

    #[error("invalid population: {0}")]
    Population(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("invalid parameter `{name}`: {msg}")]
    Parameter { name: String, msg: String },

    #[error("base and variant disturbance settings differ")]
    DisturbanceMismatch,

    #[error("results come from different grids")]
    GridMismatch,

    #[error("invariant violated at tick {tick}: {msg}")]
    Invariant { tick: u64, msg: String },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn param(name: &str, msg: impl Into<String>) -> Self {
        Error::Parameter {
            name: name.to_string(),
            msg: msg.into(),
        }
    }

    /// True for errors caused by bad inputs (files, flags, tables) rather
    /// than by a failure during the simulation itself.
    pub fn is_input(&self) -> bool {
        !matches!(self, Error::Invariant { .. })
    }
}
