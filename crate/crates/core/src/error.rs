use std::path::PathBuf;

use crate::scenario::ScenarioId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Inputs outside the admissible domain (bad k, beta, grid, shapes...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Bisection bracket without a sign change.
    #[error(
        "bracket failure for {equation}: f({lo:.6e}) has sign {sign_lo}, \
         f({hi:.6e}) has sign {sign_hi}"
    )]
    Bracket {
        equation: &'static str,
        lo: f64,
        hi: f64,
        sign_lo: i8,
        sign_hi: i8,
    },

    #[error("at complexity k = {k}: {source}")]
    AtComplexity { k: usize, source: Box<Error> },

    #[error("solver failed on sublist {sublist:?}: {source}")]
    SublistSolve {
        sublist: Vec<ScenarioId>,
        source: Box<Error>,
    },

    #[error("predicate failed on scenario {scenario}: {source}")]
    Predicate {
        scenario: ScenarioId,
        source: Box<Error>,
    },

    #[error("stage `{stage}`: {source}")]
    Stage {
        stage: &'static str,
        source: Box<Error>,
    },

    #[error("schema violation in {path}: at `{field}`: {message}")]
    Schema {
        path: PathBuf,
        field: String,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Strips stage/context wrappers and reports whether the root cause is a
    /// configuration problem (bad input) rather than a numerical failure.
    pub fn is_configuration(&self) -> bool {
        match self {
            Error::Domain(_) | Error::Schema { .. } | Error::Io { .. } | Error::Json(_) => true,
            Error::Numerical(_) | Error::Bracket { .. } => false,
            Error::AtComplexity { source, .. }
            | Error::SublistSolve { source, .. }
            | Error::Predicate { source, .. }
            | Error::Stage { source, .. } => source.is_configuration(),
        }
    }
}
