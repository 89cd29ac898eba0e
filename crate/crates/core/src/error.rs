// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use crate::model::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {}", join_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("observed spread below conventional prediction (excess variance {excess:e} rad^2)")]
    NegativeExcess { excess: f64 },

    #[error("quadrature did not converge: relative error estimate {estimate:e}")]
    Quadrature { estimate: f64 },

    #[error("density matrix lost positivity: smallest eigenvalue {min_eigenvalue:e} at t = {t:e} s")]
    Positivity { min_eigenvalue: f64, t: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Numerical failures map to a distinct CLI exit code.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NegativeExcess { .. }
                | Error::Quadrature { .. }
                | Error::Positivity { .. }
                | Error::Numerical(_)
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
