//! Benchmark harness for the conic solvers: certified reference solutions,
//! multi-trial convergence experiments with CSV/SVG output, and log-log rate
//! fitting.

pub mod csv;
pub mod experiment;
pub mod ratefit;
pub mod reference;
pub mod svg;
pub mod synthetic;

use pipg::problem::KktResiduals;
use std::fmt;

#[derive(Debug)]
pub enum BenchError {
    Config(String),
    Io(String),
    Solver(String),
    /// The reference run exhausted its budget without certifying.
    CertificateUnmet {
        iterations: usize,
        residuals: KktResiduals,
    },
}

impl fmt::Display for BenchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchError::Config(msg) => write!(f, "configuration error: {msg}"),
            BenchError::Io(msg) => write!(f, "io error: {msg}"),
            BenchError::Solver(msg) => write!(f, "solver error: {msg}"),
            BenchError::CertificateUnmet {
                iterations,
                residuals,
            } => write!(
                f,
                "reference not certified after {iterations} iterations: fixed-point {:.3e}, \
                 feasibility {:.3e}, complementarity {:.3e}",
                residuals.fixed_point, residuals.feasibility, residuals.complementarity
            ),
        }
    }
}

impl std::error::Error for BenchError {}

impl From<std::io::Error> for BenchError {
    fn from(e: std::io::Error) -> Self {
        BenchError::Io(e.to_string())
    }
}
