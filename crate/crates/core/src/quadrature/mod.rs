//! Proper and improper integrals: adaptive quadrature, tail classification,
//! the nested Khasminskii integral and Feller's test function.

mod feller;
mod gk;
mod nested;
mod tail;

use thiserror::Error;

use crate::dsl::DslError;

pub use feller::{feller_classify, feller_v, FellerClassification};
pub use gk::{gauss7, gk15, integrate, integrate_tol, Quad, MAX_DEPTH};
pub use nested::{khasminskii_nested, CELLS_PER_OCTAVE};
pub use tail::{
    classify_tail, classify_windows, window, Direction, IntegralKind, IntegralVerdict, TailEvidence,
    TailOptions,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("evaluation failed at {x}: {error}")]
    Eval { x: f64, error: DslError },
    #[error("bisection depth limit reached (estimate {value}, error bound {error_bound})")]
    MaxDepthExceeded { value: f64, error_bound: f64 },
    #[error("invalid interval [{lo}, {hi}]")]
    BadInterval { lo: f64, hi: f64 },
    #[error("integrand changes sign (negative at {x})")]
    OscillationDetected { x: f64 },
    #[error("A is not positive at {x}")]
    NotPositive { x: f64 },
    #[error("sigma^2 vanishes at {x}")]
    SingularSigma { x: f64 },
}
