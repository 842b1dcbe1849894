//! Weyl M-functions, solution operators and resolvents of the Hain-Lust
//! block operator, computed by complex shooting on [0, 1].

pub mod cli;
pub mod coeffexpr;
pub mod error;
pub mod hainlust;
pub mod linalg;
pub mod odecore;
pub mod poles;
pub mod speclimits;
pub mod triplet_verify;

pub use coeffexpr::CoefficientExpr;
pub use error::{Error, Result};
pub use hainlust::{FunctionPair, HainLustProblem, MMatrix, SolverSettings};
pub use linalg::{BoundaryVector, Mat2};
