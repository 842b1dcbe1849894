use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("exponent at byte {offset} must be an integer in [-9, 9]")]
    InvalidExponent { offset: usize },

    #[error("division by zero at x = {x}")]
    DivisionByZero { x: f64 },

    #[error("step() argument has imaginary part {imag:e} at x = {x}")]
    ComplexStepArgument { x: f64, imag: f64 },

    #[error("coefficient w^2/(lambda - u) is singular at x = {x} (lambda = {lambda})")]
    CoefficientSingularity { x: f64, lambda: Complex64 },

    #[error("step size underflow at x = {x} (h = {h:e})")]
    StepUnderflow { x: f64, h: f64 },

    #[error("quadrature panel budget of {panels} exhausted: partial value {partial}, error estimate {estimate:e}")]
    QuadratureBudget {
        partial: Complex64,
        estimate: f64,
        panels: usize,
    },

    #[error("lambda = {lambda} is too close to a pole: boundary determinant {det:e}, condition number {condition:e}")]
    NearPole {
        lambda: Complex64,
        det: Complex64,
        condition: f64,
    },

    #[error("lambda = {lambda} lies on the essential range of u")]
    EssentialSpectrum { lambda: Complex64 },

    #[error("search region meets the essential range of u where w does not vanish (near u = {value})")]
    EssentialCollision { value: f64 },

    #[error("w does not vanish near x = {x} where u(x) = k = {k}")]
    WGapViolation { x: f64, k: f64 },

    #[error("u is not real-valued at x = {x} (imaginary part {imag:e})")]
    ComplexCoefficient { x: f64, imag: f64 },

    #[error("u(x) = {k} has {count} solutions in [0, 1]; exactly one is required")]
    RootCount { k: f64, count: usize },

    #[error("u'(x0) vanishes at x0 = {x0}")]
    VanishingDerivative { x0: f64 },

    #[error("contour sampler failed at node {node}: {source}")]
    SamplerFailure {
        node: Complex64,
        #[source]
        source: Box<Error>,
    },

    #[error("contour integral did not converge with {nodes} nodes (last change {change:e})")]
    ContourNonConvergence { nodes: usize, change: f64 },

    #[error("function vanishes on the contour near {lambda}")]
    ZeroOnBoundary { lambda: Complex64 },

    #[error("rectangle subdivision depth exhausted near {lambda}")]
    SubdivisionDepth { lambda: Complex64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors that come from bad input rather than from the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. } | Error::UnknownIdentifier { .. } | Error::InvalidExponent { .. } | Error::Invalid(_)
        )
    }
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "syntax",
            Error::UnknownIdentifier { .. } => "unknown_identifier",
            Error::InvalidExponent { .. } => "invalid_exponent",
            Error::DivisionByZero { .. } => "division_by_zero",
            Error::ComplexStepArgument { .. } => "complex_step_argument",
            Error::CoefficientSingularity { .. } => "coefficient_singularity",
            Error::StepUnderflow { .. } => "step_underflow",
            Error::QuadratureBudget { .. } => "quadrature_budget",
            Error::NearPole { .. } => "near_pole",
            Error::EssentialSpectrum { .. } => "essential_spectrum",
            Error::EssentialCollision { .. } => "essential_collision",
            Error::WGapViolation { .. } => "w_gap_violation",
            Error::ComplexCoefficient { .. } => "complex_coefficient",
            Error::RootCount { .. } => "root_count",
            Error::VanishingDerivative { .. } => "vanishing_derivative",
            Error::SamplerFailure { .. } => "sampler_failure",
            Error::ContourNonConvergence { .. } => "contour_non_convergence",
            Error::ZeroOnBoundary { .. } => "zero_on_boundary",
            Error::SubdivisionDepth { .. } => "subdivision_depth",
            Error::Invalid(_) => "invalid",
        }
    }

    /// The module that raises this error.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Syntax { .. }
            | Error::UnknownIdentifier { .. }
            | Error::InvalidExponent { .. }
            | Error::DivisionByZero { .. }
            | Error::ComplexStepArgument { .. } => "coeffexpr",
            Error::CoefficientSingularity { .. } | Error::StepUnderflow { .. } | Error::QuadratureBudget { .. } => {
                "odecore"
            }
            Error::NearPole { .. } | Error::EssentialSpectrum { .. } => "hainlust",
            Error::EssentialCollision { .. }
            | Error::SamplerFailure { .. }
            | Error::ContourNonConvergence { .. }
            | Error::ZeroOnBoundary { .. }
            | Error::SubdivisionDepth { .. } => "poles",
            Error::WGapViolation { .. }
            | Error::ComplexCoefficient { .. }
            | Error::RootCount { .. }
            | Error::VanishingDerivative { .. } => "speclimits",
            Error::Invalid(_) => "cli",
        }
    }
}
