use thiserror::Error;

/// Errors raised by the library. Variants carry enough context to attribute a
/// failure to the module and quantity that caused it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument {value} outside the domain of {what}: {detail}")]
    Domain {
        what: &'static str,
        value: f64,
        detail: &'static str,
    },

    #[error("pole of the Gamma function at z = {0}")]
    Pole(f64),

    #[error("coincident points in {0}")]
    Singular(&'static str),

    #[error("point ({x}, {y}) lies outside the domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("flux constraint infeasible: kappa/pi - eps^(2+2 gamma)/(2 pi) int g^2 = {0} <= 0")]
    InfeasibleFlux(f64),

    #[error("input has j = 1 content ({0:e}); the linearized operator is not onto span{{cos, sin}}")]
    NotInRange(f64),

    #[error("degenerate geometry in {term} of patch {patch}: {detail}")]
    Geometry {
        term: &'static str,
        patch: usize,
        detail: String,
    },

    #[error("singular Jacobian: {0}")]
    SingularJacobian(String),

    #[error("Newton did not converge: {0}")]
    NonConvergence(String),

    #[error("continuation constraint violated: {0}")]
    Constraint(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
