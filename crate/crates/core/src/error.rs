use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point ({x_n_excess:+e} above the boundary) lies outside the closed slice")]
    OutsideSlice { x_n_excess: f64 },

    #[error("point is not a differentiability point of the flow (on the axis x' = 0 or on a kink of f)")]
    NonSmoothPoint,

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("squared Jacobian {value:e} is not positive at a quadrature node (t = {t:e})")]
    DegenerateJacobian { value: f64, t: f64 },

    #[error(
        "boundary trace integral diverges: n = 2 and f(0) = {vertex_value} with no cutoff"
    )]
    DivergentBoundaryIntegral { vertex_value: f64 },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("dimension n = {n} is outside the supported range for {what}")]
    UnsupportedDimension { n: usize, what: &'static str },
}
