//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Every log-weight of an ensemble is `-inf`.
    #[error("all log-weights are -inf; the ensemble carries no information")]
    AllWeightsDegenerate,

    /// Two finite distributions do not live on the same atom set.
    #[error("distributions live on different atom sets")]
    MismatchedSupport,

    /// A tilt pushed all probability mass onto a single atom beyond
    /// what log-space arithmetic can resolve.
    #[error("tilt collapsed all mass onto a single atom beyond log-space range")]
    DegenerateTilt,

    /// A moment target lies outside the convex hull of the statistic values.
    #[error("moment target {target:?} is outside the convex hull of the statistic support")]
    InfeasibleMoment { target: Vec<f64> },

    /// The statistic covariance is rank-deficient (affinely dependent components).
    #[error("statistic covariance is rank-deficient; components are affinely dependent")]
    SingularHessian,

    #[error("{what} did not converge within {limit} iterations")]
    MaxIterations { what: &'static str, limit: usize },

    #[error("{what} = {value} outside domain {domain}")]
    DomainError {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// The Renyi profile is +inf on the whole requested order grid.
    #[error("Renyi profile has no finite value on the requested order grid")]
    ProfileIncomplete,

    /// The deviation-probability curve never crosses the requested level.
    #[error("deviation-probability grid does not bracket the level {level}")]
    GridTooNarrow { level: f64 },

    /// No candidate satisfies the entropy budget and admissibility constraints.
    #[error("no grid point satisfies the entropy budget and admissibility constraints")]
    EmptyFeasibleSet,

    /// A two-atom reference with a zero-probability atom.
    #[error("reference distribution has a zero-probability atom")]
    DegenerateReference,

    #[error("quadrature could not resolve the construction: {0}")]
    QuadratureFailure(String),

    /// Construction-time validation failure.
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
