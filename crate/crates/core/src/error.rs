use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("step size underflow near a singular point at z = {0}")]
    SingularityOnPath(String),
    #[error("integrator failed to meet tolerance: {0}")]
    ToleranceFailure(String),
    #[error("evaluation point within guard distance of a singularity: {0}")]
    NearSingularity(String),
    #[error("index out of range: {0}")]
    Index(String),
    #[error("not a singular point of the oper: {0}")]
    NotASingularity(String),
    #[error("sites collided or hit the origin (min gap {0:e})")]
    CollidedSites(f64),
    #[error("degenerate discriminant in the N=1 closed form")]
    DegenerateDiscriminant,
    #[error("resonant exponent: {0}")]
    Resonance(String),
    #[error("point outside the series convergence region: {0}")]
    OutOfConvergenceRegion(String),
    #[error("argument outside the object's domain: {0}")]
    OutOfDomain(String),
    #[error("ill-conditioned matching system (condition number {0:e})")]
    IllConditioned(f64),
    #[error("grid does not contain complete rotation triples")]
    InsufficientGrid,
    #[error("Q-function evaluation failed: {0}")]
    EvaluationFailure(String),
    #[error("Q_{0}(0) vanishes")]
    VanishingQAtZero(usize),
    #[error("i/o: {0}")]
    Io(String),
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
