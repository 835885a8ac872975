use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("transform `{0}` is already registered")]
    DuplicateName(String),

    #[error("transform `{name}` produced a non-finite value at probe input {input:e}")]
    NonFiniteTransform { name: String, input: f64 },

    #[error("unknown transform `{0}`")]
    UnknownTransform(String),

    #[error("unsupported parameter prior `{0}`")]
    UnsupportedPrior(String),

    #[error("feature parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("no eligible parent feature (all inclusion probabilities below threshold and pool empty)")]
    NoEligibleParent,

    #[error("gave up generating a new feature after {0} rejected attempts")]
    GenerationExhausted(usize),

    #[error("response has zero variance")]
    ZeroVarianceResponse,

    #[error("quadrature failed to converge (estimated relative error {0:.3e})")]
    QuadratureNotConverged(f64),

    #[error("initial feature population is empty")]
    EmptyInitialPopulation,

    #[error("all {0} runs failed")]
    AllRunsFailed(usize),

    #[error("prediction data is missing covariate `{0}`")]
    MissingCovariate(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}
