use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PermixError {
    #[error("n = {n} exceeds the enumeration cap of {cap} for {group}")]
    SizeCap {
        n: usize,
        cap: usize,
        group: &'static str,
    },

    #[error("not a permutation: {0}")]
    InvalidPermutation(String),

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("function takes a negative value ({value}) at index {index}")]
    NegativeValue { index: usize, value: f64 },

    #[error("function has zero integral")]
    ZeroMass,

    #[error("value out of range: {0}")]
    ValueRange(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("compute budget exceeded: {required} pair evaluations requested, budget is {budget}; use the Monte Carlo estimator instead")]
    Budget { required: u128, budget: u128 },

    #[error("rejection sampler gave up: acceptance rate below {min_rate:e}")]
    RejectionRate { min_rate: f64 },
}

pub type Result<T> = std::result::Result<T, PermixError>;
