use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index out of range: {index} (n = {n})")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("singular configuration: {0}")]
    SingularConfiguration(String),

    #[error("integration failure at t = {t}: step {step:e} below minimum (min gap {min_gap:e}, accepted {accepted}, rejected {rejected})")]
    StepUnderflow {
        t: f64,
        step: f64,
        min_gap: f64,
        accepted: usize,
        rejected: usize,
    },

    #[error("domain error near z = {re} + {im}i: {reason}")]
    Domain { re: f64, im: f64, reason: String },

    #[error("experiment failed at N = {n}, t = {t}, replica = {replica}: {source}")]
    Experiment {
        n: usize,
        t: f64,
        replica: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(z: num_complex::Complex64, reason: impl Into<String>) -> Self {
        Error::Domain {
            re: z.re,
            im: z.im,
            reason: reason.into(),
        }
    }
}
