use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular state: |{what}| = {value:e} is below the guard {guard:e}")]
    SingularState {
        what: &'static str,
        value: f64,
        guard: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite values produced at t = {t}")]
    BlowUp { t: f64 },

    #[error("degenerate induced metric at point {point} (det g = {det:e})")]
    DegenerateMetric { point: usize, det: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
