use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("requested {requested} digits but the stored Euler-Mascheroni literal carries only {available}")]
    PrecisionExceedsLiteral { requested: u32, available: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} = {value} is outside the supported range {range}")]
    OutOfRange {
        what: &'static str,
        value: String,
        range: String,
    },

    #[error("estimated table memory of {estimated} bytes exceeds the cap of {cap} bytes")]
    ResourceCap { estimated: u64, cap: u64 },

    #[error("quadrature budget exhausted: {0}")]
    BudgetExceeded(String),

    #[error("unsupported artifact format version {found} (supported: {supported})")]
    VersionMismatch { found: u32, supported: u32 },

    #[error("corrupt artifact: {0}")]
    CorruptPayload(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed artifact: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn out_of_range(
        what: &'static str,
        value: impl ToString,
        range: impl Into<String>,
    ) -> Self {
        Error::OutOfRange {
            what,
            value: value.to_string(),
            range: range.into(),
        }
    }
}
