use dcm_core::scale::ConsistencyReport;

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: dcm_core::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    File { path: String, message: String },
    #[error("inconsistent judgments")]
    Inconsistent(ConsistencyReport),
}

impl GatewayError {
    pub fn core(context: impl Into<String>) -> impl FnOnce(dcm_core::Error) -> GatewayError {
        let context = context.into();
        move |source| GatewayError::Core { context, source }
    }
}

pub type Result<T, E = GatewayError> = std::result::Result<T, E>;
