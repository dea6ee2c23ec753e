use std::path::PathBuf;

/// Every failure the library can report.
#[derive(Debug, thiserror::Error)]
pub enum CmabError {
    /// An action or vector does not fit the arm set it is used with.
    #[error("structural error: {0}")]
    Structural(String),

    /// A caller-side precondition was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// No feasible action exists (e.g. the target is unreachable).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Enumeration would exceed the configured cap.
    #[error("capacity exceeded: {what} has more than {cap} elements")]
    Capacity { what: String, cap: usize },

    /// The requested operation is not supported for this input kind.
    #[error("unsupported: {0}")]
    Capability(String),

    /// A value fell outside the domain an operation accepts.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not positive semi-definite (pivot {pivot} at row {row})")]
    NotPsd { row: usize, pivot: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A policy failed; carries the policy label.
    #[error("policy `{policy}`: {source}")]
    Policy {
        policy: String,
        #[source]
        source: Box<CmabError>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CmabError {
    /// Short machine-readable tag for the error family.
    pub fn kind(&self) -> &'static str {
        match self {
            CmabError::Structural(_) => "structural",
            CmabError::Precondition(_) => "precondition",
            CmabError::Infeasible(_) => "infeasible",
            CmabError::Capacity { .. } => "capacity",
            CmabError::Capability(_) => "capability",
            CmabError::Domain(_) => "domain",
            CmabError::NotPsd { .. } => "not_psd",
            CmabError::Config(_) => "config",
            CmabError::Policy { source, .. } => source.kind(),
            CmabError::Io { .. } => "io",
        }
    }

    pub(crate) fn in_policy(self, policy: &str) -> Self {
        CmabError::Policy {
            policy: policy.to_string(),
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = CmabError> = std::result::Result<T, E>;
