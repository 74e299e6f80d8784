use std::fmt;

/// Analyticity conditions a transform may satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Condition {
    Annulus,
    Sinh1,
    Sinh2,
    Sinh3,
    Log,
    WhfSinh3,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::Annulus => "annulus of analyticity",
            Condition::Sinh1 => "Z-SINH1",
            Condition::Sinh2 => "Z-SINH2",
            Condition::Sinh3 => "Z-SINH3",
            Condition::Log => "Z-LOG",
            Condition::WhfSinh3 => "WHF-SINH3",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("condition {condition} fails: {detail}")]
    Condition { condition: Condition, detail: String },
    #[error("invalid parameter `{name}`: {detail}")]
    InvalidParameter { name: &'static str, detail: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("branch winding: {0}")]
    Winding(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidParameter { name, detail: detail.into() }
    }

    pub(crate) fn condition(condition: Condition, detail: impl Into<String>) -> Self {
        Error::Condition { condition, detail: detail.into() }
    }

    /// Process exit code: 2 for configuration or domain problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Overflow(_) | Error::Winding(_) | Error::NonConvergence(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
