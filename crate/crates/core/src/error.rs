use thiserror::Error;

/// Errors from the key-agreement layer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PakeError {
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error("invalid group parameters: {0}")]
    InvalidGroup(String),
    #[error("invalid group element")]
    InvalidElement,
    /// The exchange hit a zero exponent (zero denominator or numerator);
    /// the key exchange has to restart with fresh randomness.
    #[error("degenerate key exchange")]
    DegenerateExchange,
    #[error("password must not be empty")]
    EmptyPassword,
}

/// Errors from parsing or serializing protocol headers and values.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("empty header")]
    Empty,
    #[error("header is not valid UTF-8")]
    NotUtf8,
    #[error("unknown authentication scheme `{0}`")]
    UnknownScheme(String),
    #[error("unknown header `{0}`")]
    UnknownHeader(String),
    #[error("missing parameter(s): {}", .0.join(", "))]
    MissingParameter(Vec<String>),
    #[error("duplicate parameter `{0}`")]
    DuplicateParameter(String),
    #[error("malformed parameter list at offset {0}")]
    MalformedSyntax(usize),
    #[error("malformed quoted string at offset {0}")]
    MalformedQuoting(usize),
    #[error("malformed base64 in `{0}`")]
    MalformedBase64(String),
    #[error("unsupported protocol version `{0}`")]
    VersionMismatch(String),
    #[error("invalid value for `{param}`: {reason}")]
    InvalidValue { param: String, reason: String },
    #[error("wrong octet length: expected {expected}, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("value is not below the group modulus")]
    OutOfRange,
}

impl WireError {
    /// Stable machine-readable code for the error variant.
    pub fn code(&self) -> &'static str {
        match self {
            WireError::Empty => "empty",
            WireError::NotUtf8 => "not-utf8",
            WireError::UnknownScheme(_) => "unknown-scheme",
            WireError::UnknownHeader(_) => "unknown-header",
            WireError::MissingParameter(_) => "missing-parameter",
            WireError::DuplicateParameter(_) => "duplicate-parameter",
            WireError::MalformedSyntax(_) => "malformed-syntax",
            WireError::MalformedQuoting(_) => "malformed-quoting",
            WireError::MalformedBase64(_) => "malformed-base64",
            WireError::VersionMismatch(_) => "version-mismatch",
            WireError::InvalidValue { .. } => "invalid-value",
            WireError::WrongLength { .. } => "wrong-length",
            WireError::OutOfRange => "out-of-range",
        }
    }

    pub(crate) fn invalid(param: &str, reason: impl Into<String>) -> Self {
        WireError::InvalidValue {
            param: param.to_owned(),
            reason: reason.into(),
        }
    }
}

/// Errors computing the host verification element.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("tls-cert validation needs a certificate digest")]
    MissingCertificateDigest,
    #[error("validation method `{0}` is not supported")]
    Unsupported(String),
}
