use nqdelta_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read spec: {0}")]
    Io(String),
    #[error("malformed spec JSON: {0}")]
    Json(String),
    #[error("invalid weights: {0}")]
    Weights(String),
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error("unsupported class: {0}")]
    Unsupported(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("matrix is not in the class: {0}")]
    NotMember(String),
    #[error("evaluation failed: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Json(_) => 3,
            CliError::Weights(_) => 4,
            CliError::Spec(_) => 5,
            CliError::Unsupported(_) => 6,
            CliError::Singular(_) => 7,
            CliError::NotMember(_) => 8,
            CliError::Numeric(_) => 9,
        }
    }

    pub fn missing(field: &str, command: &str) -> Self {
        CliError::Spec(format!("`{field}` is required for `{command}`"))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::NonPositiveWeight { .. } | Error::InvalidWeights(_) => CliError::Weights(msg),
            Error::UnsupportedClass { .. } => CliError::Unsupported(msg),
            Error::SingularTriangle { .. } => CliError::Singular(msg),
            Error::NotMember { .. } => CliError::NotMember(msg),
            Error::NotTriangular(_)
            | Error::ParseRational(_)
            | Error::InvalidPolicy(_)
            | Error::InvalidSequence(_) => CliError::Spec(msg),
            Error::ModeMismatch { .. } | Error::DivisionByZero | Error::RowSumDivergence { .. } => {
                CliError::Numeric(msg)
            }
        }
    }
}
