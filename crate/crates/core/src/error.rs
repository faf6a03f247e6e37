use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate register label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    NotNormalized(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),
    #[error("map is not completely positive (min Choi eigenvalue {0:.3e})")]
    NotCompletelyPositive(f64),
    #[error("matrix is not an isometry (defect {0:.3e})")]
    NotIsometry(f64),
    #[error("matrix is not unitary (defect {0:.3e})")]
    NotUnitary(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("encryption map is not decomposable: {0}")]
    NotDecomposable(String),
    #[error("incompatible attack: {0}")]
    IncompatibleAttack(String),
    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
