use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("unknown finite-difference tableau `{0}`")]
    UnknownTableau(String),
    #[error("tableau `{0}` has no free parameter")]
    UnexpectedParameter(String),
    #[error("unsupported order {0}")]
    UnsupportedOrder(usize),
    #[error("unsupported quadrature size {0}")]
    UnsupportedQuadrature(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("non-physical state: {0}")]
    NonPhysicalState(String),
    #[error("degenerate reconstruction data (average equals an endpoint value)")]
    DegenerateData,
    #[error("average constraint is singular for this node set")]
    SingularAverageConstraint,
    #[error("singular constraint system")]
    SingularSystem,
    #[error("CFL condition violated: |c| t / dx = {0}")]
    CflExceeded(f64),
    #[error("all characteristic speeds vanish")]
    ZeroSpeed,
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("operation requires {0}")]
    UnsupportedModel(String),
    #[error("matrix of size {0} exceeds the supported maximum")]
    MatrixTooLarge(usize),
}

impl Error {
    pub fn is_non_physical(&self) -> bool {
        matches!(self, Error::NonPhysicalState(_))
    }
}
