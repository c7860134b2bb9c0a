use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("register name `{0}` used twice")]
    NameCollision(String),
    #[error("register `{0}` must hold at least one qubit")]
    EmptyRegister(String),
    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cut must be a nonempty proper subset of the registers")]
    TrivialCut,
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("qubit {index} outside a {qubits}-qubit layout")]
    QubitOutOfRange { index: usize, qubits: usize },
    #[error("budget exceeded: {what} needs {needed}, limit is {limit}")]
    BudgetExceeded { what: &'static str, needed: usize, limit: usize },
    #[error("measurement outcome has probability {0:.3e}")]
    ZeroProbability(f64),
    #[error("eigensolver did not converge (residual {residual:.3e})")]
    NonConvergence { residual: f64 },
    #[error("partition function overflows f64; ln Z = {log_z}")]
    Overflow { log_z: f64 },
    #[error("promise violated: {0}")]
    PromiseViolation(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no state has energy at most {cutoff}")]
    EmptyLowEnergySpace { cutoff: f64 },
    #[error("no idle length up to {limit} works; the parameter equations need L >= {required}")]
    InfeasibleIdle { required: usize, limit: usize },
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
