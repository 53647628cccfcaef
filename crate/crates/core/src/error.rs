use thiserror::Error;

/// Every failure a library operation can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("polynomial {0:#x} is not irreducible over GF(2)")]
    NotIrreducible(u64),
    #[error("unsupported field parameters: {0}")]
    BadField(String),
    #[error("division by zero")]
    DivideByZero,
    #[error("subset of size {size} requested from a field of size {field}")]
    SubsetTooLarge { size: u64, field: u64 },
    #[error("expected {expected} coordinates, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("table is missing entries ({got} of {expected})")]
    IncompleteTable { expected: usize, got: usize },
    #[error("dense size {0} exceeds the representation budget")]
    BudgetExceeded(u128),
    #[error("constraints are inconsistent")]
    InconsistentConstraints,
    #[error("polynomial is not multilinear")]
    NotMultilinear,
    #[error("set is not a subgroup")]
    NotSubgroup,
    #[error("individual degree {degree} is not below |H| = {size}")]
    DegreeTooHigh { degree: usize, size: usize },
    #[error("field of size {field} is too small (need more than {need})")]
    FieldTooSmall { field: u64, need: u64 },
    #[error("no majority among self-correction votes")]
    NoMajority,
    #[error("oracle query budget exhausted after {0} queries")]
    BudgetExhausted(usize),
    #[error("sumcheck round {round} check failed")]
    RoundCheckFailed { round: usize },
    #[error("round message has degree above {bound}")]
    DegreeViolation { bound: usize },
    #[error("low-degree test rejected oracle {0}")]
    LowDegreeTestFailed(String),
    #[error("prover aborted: challenge outside the permitted set")]
    ProverAborted,
    #[error("verifier exceeded the simulator's query budget")]
    QueryBudgetExceeded,
    #[error("degree {got} below the required {need}")]
    DegreeTooLow { got: usize, need: usize },
    #[error("degree bounds do not match: {0}")]
    DegreeMismatch(String),
    #[error("leaf check failed at vertex {0}")]
    LeafCheckFailed(usize),
    #[error("vertex check failed at vertex {0}")]
    VertexCheckFailed(usize),
    #[error("curve check failed at vertex {0}")]
    CurveCheckFailed(usize),
    #[error("missing input for leaf {0}")]
    MissingLeaf(usize),
    #[error("wiring extension disagrees with the gate list: {0}")]
    WiringMismatch(String),
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("duplicate oracle label {0}")]
    DuplicateLabel(String),
    #[error("unknown oracle label {0}")]
    UnknownLabel(String),
    #[error("malformed document: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
