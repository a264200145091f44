use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("expected {expected} parameters, got {actual}")]
    ParameterCount { expected: usize, actual: usize },

    #[error("qubit count {0} outside supported range 1..=12")]
    QubitCount(usize),

    #[error("qubit index {qubit} out of range for {num_qubits}-qubit circuit")]
    QubitIndex { qubit: usize, num_qubits: usize },

    #[error("pauli string has length {actual}, circuit has {expected} qubits")]
    PauliLength { expected: usize, actual: usize },

    #[error("parameter index {index} out of range (num_params = {num_params})")]
    ParameterIndex { index: usize, num_params: usize },

    #[error("basis-change circuit must have zero parameters, found {0}")]
    ParameterizedBasisChange(usize),

    #[error("diagonal has {actual} entries, expected {expected}")]
    DiagonalLength { expected: usize, actual: usize },

    #[error("diagonal term has zero norm")]
    ZeroTerm,

    #[error("observable has no terms")]
    EmptyObservable,

    #[error("observable acts on {observable} qubits, circuit on {circuit}")]
    DimensionMismatch { circuit: usize, observable: usize },

    #[error("invalid pauli character {0:?}")]
    InvalidPauli(char),

    #[error("no basis change available for {0:?} measurements")]
    UnsupportedBasis(char),

    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("{name} must lie in [0, 1], got {value}")]
    WeightOutOfRange { name: &'static str, value: f64 },

    #[error("term {term}: expected {expected} samples, got {actual}")]
    SampleCount { term: usize, expected: u64, actual: usize },

    #[error("term {0} has no shots; a sample mean needs at least one")]
    NoShots(usize),

    #[error("expected {expected} terms, got {actual}")]
    TermCount { expected: usize, actual: usize },

    #[error("fresh estimate required when mixing weight is below 1")]
    MissingFresh,

    #[error("recursive state used before initialization")]
    Uninitialized,

    #[error("shot count does not fit in 64 bits")]
    ShotOverflow,

    #[error("graph vertex {vertex} out of range for {num_vertices} vertices")]
    VertexRange { vertex: usize, num_vertices: usize },

    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),

    #[error("brute force limited to 20 vertices, got {0}")]
    TooManyVertices(usize),

    #[error("QAOA depth must be at least 1")]
    ZeroDepth,

    #[error("invalid configuration: {0}")]
    Config(String),
}
