use thiserror::Error;

/// Every failure the engine can report. Variants are grouped by the layer
/// that raises them; all of them are caller errors (bad shapes, bad
/// subscripts, bad configs) rather than internal faults.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // --- tensor construction -------------------------------------------
    #[error("shape has a zero extent at axis {axis}")]
    ZeroExtent { axis: usize },
    #[error("index matrix has {got} columns but shape has rank {expected}")]
    RankMismatch { expected: usize, got: usize },
    #[error("data has {data} entries but index matrix has {rows} rows")]
    DataLengthMismatch { rows: usize, data: usize },
    #[error("index {index} at row {row}, axis {axis} is out of bounds for extent {extent}")]
    IndexOutOfBounds {
        row: usize,
        axis: usize,
        index: usize,
        extent: usize,
    },
    #[error("flat index buffer of length {len} is not a multiple of row width {ncols}")]
    RaggedIndices { len: usize, ncols: usize },
    #[error("dense buffer has {got} values, shape requires {expected}")]
    DenseLengthMismatch { expected: usize, got: usize },
    #[error("element count of shape {shape:?} overflows the index type")]
    SizeOverflow { shape: Vec<usize> },
    #[error("operation requires a canonical (sorted, duplicate-free) tensor")]
    NotCanonical,
    #[error("{0:?} is not a permutation of the axes")]
    InvalidPermutation(Vec<usize>),
    #[error("axis groups {0:?} do not partition the tensor's axes")]
    InvalidGrouping(Vec<Vec<usize>>),
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },

    // --- ordering ------------------------------------------------------
    #[error("tuples of different lengths ({left} vs {right}) cannot be compared")]
    TupleLengthMismatch { left: usize, right: usize },
    #[error("tuple entry {value} at position {position} is outside radix {radix}")]
    DigitOutOfRange {
        position: usize,
        value: usize,
        radix: usize,
    },
    #[error("invalid domain boundaries {boundaries:?} for {len} rows")]
    InvalidDomains { boundaries: Vec<usize>, len: usize },
    #[error("rows are not in sorted order at position {0}")]
    NotSorted(usize),

    // --- subscripts and plans -----------------------------------------
    #[error("malformed subscripts {0:?}: expected `<letters>,<letters>-><letters>`")]
    MalformedSubscripts(String),
    #[error("label '{0}' repeated within one operand")]
    RepeatedLabel(char),
    #[error("label '{0}' repeated in the output")]
    RepeatedOutputLabel(char),
    #[error("output label '{0}' does not appear in either operand")]
    OrphanOutputLabel(char),
    #[error("label '{0}' appears in both operands and the output (batch axes are unsupported)")]
    BatchLabel(char),
    #[error("label '{label}' has extent {left} in one place and {right} in another")]
    ExtentMismatch { label: char, left: usize, right: usize },
    #[error("operand has rank {got} but its subscript has {expected} labels")]
    OperandRankMismatch { expected: usize, got: usize },
    #[error("chain step {step}: left operand labels {expected:?} do not match the running result {got:?}")]
    ChainMismatch { step: usize, expected: String, got: String },
    #[error("contraction path needs {expected} operands for {specs} specs, got {got}")]
    PathArity { specs: usize, expected: usize, got: usize },

    // --- oracle / generator / experiments -------------------------------
    #[error("dense oracle refuses a label space of {size} elements (limit {limit})")]
    OracleTooLarge { size: u128, limit: u128 },
    #[error("cannot place {nnz} nonzeros in a dense space of {size} elements")]
    TooManyNonzeros { nnz: usize, size: usize },
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error("need at least {needed} usable points for a slope fit, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("sparse result deviates from the dense oracle by {diff:e} at sparsity {sparsity}")]
    OracleMismatch { sparsity: f64, diff: f64 },

    // --- text format -----------------------------------------------------
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
