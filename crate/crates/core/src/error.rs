use alloc::boxed::Box;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        op: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("reverse form requires a square point (k = d), got {d}x{k}")]
    ReverseFormNotSquare { d: usize, k: usize },
    #[error("matrix is not skew-symmetric (asymmetry {asymmetry:e})")]
    NotSkew { asymmetry: f64 },
    #[error("point is off the manifold (orthogonality error {error:e})")]
    NotOnManifold { error: f64 },
    #[error("special orthogonal point has determinant {det}")]
    WrongDeterminant { det: f64 },
    #[error("invalid index pair ({i}, {j}) for dimension {d}")]
    InvalidIndex { i: usize, j: usize, d: usize },
    #[error("closed-form 2x2 exponential needs d = 2 or a single 2x2 support")]
    ClosedFormUnsupported,
    #[error("matrix is rank deficient (pivot norm {pivot:e})")]
    RankDeficient { pivot: f64 },
    #[error("s must divide d (d = {d}, s = {s})")]
    BlockSizeMustDivide { d: usize, s: usize },
    #[error("block size must be at least 2 (s = {s})")]
    BlockSizeTooSmall { s: usize },
    #[error("enumeration of {count} partitions exceeds the cap of {cap}")]
    EnumerationTooLarge { count: u64, cap: u64 },
    #[error("h(Omega) is identically zero")]
    ZeroHMass,
    #[error("rejection sampler exceeded {max_trials} trials")]
    MaxTrialsExceeded { max_trials: u64 },
    #[error("tau violation: 2 h(G_T) = {required:e} exceeds tau = {tau:e} (matrix is not balanced enough)")]
    TauViolation { required: f64, tau: f64 },
    #[error("balance parameters must lie in (0, 1), got alpha = {alpha}, beta = {beta}")]
    InvalidBalance { alpha: f64, beta: f64 },
    #[error("weight function is not even, non-negative and zero at zero (failed at x = {x})")]
    InvalidWeightFunction { x: f64 },
    #[error("expected-nonzero count r = {r} outside 1..={n}")]
    SampleCountOutOfRange { r: usize, n: usize },
    #[error("matching family does not cover nonzero edge ({i}, {j})")]
    UncoveredEdge { i: usize, j: usize },
    #[error("family is not a set of edge-disjoint matchings: {reason}")]
    InvalidFamily { reason: &'static str },
    #[error("invalid permutation")]
    InvalidPermutation,
    #[error("step size must be positive and finite, got {eta}")]
    InvalidStepSize { eta: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("at iteration {iter}: {source}")]
    AtIteration { iter: usize, source: Box<Error> },
}
