use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by constructors and operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Grid dimension outside {1, 2}.
    InvalidDimension(usize),
    /// Fewer than three nodes along an axis.
    TooFewNodes(usize),
    /// Nonpositive or non-finite physical extent.
    InvalidExtent(f64),
    /// Value count does not match the grid node/face count.
    LengthMismatch { expected: usize, got: usize },
    /// A field value is NaN or infinite.
    NonFinite { index: usize },
    /// Two objects that must share a grid do not.
    GridMismatch,
    /// Invalid scalar parameter (tolerance, regularization, structure constant, ...).
    BadParameter(&'static str),
    /// Exponent field violates 0 < p at construction.
    ExponentOutOfRange { value: f64, index: usize },
    /// Derived-exponent algebra needs ess sup p < ambient dimension.
    ExponentAboveDimension { p_max: f64, ambient: usize },
    /// Obstacle is positive on a boundary node, so the constraint set is inadmissible.
    ObstaclePositiveOnBoundary { node: usize, value: f64 },
    /// A Gauss-Seidel sweep produced a non-finite value.
    SolverNan { iteration: usize, node: usize },
    /// A driver that needs a converged solve saw the iteration budget expire.
    NotConverged { level: usize, residual: f64 },
    /// A test function is not admissible (below the obstacle or nonzero on the boundary).
    InadmissibleTestFunction { index: usize, node: usize },
    /// Paired problems must share grid, obstacle and flux specification.
    MismatchedProblems(&'static str),
    /// Declared non-degeneracy bound f - A psi <= -lambda fails at a node.
    NondegeneracyViolated { node: usize, value: f64 },
    /// |A psi - f| < eta somewhere, so the coincidence-set convergence
    /// hypotheses are unmet.
    DegenerateNodes { count: usize, first: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDimension(d) => write!(f, "grid dimension must be 1 or 2, got {d}"),
            Error::TooFewNodes(n) => write!(f, "need at least 3 nodes per axis, got {n}"),
            Error::InvalidExtent(e) => write!(f, "extent must be positive and finite, got {e}"),
            Error::LengthMismatch { expected, got } => {
                write!(f, "value count {got} does not match expected {expected}")
            }
            Error::NonFinite { index } => write!(f, "non-finite value at index {index}"),
            Error::GridMismatch => write!(f, "operands are bound to different grids"),
            Error::BadParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::ExponentOutOfRange { value, index } => {
                write!(f, "exponent {value} at node {index} violates 0 < p")
            }
            Error::ExponentAboveDimension { p_max, ambient } => {
                write!(f, "ess sup p = {p_max} must be below the ambient dimension {ambient}")
            }
            Error::ObstaclePositiveOnBoundary { node, value } => {
                write!(f, "obstacle is {value} > 0 on boundary node {node}")
            }
            Error::SolverNan { iteration, node } => {
                write!(f, "solver produced NaN at iteration {iteration}, node {node}")
            }
            Error::NotConverged { level, residual } => {
                write!(f, "solve at level {level} stopped with residual {residual}")
            }
            Error::InadmissibleTestFunction { index, node } => {
                write!(f, "test function {index} inadmissible at node {node}")
            }
            Error::MismatchedProblems(what) => write!(f, "paired problems differ: {what}"),
            Error::NondegeneracyViolated { node, value } => {
                write!(f, "f - A psi = {value} violates the declared bound at node {node}")
            }
            Error::DegenerateNodes { count, first } => {
                write!(f, "|A psi - f| below eta at {count} nodes (first: {first})")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
