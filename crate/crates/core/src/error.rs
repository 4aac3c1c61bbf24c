use thiserror::Error;

use crate::fan::ValidationReport;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("row {row} has {found} entries, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("solution space is not a single point (rank {rank} < {unknowns} unknowns)")]
    NonUnique { rank: usize, unknowns: usize },
}

#[derive(Debug, Clone, Error)]
pub enum FanError {
    #[error("fan '{name}' failed validation: {report}")]
    Invalid { name: String, report: Box<ValidationReport> },
    #[error("cone index {index} out of range ({count} maximal cones)")]
    NoSuchCone { index: usize, count: usize },
    #[error("divisor has {found} coefficients but the fan has {expected} rays")]
    WrongDivisorLength { expected: usize, found: usize },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Debug, Clone, Error)]
pub enum CohomologyError {
    #[error("non-finite cohomology: fan not complete or invariant violated (sign pattern {pattern:?})")]
    NonFinite { pattern: Vec<usize> },
    #[error("representation is not in the stated class")]
    NotARepresentation,
    #[error("fiber bundle L must be non-effective and acyclic, found h = {dims:?}")]
    FiberHypothesis { dims: Vec<u64> },
    #[error(transparent)]
    Fan(#[from] FanError),
}

#[derive(Debug, Clone, Error)]
pub enum FibrationError {
    #[error("twist matrix is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    TwistShape {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("assembled total fan is invalid: {0}")]
    InvalidTotal(FanError),
    #[error("fiber rays do not span a proper nonzero subspace (rank {rank} of {ambient})")]
    DegenerateSubspace { rank: usize, ambient: usize },
    #[error("ray {ray} lies in the fiber subspace but was not listed as a fiber ray")]
    UnlistedFiberRay { ray: usize },
    #[error("maximal cone {cone} does not split as fiber cone + transversal cone")]
    Decomposition { cone: usize },
    #[error("cones inside the fiber subspace do not form a valid fan: {0}")]
    InvalidFiber(FanError),
    #[error("projected cones do not form a valid base fan: {0}")]
    InvalidBase(String),
    #[error("cone count {total} is not {fiber} x {base}")]
    ConeCount { total: usize, fiber: usize, base: usize },
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Debug, Clone, Error)]
pub enum CollectionError {
    #[error("a collection needs at least one line bundle")]
    Empty,
    #[error("classes {first} and {second} of the collection coincide")]
    Duplicate { first: usize, second: usize },
    #[error("input collection on the {which} is not strongly exceptional")]
    InputNotStronglyExceptional { which: &'static str },
    #[error("no t in 1..={cap} produced a strongly exceptional collection")]
    CapExhausted {
        cap: u32,
        best: Box<crate::collections::ConstructionAttempt>,
    },
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
    #[error(transparent)]
    Fan(#[from] FanError),
}

#[derive(Debug, Clone, Error)]
pub enum CatalogError {
    #[error("{0}")]
    Parameter(String),
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error(transparent)]
    Fibration(#[from] FibrationError),
    #[error(transparent)]
    Collection(#[from] CollectionError),
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: unsupported format header '{found}', expected '{expected}'")]
    Header {
        path: String,
        found: String,
        expected: &'static str,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error(transparent)]
    Fibration(#[from] FibrationError),
    #[error(transparent)]
    Collection(#[from] CollectionError),
}
