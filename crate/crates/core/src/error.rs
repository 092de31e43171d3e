use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("radical of the polar form has dimension {0}, expected 1")]
    RadicalDimension(usize),

    #[error("quadratic form vanishes on its radical vector")]
    SingularRadical,

    #[error("singular count {count} on a hyperplane matches no O(2m,2) type (m = {m})")]
    ClassifierMismatch { m: usize, count: usize },

    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("representation index {j} out of range for p = {p}")]
    IndexOutOfRange { p: u32, j: u32 },

    #[error("matrix is not unitary (residual {0:.3e})")]
    NotUnitary(f64),

    #[error("unitary does not normalize the Heisenberg image: {0}")]
    NotNormalizing(String),

    #[error("induced action does not preserve the commutator form")]
    NotSymplectic,

    #[error("line set spans rank {rank}, expected {expected}")]
    SpanDeficient { rank: usize, expected: usize },

    #[error("lines {i} and {j} deviate from the common overlap by {deviation:.3e}")]
    NotEquiangular { i: usize, j: usize, deviation: f64 },

    #[error("(n, d) = ({n}, {d}) is not a known 2-transitive case")]
    UnknownCase { n: usize, d: usize },

    #[error("fiducial search did not converge (best frame potential excess {best_excess:.3e})")]
    NotConverged { best_value: f64, best_excess: f64 },

    #[error("unitary is not a symmetry of the line set: {0}")]
    NotASymmetry(String),

    #[error("averaging operator is not a projector (residual {0:.3e})")]
    NotAProjector(f64),

    #[error("line set carries no construction record")]
    MissingMeta,

    #[error("matrix group closure exceeded {0} elements")]
    GroupTooLarge(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
