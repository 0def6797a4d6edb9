use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("all homogeneous coordinates are zero")]
    ZeroPoint,
    #[error("chart coordinate {index} of factor {factor} vanishes")]
    ChartUndefined { factor: usize, index: usize },
    #[error("tangent vectors are based at different points")]
    BaseMismatch,
    #[error("point does not match the ambient descriptor: {0}")]
    ShapeMismatch(String),
    #[error("quadrature did not converge after {levels} refinements (last change {change:e})")]
    NonConvergent { levels: usize, change: f64 },
    #[error("singular linear system while solving for a Hamiltonian field")]
    SingularSystem,
    #[error("Newton projection onto the constraints failed (residual {residual:e})")]
    ProjectionFailure { residual: f64 },
    #[error("point lies on the base set of the pencil")]
    OnBaseSet,
    #[error("integration contour passes through a root")]
    ContourThroughRoot,
    #[error("no loop with the requested disc area exists (max feasible {max_area:.6}, target {target:.6})")]
    Infeasible { max_area: f64, target: f64 },
    #[error("point on the pole locus of the volume form")]
    OnPoleLocus,
    #[error("pairing vanishes along the loop (min modulus {0:e})")]
    VanishingPairing(f64),
    #[error("phase unwrapping hit the sample cap")]
    AliasLimit,
    #[error("polynomial vanishes identically on the curve")]
    IdenticallyZero,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("relation is unbalanced: D+ degree {plus:?} vs D- degree {minus:?}")]
    Unbalanced { plus: Vec<i64>, minus: Vec<i64> },
    #[error("weight data is rank deficient")]
    RankDeficient,
    #[error("i/o failure: {0}")]
    Io(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
