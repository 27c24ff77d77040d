use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate transform: |a|^2 - |b|^2 = {0:e} is not positive")]
    DegenerateTransform(f64),
    #[error("pole hit at z = {0}")]
    PoleHit(Complex64),
    #[error("generator {0} is not hyperbolic")]
    NotHyperbolic(usize),
    #[error("generators {0} and {1} coincide up to inversion")]
    DuplicateGenerator(usize, usize),
    #[error("orbit budget exceeded: {requested} elements requested, cap is {cap}")]
    BudgetExceeded { requested: u128, cap: usize },
    #[error("shell sums fail to decrease over the last three shells ({0:?})")]
    DivergenceSuspected(Vec<f64>),
    #[error("arity mismatch: expected {expected} generators, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("character value {0} is not unimodular")]
    NotUnimodular(Complex64),
    #[error("point {0} lies outside the open unit disk")]
    OutsideDisk(Complex64),
    #[error("all probes lie too close to zeros of b")]
    ProbeNearZero,
    #[error("|b'(z)| = {0:e} is too small: z is near a critical point of b")]
    NearCriticalPoint(f64),
    #[error("word {0} maps z to the origin; perturb z")]
    PoleInTerm(String),
    #[error("invalid quadrature size {0}")]
    InvalidQuadrature(usize),
    #[error("no seed converged to a certified preimage of {0}")]
    NotInImage(Complex64),
    #[error("two certified preimages differ: {0} vs {1}")]
    AmbiguousRoot(Complex64, Complex64),
    #[error("expected a positive value, got {0}")]
    NonPositive(f64),
    #[error("removable singularity could not be resolved (spread {0:e})")]
    UnresolvedSingularity(f64),
    #[error("A(z) vanishes at z = {0}")]
    AZero(Complex64),
    #[error("basis Gram matrix is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),
    #[error("kernel matrix is not Hermitian (max defect {0:e})")]
    NotHermitian(f64),
    #[error("Pick matrix is indefinite (min eigenvalue {min_eig:e}, max {max_eig:e})")]
    PickIndefinite { min_eig: f64, max_eig: f64 },
    #[error("numerical rank collapsed to zero with inconsistent values (residual {0:e})")]
    RankCollapse(f64),
    #[error("nodes {0} and {1} coincide")]
    DuplicateNode(usize, usize),
    #[error("Leech problem is infeasible (min eigenvalue {min_eig:e})")]
    Infeasible { min_eig: f64 },
    #[error("factorization misses node {node} by {residual:e}")]
    ResidualTooLarge { node: usize, residual: f64 },
    #[error("linear-fractional denominator vanishes at z = {0}")]
    LftPole(Complex64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
