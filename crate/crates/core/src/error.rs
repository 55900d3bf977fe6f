use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("query point outside oracle domain (norm {norm:.6}, limit {limit:.6})")]
    DomainViolation { norm: f64, limit: f64 },

    #[error("sample matrix is rank deficient: sigma_{rank} = {sigma_k:.3e} vs sigma_1 = {sigma_1:.3e}")]
    RankDeficient { rank: usize, sigma_k: f64, sigma_1: f64 },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("no strictly positive definite member found (best min eigenvalue {best:.3e})")]
    Infeasible { best: f64 },

    #[error("matrix is not positive definite (min eigenvalue {min_eig:.3e})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("direction set is numerically singular (sigma_min {sigma_min:.3e})")]
    SingularDirections { sigma_min: f64 },

    #[error("density underflow at sample point (p = {density:.3e})")]
    DensityMismatch { density: f64 },

    #[error("bisection on the perturbation scale did not reach tolerance {tol} in {iters} iterations")]
    BisectionFailed { tol: f64, iters: usize },

    #[error("argument {value:.6} outside tabulated profile domain [{lo:.6}, {hi:.6}] of direction {index}")]
    ProfileDomain { index: usize, value: f64, lo: f64, hi: f64 },

    #[error("zero matrix has no leading singular direction")]
    ZeroMatrix,

    #[error("config error: {0}")]
    Config(String),
}
