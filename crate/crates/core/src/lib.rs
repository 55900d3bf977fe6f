//! Identification of shallow feed-forward networks and, more generally, sums of
//! ridge functions `f(x) = Σᵢ gᵢ(aᵢ·x)` from point queries of `f` alone.
//!
//! The pipeline recovers the weight vectors `aᵢ` and the univariate profiles `gᵢ`
//! in four stages:
//!
//! 1. [`subspace`] — estimate the span of the weights from finite-difference
//!    gradients, reduce the ambient dimension from `d` to `m`, then estimate the
//!    span of the rank-one matrices `aᵢaᵢᵀ` from finite-difference Hessians.
//! 2. [`whitening`] — locate a well-conditioned positive definite matrix inside
//!    the recovered matrix space and conjugate by its inverse square root so the
//!    effective weights become nearly orthonormal.
//! 3. [`rank1`] — search the matrix space for near-rank-one members by a
//!    projected singular-value amplification iteration and read the weights off
//!    their top eigenvectors.
//! 4. [`reconstruct`] — sample the profiles along the dual basis of the
//!    recovered weights and assemble a uniform approximant of `f`.
//!
//! [`model`] provides ground-truth networks for experiments and oracles,
//! [`oracle`] the black-box query interface with noise and query accounting, and
//! [`harness`] the seeded experiment runner behind the CLI.

pub mod error;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod rank1;
pub mod reconstruct;
pub mod rng;
pub mod sampling;
pub mod subspace;
pub mod whitening;

pub use error::{Error, Result};
pub use model::{generate_network, near_orthonormality, Activation, NearOrthMeasure, RidgeNetwork};
pub use oracle::{QueryOracle, TestFunctionFamily};
pub use subspace::{MatrixSubspace, VectorSubspace};
