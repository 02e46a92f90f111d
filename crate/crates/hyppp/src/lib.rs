//! Hyperdeterminantal point processes on finite weighted ground spaces.
//!
//! A rank-L family of orthonormal functions on each factor of a product
//! space `Sigma = Sigma_1 x ... x Sigma_M` induces a kernel in 2M arguments;
//! taking Cayley's first hyperdeterminant of the kernel values at N points
//! (with a chosen set of alternating direction pairs) yields a family of
//! exchangeable probability densities that generalizes determinantal point
//! processes beyond pairwise interaction. This crate evaluates those
//! densities exactly, draws configurations by sequential conditional
//! extension (exact sampling in the single-factor determinantal case),
//! integrates factors out, and computes count moments and count laws over
//! product sets — with brute-force oracles cross-checking every fast path.
//!
//! The `hyppp` binary exposes generation, density evaluation, sampling,
//! moments, and an invariant verification suite over JSON files.

pub mod cli;
pub mod error;
pub mod hdpp;
pub mod json;
pub mod kernel;
pub mod moments;
pub mod multilinear;
pub mod oracle;
pub mod tensor;

pub use error::{Error, Result};
pub use hdpp::{CategoricalDist, ProcessSpec};
pub use kernel::{gen_system, GroundSpace, OrthonormalSystem, PointConfig, SystemKind};
pub use moments::{CountPMF, ProductSet};
pub use multilinear::{det, hyperdet_direct, hyperdet_factored, permanent, SignancySet};
pub use tensor::{ComplexMatrix, HypercubicArray};
