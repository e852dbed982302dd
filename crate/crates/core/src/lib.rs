//! Stochastic, graph-driven gradient flows on the orthogonal group `O(d)`,
//! the rotation group `SO(d)` and the Stiefel manifold `ST(d, k)`.
//!
//! A Riemannian gradient step on these manifolds is driven by a dense
//! skew-symmetric matrix `Omega`. Reading `Omega` as a weighted tournament on
//! `d` vertices, the [`sampling`] module draws unbiased block-sparse estimates
//! of it. The estimates are supported on vertex partitions or on matchings.
//! Applying such an estimate costs a product of small exponentials, Givens
//! rotations when the blocks have two vertices, instead of one dense `d x d`
//! matrix exponential.
//!
//! The crate is `no_std` and only needs `alloc`. IO, file formats and the
//! command-line front end live in the `orthoflow-cli` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod flows;
pub mod integrator;
pub mod manifold;
pub mod matrix;
pub mod objective;
pub mod retraction;
pub mod rng;
pub mod sampling;

pub use error::{Error, Result};
pub use manifold::{AmbientGradient, GradientForm, ManifoldKind, ManifoldPoint, SkewSymmetric};
pub use matrix::Matrix;
pub use retraction::ExpBackend;
