//! Geodesic-flow-kernel domain adaptation and chained self-training transfer
//! between structures that morph continuously from a bridge into an aeroplane.
//!
//! The crate is split along the pipeline:
//!
//! - [`spectral_sim`]: parametric beam models, modal analysis and noisy
//!   natural-frequency datasets for every point of the morphing chain.
//! - [`alignment`]: normal-condition alignment (per-feature standardization
//!   against labelled healthy data).
//! - [`subspace`]: PCA bases, orthogonal completion and the principal-angle
//!   factorization between two subspaces.
//! - [`kernel`]: the geodesic flow between two subspaces and the closed-form
//!   geodesic flow kernel.
//! - [`svm`]: a soft-margin SVM trained on a precomputed Gram matrix.
//! - [`chain`]: transfer steps, chains of intermediates and the seeded
//!   trial harness.

pub mod alignment;
pub mod chain;
pub mod error;
pub mod kernel;
pub mod spectral_sim;
pub mod subspace;
pub mod svm;

pub use error::{Error, Result};
