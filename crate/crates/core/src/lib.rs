//! Fusion-frame (frames of subspaces) calculus on finite-dimensional real
//! or complex spaces.
//!
//! A fusion frame is a weighted family of closed subspaces `{(W_i, v_i)}`
//! whose squared, weighted projections sandwich every vector's norm:
//! `C |f|^2 <= sum_i v_i^2 |pi_{W_i} f|^2 <= D |f|^2`. This crate computes
//! the associated operators and optimal bounds, reconstructs vectors,
//! builds duals and resolutions of the identity, decides structural
//! predicates (completeness, minimality, exactness, Riesz decompositions),
//! assembles global frames from local ones, and constructs harmonic and
//! finite Gabor families — every claim backed by a numerical certificate.

pub mod assembly;
pub mod cli;
pub mod error;
pub mod files;
pub mod fusion;
pub mod harmonic;
pub mod linalg;
pub mod report;
pub mod resolution;
pub mod structure;
pub mod subspace;

pub use error::{Error, Result};
pub use fusion::{BoundsReport, CoefficientBlocks, WeightedFamily};
pub use linalg::{EigResult, Mat, Scalar, Vector};
pub use subspace::{OperatorImage, Subspace};
