//! Riemannian geometry on the compact Stiefel manifold St(n,p) under the
//! canonical metric.
//!
//! The crate provides the closed-form exponential map, a completion-rotation
//! fixed-point algorithm for the Riemannian logarithm, sectional curvature,
//! Jacobi fields with conjugate-point detection, and a reproducible
//! experiment harness for locating cut points of geodesics.

pub mod curvature;
pub mod error;
pub mod experiments;
pub mod jacobi;
pub mod logmap;
pub mod matops;
pub mod stiefel;

pub use error::{Error, Result};
pub use matops::{DenseMatrix, SkewMatrix};
pub use stiefel::{GeodesicSpec, StiefelPoint, TangentParam};
