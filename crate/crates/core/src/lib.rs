//! Subset selection for maximizing the squared norm of a projection.
//!
//! Given unit vectors `x₀ … x_{n−1}` in `Rᵈ`, a target `η`, and an independence
//! structure over indices, find an independent `E` maximizing
//! `f(E) = ‖𝒫_η(span E)‖²`. The crate provides forward regression, orthogonal
//! matching pursuit, an exhaustive oracle, the curvature quantities that govern
//! how far greedy selection can fall short, and the matching lower bounds.

pub mod bounds;
pub mod curvature;
pub mod error;
pub mod harness;
pub mod hilbert;
pub mod matroid;
pub mod selectors;

pub use bounds::{verify_bounds, BoundReport};
pub use curvature::{curvature_report, CurvatureConfig, CurvatureMode, CurvatureReport};
pub use error::{Error, Result};
pub use hilbert::{OrthoBasis, Vector};
pub use matroid::{AxiomReport, MatroidKind, MatroidSpec};
pub use selectors::{
    brute_force_optimal, forward_regression, omp, Instance, SelectOptions, SelectionResult,
    StopReason,
};
