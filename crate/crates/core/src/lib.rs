//! Numerical certification of adversary lower bounds for the 3-shift-sum and
//! 3-matching-sum problems.
//!
//! The crate is organised bottom-up:
//!
//! * [`problems`]: instance spaces, matchings, exhaustive input oracles.
//! * [`certificates`]: certificate structures and dual learning-graph solutions.
//! * [`operators`]: the Π/Ψ tensor algebra over `Z_q`, matrix-free application
//!   and spectral norms.
//! * [`symmetry`]: symmetric-group characters, isotypic projectors, the
//!   exactly-k projectors and the overlap statistics used by the Λ bound.
//! * [`adversary`]: the adversary matrices `G(α)`, their Δ-constraints and
//!   end-to-end bound certificates.
//! * [`experiments`]: the classical (randomised) query experiments.

pub mod adversary;
pub mod certificates;
pub mod error;
pub mod experiments;
pub mod operators;
pub mod problems;
pub mod rng;
pub mod sets;
pub mod symmetry;

pub use error::{Error, Result};
