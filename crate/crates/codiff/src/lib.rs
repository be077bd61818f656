//! Exact-arithmetic graded differential algebra engine.
//!
//! Reconstructs Riemannian structure (Levi-Civita connection, torsion,
//! curvature, Ricci) from a codifferential, verifies the associated
//! Batalin-Vilkovisky-type identities, builds cleft central extensions of
//! differential graded algebras including a fully noncommutative two-point
//! example, and assembles the time semidirect product with δ-conformal
//! 1-forms.

pub mod dga;
pub mod error;
pub mod extension;
pub mod forms;
pub mod geometry;
pub mod ncdga;
pub mod report;
pub mod riemann;
pub mod scalar;
pub mod suites;
pub mod timext;

pub use error::{Error, Result};
