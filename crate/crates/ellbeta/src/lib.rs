//! Elliptic beta integrals and their basic hypergeometric limits.
//!
//! The crate is organized around a single geometric picture: the renormalized
//! elliptic beta integral `E^m(t)` in `2m+6` complex parameters degenerates, as
//! the base `p` tends to zero along directions indexed by rational vectors
//! `alpha`, to basic hypergeometric objects `B^m_alpha(u)`. The admissible
//! directions form a convex polytope (for `m = 1` the Hesse polytope, acted on
//! by the Weyl group of E7), and the limit function attached to a direction
//! depends only on the open face containing it. Face geometry then organizes
//! evaluations, symmetries, transformations, and three-term relations of the
//! limit functions, all of which this crate can generate and verify
//! numerically.
//!
//! Module map:
//! - [`rat`]: exact rational scalars and vectors.
//! - [`rootsys`]: the root systems R(E8), R(E7), the 56-point orbit S, Weyl
//!   reflections and the multiplicative Weyl action on parameter points.
//! - [`coxeter`]: Dynkin-type identification of root subsystems.
//! - [`polytope`]: the limit polytopes, their bounding inequalities, point
//!   classification and decomposition.
//! - [`faces`]: exact face-lattice enumeration, orbits, stabilizers and the
//!   face catalogs.
//! - [`qseries`]: q-shifted factorials, theta functions and the (confluent)
//!   basic hypergeometric series.
//! - [`quad`]: trapezoidal contour quadrature on circles.
//! - [`elliptic`]: two-base building blocks and the integral `E^m` itself.
//! - [`limits`]: the face-to-formula dispatch and evaluation of `B^m_alpha`.
//! - [`identities`]: generation and verification of identity families.
//! - [`catalog`]: golden-data comparison for the face catalogs.
//! - [`verify`]: named verification suites behind a common trait.
//! - [`config`]: runtime configuration shared by the CLI and the suites.

pub mod catalog;
pub mod config;
pub mod coxeter;
pub mod elliptic;
pub mod error;
pub mod faces;
pub mod identities;
pub mod limits;
pub mod params;
pub mod polytope;
pub mod qseries;
pub mod quad;
pub mod rat;
pub mod report;
pub mod rootsys;
pub mod verify;

pub use error::{Error, Result};
