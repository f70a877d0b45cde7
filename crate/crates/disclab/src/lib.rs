//! Numerical laboratory for geometric estimates of Fourier transforms of
//! convex bodies and for L2 irregularities of distribution on the torus.
//!
//! The crate is organized in four layers:
//!
//! * [`bodies`] — a catalog of convex bodies (ball, ellipsoid, superellipsoid,
//!   double cone, cube) with parallel section functions, support intervals,
//!   normals, curvature, caps, volumes and membership tests.
//! * [`fourier`] — the Fourier transform of the indicator function evaluated
//!   by independent routes (closed forms, oscillatory quadrature of the
//!   section function, divergence-theorem surface integrals), together with
//!   the stationary-phase leading term and the finite difference operator
//!   with its multiplier.
//! * [`bounds`] — numerical certification of the two-sided decay inequalities:
//!   each inequality becomes a normalized ratio scanned over a (direction,
//!   frequency) grid, reported with empirical inf/sup constants.
//! * [`discrepancy`] — point sets on the torus, exponential sums, the
//!   Cassels–Montgomery shell bound, and the L2 body discrepancy computed by
//!   both a Parseval lattice series and a direct Monte Carlo oracle.

pub mod bodies;
pub mod bounds;
pub mod discrepancy;
pub mod error;
pub mod fourier;
pub mod quad;
pub mod report;
pub mod special;

pub use error::{DiscLabError, Result};
