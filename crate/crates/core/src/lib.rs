//! Numerical Gabor analysis on almost periodic functions.
//!
//! The library works on the dense class of finite trigonometric polynomials
//! `f(t) = Σ c_j e^{i λ_j t}` and their discrete counterparts, almost periodic
//! sequences `a(n) = Σ c_j e^{i θ_j n}`. On this class inner products, norms,
//! analysis/synthesis maps and frame-type bounds all have closed forms, and
//! every closed form ships with an independent numerical oracle (long-time
//! averages, quadrature, dense grids) so results can be cross-checked.
//!
//! Module map:
//! - [`ap`]: trigonometric polynomials, almost periodic sequences, exact
//!   inner products and the time-average oracles.
//! - [`windows`]: window catalog (Gaussian, triangle, rectangle) with exact
//!   Fourier transforms, Wiener-amalgam norms and certified tail bounds.
//! - [`gabor`]: analysis and synthesis maps between functions and sequence
//!   families, the orthogonal systems that convert sequence norms into
//!   function-space sums, and the periodization oracle.
//! - [`frames`]: fiber matrices, Jacobi eigenvalue bounds, frame sandwich
//!   checks, Schur-test Bessel bounds and subspace frames.

pub mod ap;
pub mod frames;
pub mod gabor;
pub mod windows;

mod error;

pub use error::{Error, Result};
