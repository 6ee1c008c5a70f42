//! Distributions on infinite-dimensional spaces as compatible families of
//! moment functionals.
//!
//! A distribution assigns to every finite tuple of test functions
//! `φ₁…φₙ` (a projection `π: S′ → ℝⁿ`) a linear functional `μ_π` on
//! polynomials over ℝⁿ, such that `μ_{λ∘π} = λ_* μ_π` for every linear map
//! `λ`. The test-function space is truncated to a finite basis; within that
//! truncation everything here is exact linear algebra and combinatorics.
//!
//! * [`model`]: the truncated space, projections, bilinear forms.
//! * [`polytensor`]: polynomials ↔ symmetric tensors, Wick matchings.
//! * [`moments`]: moment functionals, pushforward, compatibility, convergence.
//! * [`gaussian`]: complex Gaussians, Green functions, generating functional,
//!   the pure-imaginary (Fresnel) limit.
//! * [`oracle`]: grid quadrature and ε-extrapolation used as reference.
//! * [`kernels`]: lattice free-field forms and real Gaussian measures.
//! * [`json`]: wire formats.

pub mod error;
pub mod gaussian;
pub mod json;
pub mod kernels;
pub mod linalg;
pub mod model;
pub mod moments;
pub mod oracle;
pub mod polytensor;

pub use error::{Error, Result};
pub use num_complex::Complex64;
