//! Polynomials, symmetric tensors, the coefficient isomorphism between them,
//! and the perfect-matching combinatorics behind Gaussian moments.

mod parse;
mod polynomial;
mod tensor;
mod wick;

pub use polynomial::{compose_linear, MultiIndex, Polynomial};
pub use tensor::{fourier_poly, poly_from_tensors, sorted_tuples, SymTensor};
pub use wick::{double_factorial_odd, wick_pairings, wick_pairings_capped, PairingSet, MAX_WICK_ORDER};
