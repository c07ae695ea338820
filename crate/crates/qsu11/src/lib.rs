//! Numerical toolkit for Hamiltonian-type operators of the positive discrete
//! series representations of the quantum algebra `U_q(su(1,1))`.
//!
//! * [`qcore`]: q-numbers, q-Pochhammer symbols and basic hypergeometric series.
//! * [`qpolys`]: the polynomial families, overlap coefficients and eigenfunction expansions.
//! * [`operators`]: truncated Jacobi matrices of the operators.
//! * [`spectral`]: eigenvalues, predicted spectra and deficiency classification.
//! * [`ortho`]: Gram matrices of the orthogonality relations.
//! * [`limits`]: convergence to the undeformed objects as `q -> 1`.

pub mod error;
pub mod extended;
pub mod limits;
pub mod operators;
pub mod ortho;
pub mod qcore;
pub mod qpolys;
pub mod spectral;

pub use error::{Error, Result};
