//! Numerical toolkit for variable-exponent Lebesgue spaces on bounded domains.
//!
//! The crate discretizes a bounded domain `Ω ⊂ Rⁿ` (n = 1, 2) inside a uniform
//! Cartesian window and provides:
//!
//! * [`grid_domain`]: grids, domain geometry (`χ_Ω`, `δ(x)`), zero extension and midpoint quadrature;
//! * [`exponent`]: variable exponents `p(x)`, the log-Hölder modulus, conjugate and Sobolev exponents;
//! * [`luxemburg`]: the modular `ϱ_p` and the Luxemburg norm;
//! * [`kernels`]: Riesz kernels, finite-difference kernels and their identities;
//! * [`operators`]: Riesz potential, maximal operator, truncated hypersingular integrals,
//!   the boundary weight `a_Ω` and related checks;
//! * [`hardy`]: Hardy ratios, constant estimation and the multiplier property;
//! * [`cli`]: configuration, batch commands and the verification suite.

pub mod cli;
pub mod error;
pub mod fft;
pub mod exponent;
pub mod grid_domain;
pub mod hardy;
pub mod kernels;
pub mod luxemburg;
pub mod operators;
pub mod quadrature;
pub mod rng;

pub use error::{Error, Result};
pub use exponent::{ExponentField, ExponentSpec};
pub use grid_domain::{DomainSpec, Grid, GriddedFunction, Shape};
