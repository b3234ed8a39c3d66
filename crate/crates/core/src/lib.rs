//! Solvers for Beutler-Fano lineshapes of discrete-continuum quantum systems.
//!
//! Two routes to the same physics live side by side:
//!
//! - [`scattering`]: the Hilbert-space picture. A 2x2 non-Hermitian effective
//!   Hamiltonian, the poles of its resolvent, the ground-state survival
//!   amplitude and the ionization probability.
//! - [`liouville`] and [`general`]: the dissipative picture. The continuum is
//!   folded into an effective Liouvillian on the discrete subspace (wideband
//!   limit) whose kernel gives the steady state and the continuum population.
//!
//! [`oracle`] discretizes each continuum into a finite band and solves the full
//! Lindblad steady state by brute force, which is how the effective-Liouvillian
//! results are validated. [`lineshape`] holds the Fano profile and the
//! rational-quadratic / Fano-plus-Lorentzian decomposition.
//!
//! All energies and rates are dimensionless, in units of the reference width
//! `n * pi * V^2`; times are in units of its inverse.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod general;
pub mod linalg;
pub mod lineshape;
pub mod liouville;
pub mod oracle;
pub mod scattering;
pub mod types;

pub use error::{FanoError, Result};
pub use types::{
    validate_model, ComplexQ, Continuum, ContinuumDephasing, DensityMatrixP, Dephasing, FanoParams,
    GeneralModel, Jump, Level, Violation,
};

/// Double-precision complex number used throughout.
pub type C64 = num_complex::Complex<f64>;
