//! Q-gradient flows and Kempf–Ness optimization on products of
//! positive-definite matrix manifolds.
//!
//! The crate is organized bottom-up:
//!
//! - [`spectral_convex`]: unitarily invariant convex functions on Hermitian
//!   blocks, built from symmetric vector functions (values, conjugates,
//!   subgradients, proximal maps, Moreau envelopes).
//! - [`pd_geometry`]: geodesics, transport, distances and boundary-at-infinity
//!   normal forms on `R^n0 x P_n1 x ... x P_nd`.
//! - [`tensor_action`]: the `GL_n1 x ... x GL_nd` action on tensors, moment
//!   maps, the Kempf–Ness function and its recession function.
//! - [`flow_solver`]: Q-gradient flow, Q-subgradient methods, certificate
//!   extraction and dual evaluation.
//! - [`applications`]: quantum functionals, G-stable rank and noncommutative
//!   rank with primal estimates and dual bounds.

pub mod applications;
pub mod error;
pub mod flow_solver;
pub mod pd_geometry;
pub mod random;
pub mod spectral_convex;
pub mod tensor_action;

pub use error::{Error, Result};

/// Dense complex matrix used throughout the crate.
pub type CMat = nalgebra::DMatrix<num_complex::Complex64>;

pub use num_complex::Complex64;
