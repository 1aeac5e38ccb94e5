//! Numerical laboratory for inhomogeneous Hartree equations
//!
//! ```text
//! i ∂_t u + Δu = λ (I_α ∗ |x|^{-b}|u|^p) |x|^{-b} |u|^{p-2} u
//! ```
//!
//! Exponent conditions are decided exactly on rationals; everything dynamical runs
//! on a periodic cell-centered pseudospectral grid.

// `!(x > y)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admissibility;
pub mod corpus;
pub mod error;
pub mod grid;
pub mod ineq_lab;
pub mod norms;
pub mod propagator;
pub mod quadrature;
pub mod rational;
pub mod sharpness;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{Field, Grid, Multiplier, Space, ZeroModePolicy};
pub use rational::{ExtRational, Rational};
