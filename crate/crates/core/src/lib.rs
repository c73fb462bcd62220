//! Numerical laboratory for the two-dimensional radial cubic-quintic
//! nonlinear Schrödinger equation
//!
//! ```text
//! (i d_t + Delta) u = -|u|^2 u + |u|^4 u,   x in R^2.
//! ```
//!
//! The crate computes the cubic ground state `Q`, propagates solutions with
//! a Strang-split spectral scheme and measures the quantities that govern
//! scattering at the threshold mass `M(Q)`.

pub mod error;
pub mod experiments;
pub mod functionals;
pub mod ground_state;
pub mod inout;
pub mod numerics;
pub mod propagator;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
