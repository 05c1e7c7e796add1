//! Pseudospectral toolkit on the 3-torus `[0, 2pi)^3` for the Navier-Stokes equations,
//! their magnetization form, and the related simplified, Burgers and toy systems.
//!
//! Fields are truncated Fourier series `f(x) = sum_{|k| <= K} f_k e^{i k.x}`; see
//! [`lattice::WaveLattice`] for the mode order and [`field::Field`] for the operators.

pub mod diagnostics;
pub mod dynamics;
pub mod equivalence;
pub mod error;
pub mod field;
pub mod lattice;
pub mod snapshot;
mod sum;
pub mod timestepper;

pub use error::{Error, Result};
pub use field::{FourierField, ScalarField, SobolevIndex, VOLUME};
pub use lattice::WaveLattice;
pub use rustfft::num_complex::Complex64;
pub use sum::pairwise_sum;
