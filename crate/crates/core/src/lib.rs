//! Numerics for Hardy martingales on finite products of a discretized circle.
//!
//! The crate is `no_std` and only needs `alloc`. It is organised bottom-up:
//!
//! * [`torus`]: the single-coordinate layer. Grid geometry, the discrete
//!   Fourier pair, the Hilbert transform, the sign function `σ(ζ) = sign Re ζ`
//!   and inner products.
//! * [`martingale`]: finite-depth martingales stored by their terminal values,
//!   with levels, differences, previsible norms, sine-cosine decomposition,
//!   martingale transforms and the dyadic projection.
//! * [`inequality`]: evaluators for the sine-cosine identity, the arithmetic
//!   lemma, the single-coordinate inequalities and the full chain of estimates
//!   behind the dyadic stability bound.
//! * [`ensembles`]: seeded generators for random Hardy data.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ensembles;
mod error;
pub mod inequality;
pub mod martingale;
pub mod torus;

pub use error::Error;
pub use num_complex::Complex64 as Complex;

pub type Result<T, E = Error> = core::result::Result<T, E>;
