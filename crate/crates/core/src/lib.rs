//! Image recovery by variable splitting with exact inner solves.
//!
//! The central solver minimizes `0.5 * ||A x - y||^2 + tau * phi(x)` by an
//! augmented Lagrangian splitting in which the quadratic update is solved
//! exactly in closed form. For the observation models in [`operators`]
//! (circulant convolution, pixel masks, partial Fourier sampling, and their
//! compositions with Parseval frames) that update costs a couple of FFTs or a
//! diagonal scaling, which is what makes the method fast.
//!
//! Layout: [`image`] holds the dense grid containers, [`fft`] the unitary
//! transforms, [`operators`] the observation models and their regularized
//! Gram solves, [`frames`] the Haar synthesis frames, [`prox`] the shrinkage
//! and total-variation proximal maps, and [`solvers`] the outer loops
//! (SALSA/ADMM, IST, FISTA).

pub mod error;
pub mod fft;
pub mod frames;
pub mod image;
pub mod io;
pub mod operators;
mod parallel;
pub mod prox;
pub mod solvers;

pub use error::{Error, Result};
pub use rustfft::num_complex::Complex64;
