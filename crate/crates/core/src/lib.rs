//! Numerics for resolving two nearly degenerate frequencies with a qubit
//! probe under π-pulse control.
//!
//! The crate is `no_std` (with `alloc`). Everything that needs an operating
//! system (files, threads, the CLI) lives in the `superres` crate. Enabling
//! the `std` feature adds the FFT-based spectra of [`memoryqubit`].
//!
//! Units are natural: frequencies in rad per unit time, times in unit time.
//! Most closed forms only depend on the products `ωt` and `σt`.

#![cfg_attr(all(not(feature = "std"), not(test)), no_std)]
#![forbid(unsafe_code)]
// `!(x > 0.0)` style checks deliberately reject NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analytics;
pub mod error;
pub mod estimation;
pub mod fisherinfo;
pub mod memoryqubit;
pub mod montecarlo;
pub mod optimize;
pub mod signal;

pub use error::{Error, Result};

/// Complex scalar used by the density-matrix code.
pub type C64 = nalgebra::Complex<f64>;

/// `r·e^{iθ}` without relying on `std` float methods.
pub(crate) fn polar(r: f64, theta: f64) -> C64 {
    C64::new(r * libm::cos(theta), r * libm::sin(theta))
}

/// `|z|`.
pub(crate) fn cabs(z: &C64) -> f64 {
    libm::hypot(z.re, z.im)
}
