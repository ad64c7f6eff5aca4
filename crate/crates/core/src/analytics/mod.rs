//! Closed-form averaged transition probabilities and Fisher information.
//!
//! Scalar helpers take dimensionless products (`δt`, `σt`, `ω_r t`) and
//! return Fisher information in units of `t²`, i.e. the information about
//! `ω_r t`. With `t = 1` the two coincide.
//!
//! Amplitudes come in two conventions, see [`Convention`].

mod fisher;
mod noise;
mod probability;

pub use fisher::*;
pub use noise::*;
pub use probability::*;

use core::f64::consts::PI;

/// How the pulse-train prefactor is accounted for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Convention {
    /// Signal amplitudes are the bare ones; the pulse train scales them by
    /// `tan(ωτ/2)·δ/ω` (≈ 2/π). Resonant optimum `8σ²t⁴/π⁴`.
    Physical,
    /// The prefactor is absorbed into the amplitudes. Resonant optimum
    /// `2σ²t⁴/π²`.
    Effective,
}

impl Convention {
    /// Amplitude gain used when no pulse plan is available.
    pub fn gain(self) -> f64 {
        match self {
            Convention::Physical => 2.0 / PI,
            Convention::Effective => 1.0,
        }
    }
}

/// A number tagged with the amplitude convention it was computed in.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Labeled {
    pub value: f64,
    pub convention: Convention,
}

impl Labeled {
    pub fn new(value: f64, convention: Convention) -> Self {
        Labeled { value, convention }
    }
}
