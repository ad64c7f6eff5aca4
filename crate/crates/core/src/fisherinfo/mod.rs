//! Density-matrix spectra, quantum and classical Fisher information, and
//! the superresolution criterion.
//!
//! Derivatives of `ρ(θ)` are central finite differences with the step the
//! family declares. In the eigenbasis of `ρ(θ)` with `D = V†(∂ρ)V`:
//!
//! * QFI matrix: `F_kl = Σ_ij 2 Re(D_k,ij D_l,ji)/(p_i + p_j)`, pairs with
//!   `p_i + p_j < 1e-14` dropped.
//! * Classical part `C`: the same sum restricted to pairs with
//!   `|p_i − p_j| < 1e-12`. Diagonal terms give `Σ_j (∂p_j)²/p_j`; the
//!   off-diagonal pairs inside a degenerate subspace make `C` independent
//!   of how that subspace's basis was chosen.

mod criterion;
mod density;
mod families;
mod qfi;

pub use criterion::*;
pub use density::*;
pub use families::*;
pub use qfi::*;
