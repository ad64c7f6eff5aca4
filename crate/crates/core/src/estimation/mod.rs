//! Likelihood construction and the estimation protocols: resonant and
//! off-resonant single-parameter MLE, scaling studies, the preliminary
//! detuning scan and the joint three-detuning fit.

mod likelihood;
mod mle;
mod multiparam;
mod scan;
mod study;

pub use likelihood::*;
pub use mle::*;
pub use multiparam::*;
pub use scan::*;
pub use study::*;
