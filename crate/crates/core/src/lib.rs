//! Simulation and exact late-time analysis of entanglement asymmetry in
//! random brick-wall circuits whose gates respect a U(1), Z₂, or SU(2)
//! symmetry (or none).
//!
//! The crate is organised bottom-up:
//!
//! - [`state`] and [`density`]: dense statevectors, two-qubit gate kernels,
//!   partial traces, and entropy functionals.
//! - [`haar`], [`gates`], [`rng`]: seeded Haar and symmetric two-qubit gate
//!   ensembles with reproducible counter-derived random streams.
//! - [`circuit`] and [`initial`]: brick-wall time evolution and the tilted
//!   product / GHZ initial states.
//! - [`sectors`], [`cg`], [`asymmetry`]: symmetry-sector decompositions of a
//!   subsystem, pinching, and the entanglement asymmetry ΔS.
//! - [`oracle`]: closed-form and binomial-sum late-time predictions.
//! - [`experiment`] and [`dump`]: ensemble orchestration and file output.
//!
//! Conventions shared by every module: qubit 0 is the most significant bit
//! of a basis index, `|0⟩` is spin up (σᶻ = +1), and all logarithms are
//! natural.

pub mod asymmetry;
pub mod cg;
pub mod circuit;
pub mod density;
pub mod dump;
pub mod error;
pub mod experiment;
pub mod gates;
pub mod haar;
pub mod initial;
pub mod oracle;
pub mod rng;
pub mod sectors;
pub mod state;

#[cfg(test)]
pub(crate) mod test_support;

pub use error::{Error, Result};

/// Double-precision complex scalar used throughout.
pub type C64 = num_complex::Complex64;

// Book chapters compiled as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/statevectors.md")]
    mod statevectors {}
    #[doc = include_str!("../../../book/src/gates.md")]
    mod gates {}
    #[doc = include_str!("../../../book/src/circuits.md")]
    mod circuits {}
    #[doc = include_str!("../../../book/src/asymmetry.md")]
    mod asymmetry {}
    #[doc = include_str!("../../../book/src/late_time.md")]
    mod late_time {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
