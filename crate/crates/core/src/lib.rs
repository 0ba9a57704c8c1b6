//! Potential theory of one-dimensional Lévy processes with asymmetric jumps.
//!
//! The crate evaluates characteristic exponents, transition and resolvent
//! densities, the renormalized zero resolvent `h0`, and the excursion duration
//! density by Fourier inversion, and checks the harmonicity identities and
//! regularity conditions that connect them.
//!
//! Sign convention used throughout: with `E[exp(iλX(t))] = exp(-tΨ(λ))` and
//! `Ψ = θ + iω`,
//!
//! ```text
//! r_q(x) = (1/π) ∫₀^∞ [(q+θ) cos λx − ω sin λx] / [(q+θ)² + ω²] dλ
//! ```
//!
//! which is the real part of `e^{-iλx}/(q+Ψ(λ))`. The same convention gives
//! `h_q(x) = r_q(0) − r_q(−x)` and the closed form of `h0` for stable laws.

pub mod cli;
pub mod conditions;
pub mod duration;
pub mod error;
pub mod exponent;
pub mod harmonic;
pub mod quadrature;
pub mod resolvent;
pub mod stable;

pub use error::{Error, Result};

pub use exponent::{LevyExponent, LevyTriplet, NuDensity};
pub use quadrature::{Kernel, QuadratureResult, QuadratureSpec};
pub use stable::{StableConstants, StableParams};


/// A computed value with its propagated absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T = f64> {
    pub value: T,
    pub error_estimate: f64,
}
