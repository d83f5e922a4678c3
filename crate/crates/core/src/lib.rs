//! Numerical laboratory for the 1d cubic nonlinear Schrödinger equation with
//! Dirac-comb initial data.
//!
//! The crate is organised around the objects that appear in that problem:
//!
//! * [`gauss`] — quadratic Gauss sums, the arithmetic weights of linear
//!   revivals at rational times.
//! * [`talbot`] — free Schrödinger evolution of comb-like data: the revival
//!   delta train, a closed-form modulus for concentrated spectra, the direct
//!   summation oracle, and Riemann's non-differentiable function.
//! * [`coeffs`] — the slow-time dynamics of the Fourier coefficients `B_j`,
//!   its conservation laws, and the maps between the `A_j` and `B_j` pictures.
//! * [`integrate`] — an adaptive embedded Runge–Kutta driver in `log τ` for
//!   the coefficient system.
//! * [`field`] — physical-space reconstruction of `u(x, t)` and the special
//!   solutions (theta-type sums, the self-similar brick, corner angles).
//! * [`frame`] — parallel-frame transport, filament reconstruction, and the
//!   frequency-space energy diagnostics of the tangent field.
//! * [`rogue`] — the concentrated-bump experiment: small almost-periodic
//!   waves at one rational time, a localized large structure at another.

pub mod coeffs;
pub mod error;
pub mod field;
pub mod frame;
pub mod gauss;
pub mod integrate;
pub mod rogue;
pub mod talbot;
pub mod util;

pub use coeffs::{CoefficientState, ConservedReport, LineData, Mode, PhaseConvention};
pub use error::{Error, Result};
pub use field::FieldSample;
pub use frame::{Curve, Frame, FrameField};
pub use gauss::GaussSumParams;
pub use integrate::{IntegrateOpts, Integration, IntegrationStats};
pub use rogue::{BumpSpec, RogueConfig, RogueReport};
pub use talbot::{DeltaTrain, PeriodicSpectrum, RationalTime};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
