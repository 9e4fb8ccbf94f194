//! Spectral toolkit for the continuous resonant (CR) equation
//!
//! ```text
//! i ∂ₜu = 𝒯(u, u, u)
//! ```
//!
//! written in the special Hermite basis `φ_{n,m}` of the two-dimensional
//! harmonic oscillator. In that basis the cubic nonlinearity reduces to a
//! finite sum over resonant index quadruples weighted by real coupling
//! coefficients, and the crate is organised around that fact:
//!
//! * [`basis`]: mode labels, Laguerre / special Hermite evaluation, ladder
//!   operators, eigendata.
//! * [`coefficients`]: closed-form, exact-rational and quadrature coupling
//!   coefficients, and [`coefficients::CouplingTable`] with its text format.
//! * [`resonant`]: the truncated resonant system (right-hand side,
//!   Hamiltonian, conserved quantities, symmetries) and [`integrate`] for
//!   time stepping.
//! * [`subspaces`]: closed-form dynamics on `E₀`, `E₁`, `E₂`, the `E₂`
//!   stationary-wave catalogue and the Gaussian symmetry orbit.
//! * [`stability`]: Lowest-Landau-Level linearization, unstable-mode counts,
//!   constrained extremization and decay diagnostics.
//! * [`nls`]: Hermite-truncated cubic NLS with harmonic trapping, compared
//!   against the CR flow.
//! * [`config`]: the flat run configuration used by the `cr` binary.
//! * [`oracle`]: an independent Cartesian tensor-grid quadrature used to
//!   cross-check the coupling coefficients.

pub mod basis;
pub mod coefficients;
pub mod config;
pub mod error;
pub mod integrate;
pub mod nls;
pub mod optim;
pub mod oracle;
pub mod quadrature;
pub mod resonant;
pub mod stability;
pub mod state;
pub mod subspaces;
mod table_io;

pub use basis::{ModeIndex, RadialIndex};
pub use coefficients::{CouplingTable, Family};
pub use error::{CrError, Result};
pub use resonant::{ConservedSet, ResonantSystem};
pub use state::SpectralState;

pub use num_complex::Complex64 as C64;
