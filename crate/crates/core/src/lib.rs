//! Relaxation of the one-dimensional inelastic Boltzmann equation with sticky particles,
//! studied on the Fourier side.
//!
//! The nonlinear problem is posed on the characteristic function `φ(t, ξ)`:
//! `∂_t φ = ¼ ξ ∂_ξ φ + φ(ξ/2)² − φ`, with steady state `Φ(ξ) = (1+|ξ|)e^{−|ξ|}`.
//! Frequencies live on a geometric grid (see [`fourier_grid`]) so that both `ξ ↦ ξ/2` and the
//! drift flow are index shifts.

pub mod closed_forms;
pub mod error;
pub mod evolution;
pub mod fourier_grid;
pub mod linear_analysis;
pub mod metrics;
pub mod physical;
pub mod physical_space;
pub mod quadrature;
pub mod registry;
pub mod special;

pub use error::{Error, Result};
