//! Time integration of the nonlinear and linearised Fourier equations, the constant-coefficient
//! evolution-family series, and barrier certificates.
//!
//! Every step is an exact composition of grid shifts: the drift semigroup
//! `T(t)u(ξ) = e^{−t}u(ξe^{t/4})` and the halving map `u ↦ u(ξ/2)`. Nothing is differentiated
//! while stepping; finite differences only appear in residual diagnostics.

mod barrier;
mod dynamics;
mod initial;
mod residual;
mod run;
mod series;

pub use barrier::{
    barrier_certificate, barrier_envelope_check, tau, tau_from_log, BarrierCertificate, Envelope,
    EnvelopeCheck, T0,
};
pub use dynamics::{
    default_dynamics, step_linear, step_nonlinear, Dynamics, DynamicsFactory, LinearGain,
    NonlinearGain, Stepper,
};
pub use initial::{default_initial_data, DatumParams, InitialDatum, InitialDatumFactory};
pub use residual::{rhs_linear, rhs_nonlinear, Derivative};
pub use run::{
    default_observables, evolve, Column, Diagnostic, EvolveConfig, Observable, ObservableFactory,
    ObservableParams, RunTrace, StateView, COLUMNS,
};
pub use series::{evolution_series_constant, SeriesResult};
