use std::sync::Arc;

use crate::closed_forms::phi_scaled;
use crate::error::{Error, Result};
use crate::fourier_grid::{sample_real, GridProfile, Taylor};
use crate::metrics::{moments_from_profile, norm_k, norm_kp, sobolev_norm};
use crate::registry::{Named, Registry};

use super::barrier::{barrier_envelope_check, Envelope};
use super::dynamics::{Dynamics, Stepper};
use super::residual::{interior_max, rhs_linear, rhs_nonlinear, Derivative};

/// Columns of a trace, in output order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Column {
    NormK,
    NormKp,
    Sobolev,
    Mass,
    Momentum,
    Energy,
    Residual,
    BarrierMargin,
}

pub const COLUMNS: [Column; 8] = [
    Column::NormK,
    Column::NormKp,
    Column::Sobolev,
    Column::Mass,
    Column::Momentum,
    Column::Energy,
    Column::Residual,
    Column::BarrierMargin,
];

impl Column {
    pub fn header(self) -> &'static str {
        match self {
            Column::NormK => "norm_k",
            Column::NormKp => "norm_kp",
            Column::Sobolev => "sobolev",
            Column::Mass => "mass",
            Column::Momentum => "momentum",
            Column::Energy => "energy",
            Column::Residual => "residual",
            Column::BarrierMargin => "barrier_margin",
        }
    }
    fn index(self) -> usize {
        COLUMNS.iter().position(|c| *c == self).expect("listed")
    }
}

/// The current state of a run as seen by observables.
pub struct StateView<'a> {
    /// Stepped state: a deviation from `Φ_λ` for nonlinear flows.
    pub state: &'a GridProfile,
    pub dynamics: &'a dyn Dynamics,
    /// `Φ_λ` sampled on the grid, present for nonlinear flows.
    pub reference: Option<&'a GridProfile>,
}

impl StateView<'_> {
    /// The full profile φ = Φ_λ + ψ, or the state itself for linear flows.
    pub fn full(&self) -> Result<GridProfile> {
        match self.reference {
            Some(r) => r.add(self.state),
            None => Ok(self.state.clone()),
        }
    }
}

/// Quantity recorded at each sample.
pub trait Observable: Send + Sync {
    fn evaluate(&self, view: &StateView<'_>) -> Result<Vec<(Column, f64)>>;
}

/// Parameters an observable may read.
#[derive(Clone, Debug, Default)]
pub struct ObservableParams {
    pub k: Option<f64>,
    pub p: Option<f64>,
    pub s: Option<f64>,
    pub homogeneous: bool,
    pub envelope: Option<Envelope>,
}

pub trait ObservableFactory: Named + Send + Sync {
    fn build(&self, params: &ObservableParams) -> Result<Arc<dyn Observable>>;
}

fn need(v: Option<f64>, what: &str) -> Result<f64> {
    v.ok_or_else(|| Error::InvalidParameter(format!("observable needs '{what}'")))
}

struct NormK(f64);
impl Observable for NormK {
    fn evaluate(&self, v: &StateView<'_>) -> Result<Vec<(Column, f64)>> {
        Ok(vec![(Column::NormK, norm_k(v.state, self.0)?)])
    }
}

struct NormKp(f64, f64);
impl Observable for NormKp {
    fn evaluate(&self, v: &StateView<'_>) -> Result<Vec<(Column, f64)>> {
        Ok(vec![(Column::NormKp, norm_kp(v.state, self.0, self.1)?)])
    }
}

struct Sobolev(f64, bool);
impl Observable for Sobolev {
    fn evaluate(&self, v: &StateView<'_>) -> Result<Vec<(Column, f64)>> {
        Ok(vec![(Column::Sobolev, sobolev_norm(v.state, self.0, self.1)?)])
    }
}

/// Moments of the full profile. For nonlinear flows the fit runs on the deviation, whose
/// small-ξ samples carry no cancellation, and the reference moments are added exactly.
struct Moments;
impl Observable for Moments {
    fn evaluate(&self, v: &StateView<'_>) -> Result<Vec<(Column, f64)>> {
        let fit = moments_from_profile(v.state)?.fitted;
        let base = if v.reference.is_some() {
            let l = v.dynamics.reference_scale();
            Taylor::new(1.0, 0.0, 1.0 / (l * l))
        } else {
            Taylor::ZERO
        };
        Ok(vec![
            (Column::Mass, base.mass + fit.mass),
            (Column::Momentum, base.momentum + fit.momentum),
            (Column::Energy, base.energy + fit.energy),
        ])
    }
}

/// Max interior residual of the right-hand side.
struct Residual;
impl Observable for Residual {
    fn evaluate(&self, v: &StateView<'_>) -> Result<Vec<(Column, f64)>> {
        let r = if v.dynamics.is_nonlinear() {
            if v.dynamics.reference_scale() == 1.0 {
                rhs_nonlinear(&v.full()?, Derivative::FiniteDifference)?
            } else if v.state.max_abs() == 0.0 {
                GridProfile::zeros(v.state.grid().clone())
            } else {
                return Err(Error::InvalidParameter(
                    "residual is implemented for the unit-energy normalisation".into(),
                ));
            }
        } else {
            rhs_linear(v.state, Derivative::FiniteDifference)?
        };
        Ok(vec![(Column::Residual, interior_max(&r))])
    }
}

struct Barrier(Envelope);
impl Observable for Barrier {
    fn evaluate(&self, v: &StateView<'_>) -> Result<Vec<(Column, f64)>> {
        let c = barrier_envelope_check(&v.full()?, self.0);
        Ok(vec![(Column::BarrierMargin, c.worst_margin)])
    }
}

macro_rules! observable_factory {
    ($ty:ident, $name:literal, |$p:ident| $body:expr) => {
        struct $ty;
        impl Named for $ty {
            fn name(&self) -> &str {
                $name
            }
        }
        impl ObservableFactory for $ty {
            fn build(&self, $p: &ObservableParams) -> Result<Arc<dyn Observable>> {
                $body
            }
        }
    };
}

observable_factory!(NormKFactory, "norm_k", |p| Ok(Arc::new(NormK(need(p.k, "k")?))));
observable_factory!(NormKpFactory, "norm_kp", |p| Ok(Arc::new(NormKp(need(p.k, "k")?, need(p.p, "p")?))));
observable_factory!(SobolevFactory, "sobolev", |p| Ok(Arc::new(Sobolev(need(p.s, "s")?, p.homogeneous))));
observable_factory!(MomentsFactory, "moments", |_p| Ok(Arc::new(Moments)));
observable_factory!(ResidualFactory, "residual", |_p| Ok(Arc::new(Residual)));
observable_factory!(BarrierFactory, "barrier_margin", |p| {
    let e = p
        .envelope
        .ok_or_else(|| Error::InvalidParameter("barrier_margin needs an envelope".into()))?;
    Ok(Arc::new(Barrier(e)))
});

/// Registry of the built-in observables.
pub fn default_observables() -> Registry<dyn ObservableFactory> {
    let mut r: Registry<dyn ObservableFactory> = Registry::new("observable");
    r.register(Arc::new(NormKFactory));
    r.register(Arc::new(NormKpFactory));
    r.register(Arc::new(SobolevFactory));
    r.register(Arc::new(MomentsFactory));
    r.register(Arc::new(ResidualFactory));
    r.register(Arc::new(BarrierFactory));
    r
}

/// Horizon and sampling of a run.
#[derive(Clone, Copy, Debug)]
pub struct EvolveConfig {
    /// Index shift per step; `Δt = (4n/m) ln 2`.
    pub step_shift: usize,
    /// Requested final time, rounded down to a whole number of steps.
    pub t_end: f64,
    /// Steps between samples.
    pub sample_every: usize,
}

/// A flagged event during a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub time: f64,
    pub message: String,
}

/// Sampled observables of a run.
#[derive(Clone, Debug)]
pub struct RunTrace {
    pub times: Vec<f64>,
    pub rows: Vec<[Option<f64>; 8]>,
    pub diagnostics: Vec<Diagnostic>,
    pub final_state: GridProfile,
    pub dt: f64,
}

impl RunTrace {
    pub fn column(&self, c: Column) -> Vec<f64> {
        self.rows.iter().map(|r| r[c.index()].unwrap_or(f64::NAN)).collect()
    }
}

fn observe(
    view: &StateView<'_>,
    observers: &[Arc<dyn Observable>],
) -> Result<[Option<f64>; 8]> {
    let mut row = [None; 8];
    for o in observers {
        for (c, v) in o.evaluate(view)? {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("observable {}", c.header())));
            }
            row[c.index()] = Some(v);
        }
    }
    Ok(row)
}

/// Run `dynamics` from `initial` (a deviation for nonlinear flows) and sample `observers`.
pub fn evolve(
    initial: &GridProfile,
    dynamics: Arc<dyn Dynamics>,
    cfg: &EvolveConfig,
    observers: &[Arc<dyn Observable>],
) -> Result<RunTrace> {
    if cfg.sample_every == 0 {
        return Err(Error::InvalidParameter("sample_every must be positive".into()));
    }
    if !(cfg.t_end.is_finite() && cfg.t_end >= 0.0) {
        return Err(Error::InvalidParameter(format!("t_end must be non-negative, got {}", cfg.t_end)));
    }
    let grid = initial.grid().clone();
    let stepper = Stepper::new(dynamics.clone(), &grid, cfg.step_shift)?;
    let dt = stepper.dt();
    let steps = (cfg.t_end / dt + 1e-9).floor() as usize;
    let reference = if dynamics.is_nonlinear() {
        let l = dynamics.reference_scale();
        Some(sample_real(&grid, |x| phi_scaled(x, l), Taylor::new(1.0, 0.0, 1.0 / (l * l)))?)
    } else {
        None
    };
    let mut state = initial.clone().with_time(0.0);
    let mut times = Vec::new();
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    fn view<'a>(s: &'a GridProfile, d: &'a dyn Dynamics, r: Option<&'a GridProfile>) -> StateView<'a> {
        StateView { state: s, dynamics: d, reference: r }
    }
    times.push(0.0);
    rows.push(observe(&view(&state, dynamics.as_ref(), reference.as_ref()), observers)?);
    for step in 1..=steps {
        state = stepper.step(&state)?;
        if let Some(r) = &reference {
            let peak = r
                .pos()
                .iter()
                .zip(state.pos())
                .chain(r.neg().iter().zip(state.neg()))
                .map(|(a, b)| (a + b).norm())
                .fold(0.0, f64::max);
            if peak > 1.0 + 1e-9 {
                diagnostics.push(Diagnostic {
                    time: state.time,
                    message: format!("|φ| reached {peak:.12}"),
                });
            }
        }
        if step % cfg.sample_every == 0 {
            times.push(state.time);
            rows.push(observe(&view(&state, dynamics.as_ref(), reference.as_ref()), observers)?);
        }
    }
    Ok(RunTrace { times, rows, diagnostics, final_state: state, dt })
}
