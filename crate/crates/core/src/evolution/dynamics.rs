use std::sync::Arc;

use crate::closed_forms::{phi_scaled, psi0};
use crate::error::{Error, Result};
use crate::fourier_grid::{drift_decay_apply, halve_argument, sample_real, DyadicGrid, GridProfile, Taylor};
use crate::registry::{Named, Registry};

/// One flow of the form `∂_t ψ = ¼ξ∂_ξψ − ψ + Γ[ψ]`, stepped in Duhamel form.
pub trait Dynamics: Named + Send + Sync {
    /// Scale λ of the steady state `Φ(ξ/λ)` that enters the gain.
    fn reference_scale(&self) -> f64;

    /// Whether the stepped state is a deviation from the steady state of a nonlinear flow.
    fn is_nonlinear(&self) -> bool;

    /// Gain term; `half_ref` holds `Φ_λ(ξ/2)`.
    fn gain(&self, state: &GridProfile, half_ref: &GridProfile) -> Result<GridProfile>;

    /// A component of `state` that is exactly stationary and can be carried through a step
    /// unchanged.
    fn stationary_part(&self, state: &GridProfile) -> Result<Option<GridProfile>> {
        let _ = state;
        Ok(None)
    }
}

/// Gain `ψ(ξ/2)(ψ(ξ/2) + 2Φ_λ(ξ/2))` of the deviation `ψ = φ − Φ_λ`.
pub struct NonlinearGain {
    pub lambda: f64,
}

impl Named for NonlinearGain {
    fn name(&self) -> &str {
        "nonlinear"
    }
}

impl Dynamics for NonlinearGain {
    fn reference_scale(&self) -> f64 {
        self.lambda
    }
    fn is_nonlinear(&self) -> bool {
        true
    }
    fn gain(&self, state: &GridProfile, half_ref: &GridProfile) -> Result<GridProfile> {
        let l = halve_argument(state);
        l.mul(&l.add(&half_ref.scale(2.0))?)
    }
}

/// Gain `2ψ(ξ/2)Φ(ξ/2)` of the linearised flow. Components along the kernel element ψ₀ are
/// carried exactly.
pub struct LinearGain;

impl Named for LinearGain {
    fn name(&self) -> &str {
        "linear"
    }
}

impl Dynamics for LinearGain {
    fn reference_scale(&self) -> f64 {
        1.0
    }
    fn is_nonlinear(&self) -> bool {
        false
    }
    fn gain(&self, state: &GridProfile, half_ref: &GridProfile) -> Result<GridProfile> {
        halve_argument(state).mul(half_ref).map(|p| p.scale(2.0))
    }
    fn stationary_part(&self, state: &GridProfile) -> Result<Option<GridProfile>> {
        let t = state.taylor;
        if t.mass != 0.0 || t.momentum != 0.0 || t.energy == 0.0 {
            return Ok(None);
        }
        // ψ₀ = ξ² has energy coefficient −2.
        let s = -0.5 * t.energy;
        let k = sample_real(state.grid(), psi0, Taylor::new(0.0, 0.0, -2.0))?;
        Ok(Some(k.scale(s)))
    }
}

/// Builds a flow from its name and the reference scale.
pub trait DynamicsFactory: Named + Send + Sync {
    fn build(&self, lambda: f64) -> Result<Arc<dyn Dynamics>>;
}

struct NonlinearFactory;
impl Named for NonlinearFactory {
    fn name(&self) -> &str {
        "nonlinear"
    }
}
impl DynamicsFactory for NonlinearFactory {
    fn build(&self, lambda: f64) -> Result<Arc<dyn Dynamics>> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("reference scale must be positive, got {lambda}")));
        }
        Ok(Arc::new(NonlinearGain { lambda }))
    }
}

struct LinearFactory;
impl Named for LinearFactory {
    fn name(&self) -> &str {
        "linear"
    }
}
impl DynamicsFactory for LinearFactory {
    fn build(&self, lambda: f64) -> Result<Arc<dyn Dynamics>> {
        if lambda != 1.0 {
            return Err(Error::InvalidParameter("the linearised flow is taken around Φ itself".into()));
        }
        Ok(Arc::new(LinearGain))
    }
}

/// Registry holding `nonlinear` and `linear`.
pub fn default_dynamics() -> Registry<dyn DynamicsFactory> {
    let mut r: Registry<dyn DynamicsFactory> = Registry::new("dynamics");
    r.register(Arc::new(NonlinearFactory));
    r.register(Arc::new(LinearFactory));
    r
}

/// Trapezoidal Duhamel stepper with step `Δt = (4n/m) ln 2`.
pub struct Stepper {
    dynamics: Arc<dyn Dynamics>,
    n: usize,
    dt: f64,
    half_ref: GridProfile,
}

impl Stepper {
    pub fn new(dynamics: Arc<dyn Dynamics>, grid: &Arc<DyadicGrid>, n: usize) -> Result<Self> {
        if n == 0 || n >= grid.len() {
            return Err(Error::InadmissibleStep(format!(
                "shift must lie in 1..{}, got {n}",
                grid.len()
            )));
        }
        let lambda = dynamics.reference_scale();
        let half_ref = sample_real(
            grid,
            |x| phi_scaled(0.5 * x, lambda),
            Taylor::new(1.0, 0.0, 0.25 / (lambda * lambda)),
        )?;
        Ok(Self { dynamics, n, dt: grid.admissible_step(n), half_ref })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn shift(&self) -> usize {
        self.n
    }
    pub fn dynamics(&self) -> &Arc<dyn Dynamics> {
        &self.dynamics
    }
    /// `Φ_λ(ξ/2)` on the stepper's grid.
    pub fn half_reference(&self) -> &GridProfile {
        &self.half_ref
    }

    /// Predictor `ψ* = Tψ + Δt·TΓ[ψ]`, corrector `ψ⁺ = Tψ + (Δt/2)(TΓ[ψ] + Γ[ψ*])`.
    pub fn step(&self, state: &GridProfile) -> Result<GridProfile> {
        if **state.grid() != **self.half_ref.grid() {
            return Err(Error::GridMismatch);
        }
        let time = state.time;
        let fixed = self.dynamics.stationary_part(state)?;
        let moving = match &fixed {
            Some(f) => state.sub(f)?,
            None => state.clone(),
        };
        let t_state = drift_decay_apply(&moving, self.n, 1.0);
        let gain = self.dynamics.gain(&moving, &self.half_ref)?;
        let t_gain = drift_decay_apply(&gain, self.n, 1.0);
        let predictor = t_state.add(&t_gain.scale(self.dt))?;
        let gain_pred = self.dynamics.gain(&predictor, &self.half_ref)?;
        let mut next = t_state.add(&t_gain.add(&gain_pred)?.scale(0.5 * self.dt))?;
        if let Some(f) = fixed {
            next = next.add(&f)?;
        }
        next.time = time + self.dt;
        next.small_xi_exponent = state.small_xi_exponent;
        Ok(next)
    }
}

/// One nonlinear step of a full profile φ with Taylor model (1, 0, 1).
pub fn step_nonlinear(phi: &GridProfile, n: usize) -> Result<GridProfile> {
    let grid = phi.grid();
    let steady = sample_real(grid, crate::closed_forms::phi_steady, Taylor::UNIT)?;
    let deviation = phi.sub(&steady)?;
    let stepper = Stepper::new(Arc::new(NonlinearGain { lambda: 1.0 }), grid, n)?;
    let mut next = stepper.step(&deviation.with_time(phi.time))?.add(&steady)?;
    next.small_xi_exponent = phi.small_xi_exponent;
    Ok(next)
}

/// One linearised step. Mass and momentum must vanish.
pub fn step_linear(psi: &GridProfile, n: usize) -> Result<GridProfile> {
    if psi.taylor.mass != 0.0 || psi.taylor.momentum != 0.0 {
        return Err(Error::NotMeanZero(format!("taylor model {:?}", psi.taylor)));
    }
    Stepper::new(Arc::new(LinearGain), psi.grid(), n)?.step(psi)
}
