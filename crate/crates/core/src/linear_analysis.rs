//! The linearised operator in physical space: its A + B splitting, dissipativity of B,
//! the I₀ functional and spectral-gap estimates in L¹(w_a).

use std::f64::consts::LN_2;
use std::sync::Arc;

use crate::closed_forms::{g0_density, h_density, zetas, Cutoffs};
use crate::error::{Error, Result};
use crate::evolution::{LinearGain, Stepper};
use crate::fourier_grid::{make_grid, DyadicGrid};
use crate::metrics::{fit_decay, DecayFit};
use crate::physical::PhysicalField;
use crate::physical_space::{
    convolution_with_kernel, nested_line_integral, profile_weighted_l1, q0_apply_kernel, to_fourier,
};
use crate::quadrature::{exp_sinh, line_integral, tanh_sinh, GAUSS4};

/// Endpoint magnitude, relative to the maximum, tolerated by the convolution operators.
const BOUNDARY_RATIO: f64 = 1e-8;

/// Weight `w_a(x) = (1+|x|)^a`.
pub fn weight(a: f64, x: f64) -> f64 {
    (1.0 + x.abs()).powf(a)
}

/// `1 − a/4 − 2^{1−a}`, the end of the admissible range of decay rates.
pub fn nu_target(a: f64) -> f64 {
    1.0 - 0.25 * a - 2f64.powf(1.0 - a)
}

#[derive(Clone, Copy, Debug)]
pub struct SplitConfig {
    pub r: f64,
    pub a: f64,
    pub nu_target: f64,
}

impl SplitConfig {
    pub fn new(r: f64, a: f64) -> Result<Self> {
        Cutoffs::new(r)?;
        if !(a > 2.0 && a < 3.0) {
            return Err(Error::InvalidParameter(format!("weight order must lie in (2, 3), got {a}")));
        }
        Ok(Self { r, a, nu_target: nu_target(a) })
    }

    pub fn cutoffs(&self) -> Cutoffs {
        Cutoffs::new(self.r).expect("radius validated on construction")
    }
}

fn steady(x: f64) -> f64 {
    h_density(x, 1.0)
}

fn check_boundary(h: &PhysicalField) -> Result<()> {
    let r = h.boundary_ratio();
    if r > BOUNDARY_RATIO {
        return Err(Error::TailsNotNegligible(r));
    }
    Ok(())
}

/// `−¼∂_x(xh)` with the grid derivative.
fn drift_part(h: &PhysicalField) -> PhysicalField {
    let d = h.derivative();
    let values = h
        .values()
        .iter()
        .zip(d.values())
        .enumerate()
        .map(|(i, (v, dv))| -0.25 * (v + h.grid().x(i) * dv))
        .collect();
    PhysicalField::new(h.grid().clone(), values).expect("finite inputs give finite drift")
}

/// `𝓛_λ h = −¼∂_x(xh) + 2Q₀(h, G)` with `G = λH(λ·)`.
fn apply_lin_scaled(h: &PhysicalField, lambda: f64) -> Result<PhysicalField> {
    check_boundary(h)?;
    let q = q0_apply_kernel(h, |x| lambda * steady(lambda * x), 1.0)?;
    drift_part(h).add(&q.scale(2.0))
}

/// `𝓛h = −¼∂_x(xh) + 2Q₀(h, H)`.
pub fn apply_lin_physical(h: &PhysicalField) -> Result<PhysicalField> {
    apply_lin_scaled(h, 1.0)
}

/// `P h = ζ₁∫h + ζ₂∫xh + ζ₃∫x²h`.
pub fn projection_p(h: &PhysicalField) -> PhysicalField {
    let m = h.moments();
    h.map(|x, _| {
        let z = zetas(x);
        z[0] * m[0] + z[1] * m[1] + z[2] * m[2]
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SplitPart {
    A1,
    A2,
    B1,
    B21,
    B22,
    B3,
}

impl SplitPart {
    pub const ALL: [SplitPart; 6] = [Self::A1, Self::A2, Self::B1, Self::B21, Self::B22, Self::B3];

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "a1" => Self::A1,
            "a2" => Self::A2,
            "b1" => Self::B1,
            "b21" => Self::B21,
            "b22" => Self::B22,
            "b3" => Self::B3,
            _ => {
                return Err(Error::UnknownName { kind: "split part", name: s.to_string() });
            }
        })
    }
}

/// `4 θ·((hρ)∗H)(2x)`.
fn a1(h: &PhysicalField, cut: &Cutoffs) -> PhysicalField {
    let hr = h.map(|x, v| v * cut.rho(x));
    let s = convolution_with_kernel(&hr, steady);
    h.map_indexed(|i, x| 4.0 * cut.theta(x) * s[i])
}

/// One part of `𝓛 = A₁ + A₂ + B₁ + B₂,₁ + B₂,₂ + B₃`.
pub fn split_apply(h: &PhysicalField, part: SplitPart, cfg: &SplitConfig) -> Result<PhysicalField> {
    check_boundary(h)?;
    let cut = cfg.cutoffs();
    Ok(match part {
        SplitPart::A1 => a1(h, &cut),
        SplitPart::A2 => projection_p(&a1(h, &cut)).scale(-1.0),
        SplitPart::B3 => projection_p(&a1(h, &cut)),
        SplitPart::B1 => drift_part(h).sub(h)?,
        SplitPart::B21 => {
            let hr = h.map(|x, v| v * cut.rho(x));
            let s = convolution_with_kernel(&hr, steady);
            h.map_indexed(|i, x| 4.0 * (1.0 - cut.theta(x)) * s[i])
        }
        SplitPart::B22 => {
            let hr = h.map(|x, v| v * (1.0 - cut.rho(x)));
            let s = convolution_with_kernel(&hr, steady);
            h.map_indexed(|i, _| 4.0 * s[i])
        }
    })
}

/// `B = B₁ + B₂,₁ + B₂,₂ + B₃`.
pub fn apply_b(h: &PhysicalField, cfg: &SplitConfig) -> Result<PhysicalField> {
    let mut acc = split_apply(h, SplitPart::B1, cfg)?;
    for part in [SplitPart::B21, SplitPart::B22, SplitPart::B3] {
        acc = acc.add(&split_apply(h, part, cfg)?)?;
    }
    Ok(acc)
}

/// Moments of `h` must vanish relative to `∫|h|(1+x²)`.
pub fn check_mean_zero(h: &PhysicalField, tol: f64) -> Result<()> {
    let m = h.moments();
    let scale = h.map(|x, v| v.abs() * (1.0 + x * x)).integral();
    for (name, v) in ["mass", "momentum", "energy"].iter().zip(m) {
        if v.abs() > tol * scale {
            return Err(Error::NotMeanZero(format!("{name} = {v:e}")));
        }
    }
    Ok(())
}

/// `∫ g·sign(h)·w_a`, with `sign` regularised as `tanh(h/ε)`, `ε = 1e−10·max|h|`.
pub fn signed_pairing(h: &PhysicalField, g: &PhysicalField, a: f64) -> Result<f64> {
    h.same_grid(g)?;
    let eps = 1e-10 * h.max_abs();
    if eps == 0.0 {
        return Ok(0.0);
    }
    let s = h.zip_map(g, |v, gv| gv * (v / eps).tanh())?;
    Ok(s.integrate_with(|x| weight(a, x)))
}

#[derive(Clone, Copy, Debug)]
pub struct Dissipativity {
    /// `∫ Bh·sign(h)·w_a`.
    pub lhs: f64,
    /// `−ν‖h‖_{L¹(w_a)}`.
    pub bound: f64,
    pub nu: f64,
    pub weighted_norm: f64,
}

impl Dissipativity {
    pub fn holds(&self) -> bool {
        self.lhs <= self.bound
    }
}

/// Dissipativity of `B + ν` tested at `h ∈ Y_a⁰` with `ν = 0.9·nu_target`.
pub fn dissipativity_value(h: &PhysicalField, cfg: &SplitConfig) -> Result<Dissipativity> {
    let nu = 0.9 * cfg.nu_target;
    if h.max_abs() == 0.0 {
        return Ok(Dissipativity { lhs: 0.0, bound: 0.0, nu, weighted_norm: 0.0 });
    }
    check_mean_zero(h, 1e-9)?;
    let bh = apply_b(h, cfg)?;
    let lhs = signed_pairing(h, &bh, cfg.a)?;
    let weighted_norm = h.map(|_, v| v.abs()).integrate_with(|x| weight(cfg.a, x));
    Ok(Dissipativity { lhs, bound: -nu * weighted_norm, nu, weighted_norm })
}

/// `k(u) = u² log|u|` with the limit 0 at the origin.
fn log_kernel(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u * u * u.abs().ln()
    }
}

/// `I₀(f,g) = ∫∫ f(x)g(y)|x−y|² log|x−y|` on a shared grid.
///
/// The inner integral uses 4-point Gauss on every cell with `g` interpolated; the two cells
/// touching the diagonal are graded towards it. Both fields must decay to `1e−10` of their
/// maximum at the grid edge.
pub fn i0(f: &PhysicalField, g: &PhysicalField) -> Result<f64> {
    f.same_grid(g)?;
    for v in [f, g] {
        let r = v.boundary_ratio();
        if r > 1e-10 {
            return Err(Error::TailsNotNegligible(r));
        }
    }
    let grid = f.grid();
    let n = grid.len();
    let h = grid.spacing();
    let x0 = grid.x(0);
    // g at the Gauss nodes of every cell.
    let offsets: Vec<(f64, f64)> = GAUSS4.iter().map(|(t, w)| (0.5 * h * (1.0 + t), 0.5 * h * w)).collect();
    let nodes: Vec<[f64; 4]> = (0..n - 1)
        .map(|j| {
            let xj = x0 + j as f64 * h;
            let mut c = [0.0; 4];
            for (q, (o, _)) in offsets.iter().enumerate() {
                c[q] = g.sample_at(xj + o);
            }
            c
        })
        .collect();
    const GRADING: usize = 8;
    let mut total = 0.0;
    for i in 0..n {
        let fi = f.values()[i];
        if fi == 0.0 {
            continue;
        }
        let xi = grid.x(i);
        let mut inner = 0.0;
        for (j, c) in nodes.iter().enumerate() {
            if j + 1 == i || j == i {
                continue;
            }
            let xj = x0 + j as f64 * h;
            for (q, (o, w)) in offsets.iter().enumerate() {
                inner += w * c[q] * log_kernel(xi - xj - o);
            }
        }
        // Cells [x_i − h, x_i] and [x_i, x_i + h], split geometrically towards x_i.
        for side in [-1.0, 1.0] {
            if (side < 0.0 && i == 0) || (side > 0.0 && i == n - 1) {
                continue;
            }
            let mut outer_edge = h;
            for level in 0..=GRADING {
                let inner_edge = if level == GRADING { 0.0 } else { outer_edge / 4.0 };
                let len = outer_edge - inner_edge;
                for (t, w) in GAUSS4 {
                    let u = inner_edge + 0.5 * len * (1.0 + t);
                    inner += 0.5 * len * w * g.sample_at(xi + side * u) * log_kernel(u);
                }
                outer_edge = inner_edge;
            }
        }
        let wt = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        total += wt * fi * inner;
    }
    Ok(total * h)
}

/// `I₀(f,g)` for densities given on the whole line, integrated by nested double-exponential
/// rules split at the origin and at the diagonal.
pub fn i0_fn(f: &dyn Fn(f64) -> f64, g: &dyn Fn(f64) -> f64, rel_tol: f64) -> Result<f64> {
    nested_line_integral(f, g, &|x, y| log_kernel(x - y), rel_tol)
}

/// `λ₀ = exp(½ I₀(H,H)) = 2√e`.
pub fn lambda0() -> f64 {
    (0.5 * (2.0 * LN_2 + 1.0)).exp()
}

/// `φ₀(x) = g₀(λ₀x)`.
pub fn phi0_density(x: f64) -> f64 {
    g0_density(lambda0() * x)
}

/// `G₀(x) = λ₀H(λ₀x)`.
pub fn g0_rescaled_steady(x: f64) -> f64 {
    let l = lambda0();
    l * steady(l * x)
}

/// `(∫ H(x)x² log|x| dx, ∫ log|x|/(1+x²) dx)`; the exact values are 1 and 0.
pub fn moment_identities(rel_tol: f64) -> Result<(f64, f64)> {
    let a = line_integral(|x: f64| steady(x) * log_kernel(x), 0.0, rel_tol)?;
    // Each half line integrates to zero; the pieces on (0,1) and (1,∞) are ∓Catalan.
    let lg = |x: f64| x.ln() / (1.0 + x * x);
    let b = 2.0 * (tanh_sinh(lg, 0.0, 1.0, rel_tol)? + exp_sinh(lg, 1.0, rel_tol)?);
    Ok((a, b))
}

/// Settings of the Fourier-side evolution behind [`gap_estimate`].
#[derive(Clone, Debug)]
pub struct GapOptions {
    pub grid: Arc<DyadicGrid>,
    pub step_shift: usize,
    /// Time between reconstructed samples.
    pub sample_interval: f64,
    /// Fit window; defaults to `[t_end/4, t_end]`.
    pub window: Option<(f64, f64)>,
}

impl Default for GapOptions {
    fn default() -> Self {
        Self {
            grid: make_grid(1e-14, 32, 56).expect("valid default grid"),
            step_shift: 1,
            sample_interval: 5.0,
            window: None,
        }
    }
}

/// Sampled weighted norms of the linearised semigroup applied to `h0`.
#[derive(Clone, Debug)]
pub struct GapTrace {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub fit: DecayFit,
}

/// Decay of `‖S(t)h₀‖_{L¹(w_a)}`: evolves the transform of `h₀` with the linear stepper and
/// reconstructs the weighted norm over the whole line at regular samples.
///
/// The drift carries mass outward like `e^{t/4}` while the gain pulls it back, so late
/// states have weighted tails far beyond the grid of `h₀`; [`profile_weighted_l1`] follows
/// them shell by shell.
pub fn gap_estimate(cfg: &SplitConfig, h0: &PhysicalField, t_end: f64) -> Result<DecayFit> {
    gap_estimate_with(cfg, h0, t_end, &GapOptions::default()).map(|t| t.fit)
}

pub fn gap_estimate_with(cfg: &SplitConfig, h0: &PhysicalField, t_end: f64, opts: &GapOptions) -> Result<GapTrace> {
    if h0.max_abs() == 0.0 {
        return Err(Error::RateUndefined("initial datum is zero".into()));
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidParameter(format!("t_end must be positive, got {t_end}")));
    }
    check_mean_zero(h0, 1e-9)?;
    let stepper = Stepper::new(Arc::new(LinearGain), &opts.grid, opts.step_shift)?;
    let mut state = to_fourier(h0, &opts.grid)?;
    let dt = stepper.dt();
    let steps = (t_end / dt + 1e-9).floor() as usize;
    let every = ((opts.sample_interval / dt).round() as usize).max(1);
    let (w0, w1) = opts.window.unwrap_or((0.25 * t_end, t_end));
    let mut times = Vec::new();
    let mut norms = Vec::new();
    for i in 0..=steps {
        if i > 0 {
            state = stepper.step(&state)?;
        }
        let t = i as f64 * dt;
        let sample = i == 0 || (i % every == 0 && t >= w0 - 1e-9 && t <= w1 + 1e-9);
        if sample {
            times.push(t);
            norms.push(profile_weighted_l1(&state, cfg.a)?);
        }
    }
    let fit = fit_decay(&times, &norms, Some((w0, w1)))?;
    Ok(GapTrace { times, norms, fit })
}

/// `𝓛₀h` assembled with `G₀ = λH(λ·)` and the conjugation `τ⁻¹𝓛(τh)`, `τf = f(·/λ)`.
pub fn rescaled_operator_check(h: &PhysicalField, lambda: f64) -> Result<(PhysicalField, PhysicalField)> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {lambda}")));
    }
    let lhs = apply_lin_scaled(h, lambda)?;
    let tau = h.map(|x, _| h.sample_at(x / lambda));
    let l = apply_lin_physical(&tau)?;
    let rhs = h.map(|x, _| l.sample_at(lambda * x));
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::normal_density;
    use crate::physical::PhysicalGrid;

    #[test]
    fn nu_target_at_default_order() {
        assert!((nu_target(2.5) - 0.021446609406726).abs() < 1e-12);
        assert!(SplitConfig::new(100.0, 3.5).is_err());
    }

    #[test]
    fn lambda0_closed_form() {
        assert!((lambda0() - 2.0 * 0.5f64.exp()).abs() < 1e-14);
        assert!((lambda0().powi(2) - 4.0 * 1f64.exp()).abs() < 1e-13);
    }

    #[test]
    fn kernel_element_is_annihilated() {
        let g = PhysicalGrid::new(160.0, 0.01).unwrap();
        let h = PhysicalField::from_fn(&g, g0_density).unwrap();
        let l = apply_lin_physical(&h).unwrap();
        assert!(l.max_abs() <= 1e-6 * h.max_abs(), "{}", l.max_abs());
    }

    #[test]
    fn gaussian_i0_matches_moment_formula() {
        let g = PhysicalGrid::new(12.0, 0.02).unwrap();
        let s2: f64 = 0.8;
        let f = PhysicalField::from_fn(&g, |x| normal_density(x, s2)).unwrap();
        let v = i0(&f, &f).unwrap();
        let sig2 = 2.0 * s2;
        let euler = 0.577_215_664_901_532_9;
        let exact = sig2 * ((2.0 - euler - LN_2) / 2.0 + 0.5 * sig2.ln());
        assert!((v - exact).abs() < 1e-8, "{v} vs {exact}");
    }

    #[test]
    fn zero_field_is_degenerate() {
        let g = PhysicalGrid::new(20.0, 0.05).unwrap();
        let cfg = SplitConfig::new(100.0, 2.5).unwrap();
        let z = PhysicalField::zeros(&g);
        let d = dissipativity_value(&z, &cfg).unwrap();
        assert_eq!((d.lhs, d.bound), (0.0, 0.0));
        assert!(matches!(gap_estimate(&cfg, &z, 10.0), Err(Error::RateUndefined(_))));
    }
}
