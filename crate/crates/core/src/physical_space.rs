//! Physical-space collision operator, weak-form functionals and the transforms linking
//! [`PhysicalField`] with [`GridProfile`].
//!
//! Transform convention: `f̂(ξ) = ∫ f(x) e^{−ixξ} dx`, inverse with the factor `1/(2π)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier_grid::{Branch, DyadicGrid, GridProfile, Taylor};
use crate::physical::{PhysicalField, PhysicalGrid};
use crate::quadrature::{exp_sinh, exp_sinh_estimate, line_integral, tanh_sinh_estimate};
use crate::special::exp_remainder;

/// Endpoint magnitude (relative to the maximum) above which a field is treated as truncated.
const TRUNCATION_RATIO: f64 = 1e-6;

/// Test functions for the weak form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeakTestFunction {
    One,
    X,
    XSquared,
    /// `x² log|x|`, with value 0 at the origin.
    XSquaredLog,
}

impl WeakTestFunction {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Self::One => 1.0,
            Self::X => x,
            Self::XSquared => x * x,
            Self::XSquaredLog => {
                if x == 0.0 {
                    0.0
                } else {
                    x * x * x.abs().ln()
                }
            }
        }
    }

    /// `φ((x+y)/2) − ½φ(x) − ½φ(y)`. Polynomial tags use the simplified form, so the
    /// brackets for `One` and `X` are identically zero.
    pub fn collision_bracket(self, x: f64, y: f64) -> f64 {
        match self {
            Self::One | Self::X => 0.0,
            Self::XSquared => -0.25 * (x - y) * (x - y),
            Self::XSquaredLog => self.eval(0.5 * (x + y)) - 0.5 * self.eval(x) - 0.5 * self.eval(y),
        }
    }
}

/// Tail model `f(x) ≈ Σ a_t (|x|/X)^{−q_t}` beyond the grid edge `X` on one side.
#[derive(Clone, Copy, Debug)]
struct Tail {
    terms: [(f64, f64); 2],
}

impl Tail {
    fn leading_exponent(&self) -> f64 {
        self.terms[0].1
    }
}

/// Fits `A r^{−q} + B r^{−q−2}` (r = |x|/X) through the samples at `X/2`, `3X/4` and `X`,
/// falling back to a single power law when the two-term fit is not well posed.
fn fit_side(y: [f64; 3], r: [f64; 3]) -> Option<Tail> {
    if y.contains(&0.0) || y.iter().any(|v| v.signum() != y[2].signum()) {
        return None;
    }
    let q_single = (y[1] / y[2]).ln() / (r[2] / r[1]).ln();
    if !q_single.is_finite() || q_single <= 1.0 {
        return None;
    }
    let single = Some(Tail { terms: [(y[2], q_single), (0.0, q_single + 2.0)] });
    if q_single > 60.0 {
        return single;
    }
    // u_k(q) = (y_k/y_3) r_k^q = A + B r_k^{−2} with A + B = 1.
    let coeffs = |q: f64| {
        let u = |k: usize| ((y[k] / y[2]).ln() + q * r[k].ln()).exp();
        let b = (u(1) - 1.0) / (r[1].powi(-2) - 1.0);
        let a = 1.0 - b;
        (a, b, u(0) - a - b * r[0].powi(-2))
    };
    let (mut q0, mut q1) = (q_single, q_single + 0.1);
    let (mut g0, mut g1) = (coeffs(q0).2, coeffs(q1).2);
    for _ in 0..60 {
        if g1 == g0 {
            break;
        }
        let q2 = q1 - g1 * (q1 - q0) / (g1 - g0);
        q0 = q1;
        g0 = g1;
        q1 = q2;
        g1 = coeffs(q1).2;
        if (q1 - q0).abs() < 1e-12 {
            let (a, b, _) = coeffs(q1);
            if q1 > 1.0 && b.abs() < 0.5 {
                return Some(Tail { terms: [(y[2] * a, q1), (y[2] * b, q1 + 2.0)] });
            }
            break;
        }
    }
    single
}

fn fit_tails(f: &PhysicalField) -> [Option<Tail>; 2] {
    let g = f.grid();
    let n = g.len();
    let nh = g.n_half();
    let x_edge = g.half_width();
    let offsets = [nh / 2, nh / 4, 0];
    let r = offsets.map(|o| g.x(n - 1 - o) / x_edge);
    let v = f.values();
    [
        fit_side(offsets.map(|o| v[o]), r),
        fit_side(offsets.map(|o| v[n - 1 - o]), r),
    ]
}

/// `∫_X^∞ x^n·tail(x) dx`, or `None` if it diverges.
fn tail_moment(t: Tail, x: f64, n: i32) -> Option<f64> {
    let mut s = 0.0;
    for (a, q) in t.terms {
        let e = q - n as f64;
        if e <= 1.0 {
            return None;
        }
        s += a * x.powi(n + 1) / (e - 1.0);
    }
    Some(s)
}

/// Moments `(∫f, ∫xf, ∫x²f)` with a fitted power-law correction for the mass outside the grid.
/// A moment whose tail integral diverges is reported as `None`.
pub fn moments_with_tails(f: &PhysicalField) -> [Option<f64>; 3] {
    let base = f.moments();
    let tails = fit_tails(f);
    let x = f.grid().half_width();
    let mut out = [Some(base[0]), Some(base[1]), Some(base[2])];
    for (n, slot) in out.iter_mut().enumerate() {
        for (side, t) in tails.iter().enumerate() {
            let Some(t) = t else { continue };
            let sign = if side == 0 && n % 2 == 1 { -1.0 } else { 1.0 };
            *slot = match (*slot, tail_moment(*t, x, n as i32)) {
                (Some(s), Some(m)) => Some(s + sign * m),
                _ => None,
            };
        }
    }
    out
}

/// Mass including the fitted tails.
pub fn mass_with_tails(f: &PhysicalField) -> f64 {
    moments_with_tails(f)[0].unwrap_or_else(|| f.integral())
}

/// `2x` leaves the grid for `|x| > X/2`; both arguments must be negligible there.
fn check_half_reach(f: &PhysicalField) -> Result<()> {
    let g = f.grid();
    let m = f.max_abs();
    if m == 0.0 {
        return Ok(());
    }
    let quarter = g.n_half() / 2;
    let v = f.values();
    let outer = v[..quarter].iter().chain(&v[v.len() - quarter..]).fold(0.0f64, |a, b| a.max(b.abs()));
    if outer > TRUNCATION_RATIO * m {
        return Err(Error::TailsNotNegligible(outer / m));
    }
    Ok(())
}

fn check_truncation(f: &PhysicalField) -> Result<()> {
    let r = f.boundary_ratio();
    if r > TRUNCATION_RATIO {
        return Err(Error::TailsNotNegligible(r));
    }
    Ok(())
}

/// `(f∗g)(2x_i)` at every node, using the exact grid index `2i − j`; `g` is zero off the grid.
pub fn convolution_at_double(f: &PhysicalField, g: &PhysicalField) -> Result<Vec<f64>> {
    f.same_grid(g)?;
    let grid = f.grid();
    let n = grid.len();
    let h = grid.spacing();
    let (fv, gv) = (f.values(), g.values());
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let two_i = 2 * i;
        let lo = two_i.saturating_sub(n - 1);
        let hi = two_i.min(n - 1);
        let mut s = 0.0;
        for j in lo..=hi {
            s += fv[j] * gv[two_i - j];
        }
        *o = s * h;
    }
    Ok(out)
}

/// `(f∗K)(2x_i)` for a kernel known in closed form, evaluated on the half-spaced lattice.
pub fn convolution_with_kernel(f: &PhysicalField, kernel: impl Fn(f64) -> f64) -> Vec<f64> {
    let grid = f.grid();
    let n = grid.len();
    let nh = grid.n_half() as i64;
    let h = grid.spacing();
    // 2x_i − x_j = (2i − j − n)h with 2i − j ∈ [−2n, 4n].
    let offset = 2 * nh;
    let table: Vec<f64> = (0..=6 * nh).map(|m| kernel((m - offset - nh) as f64 * h)).collect();
    let fv = f.values();
    (0..n)
        .map(|i| {
            let mut s = 0.0;
            for (j, v) in fv.iter().enumerate() {
                if *v != 0.0 {
                    s += v * table[(2 * i as i64 - j as i64 + offset) as usize];
                }
            }
            s * h
        })
        .collect()
}

/// `Q₀(f,g)(x) = 2(f∗g)(2x) − ½f(x)∫g − ½g(x)∫f` on a shared grid.
///
/// Both fields must be negligible (below `1e−6` of their maximum) for `|x| > X/2`, where the
/// convolution at `2x` would need values beyond the grid.
pub fn q0_apply(f: &PhysicalField, g: &PhysicalField) -> Result<PhysicalField> {
    f.same_grid(g)?;
    check_half_reach(f)?;
    check_half_reach(g)?;
    let s = convolution_at_double(f, g)?;
    let (mf, mg) = (mass_with_tails(f), mass_with_tails(g));
    let values = s
        .iter()
        .zip(f.values().iter().zip(g.values()))
        .map(|(s, (a, b))| 2.0 * s - 0.5 * a * mg - 0.5 * b * mf)
        .collect();
    PhysicalField::new(f.grid().clone(), values)
}

/// `Q₀(f,G)` for a second argument given in closed form with known mass.
pub fn q0_apply_kernel(f: &PhysicalField, kernel: impl Fn(f64) -> f64, kernel_mass: f64) -> Result<PhysicalField> {
    check_truncation(f)?;
    let mf = mass_with_tails(f);
    let s = convolution_with_kernel(f, &kernel);
    let grid = f.grid();
    let values = s
        .iter()
        .enumerate()
        .map(|(i, s)| 2.0 * s - 0.5 * f.values()[i] * kernel_mass - 0.5 * kernel(grid.x(i)) * mf)
        .collect();
    PhysicalField::new(grid.clone(), values)
}

/// Gain part `2(f∗g)(2x)` alone.
pub fn q0_gain(f: &PhysicalField, g: &PhysicalField) -> Result<PhysicalField> {
    let s = convolution_at_double(f, g)?;
    PhysicalField::new(f.grid().clone(), s.into_iter().map(|v| 2.0 * v).collect())
}

/// `∫∫ f(x)g(y)[φ((x+y)/2) − ½φ(x) − ½φ(y)] dx dy` by the tensor trapezoid rule.
pub fn weak_form_pairing(f: &PhysicalField, g: &PhysicalField, phi: WeakTestFunction) -> Result<f64> {
    f.same_grid(g)?;
    if matches!(phi, WeakTestFunction::One | WeakTestFunction::X) {
        return Ok(0.0);
    }
    let grid = f.grid();
    let n = grid.len();
    let h = grid.spacing();
    let xs = grid.points();
    let w = |i: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
    let fw: Vec<f64> = (0..n).map(|i| w(i) * f.values()[i]).collect();
    let gw: Vec<f64> = (0..n).map(|j| w(j) * g.values()[j]).collect();
    let total = match phi {
        WeakTestFunction::XSquared => {
            let mut s = 0.0;
            for i in 0..n {
                if fw[i] == 0.0 {
                    continue;
                }
                let mut row = 0.0;
                for j in 0..n {
                    let d = xs[i] - xs[j];
                    row += gw[j] * d * d;
                }
                s += fw[i] * row;
            }
            -0.25 * s
        }
        _ => {
            // φ at the midpoints (x_i + x_j)/2 lives on the half-spaced lattice indexed by i + j.
            let nh = grid.n_half() as f64;
            let half: Vec<f64> = (0..2 * n - 1).map(|k| phi.eval((k as f64 / 2.0 - nh) * h)).collect();
            let at: Vec<f64> = xs.iter().map(|&x| phi.eval(x)).collect();
            let mut s = 0.0;
            for i in 0..n {
                if fw[i] == 0.0 {
                    continue;
                }
                let mut row = 0.0;
                for j in 0..n {
                    row += gw[j] * (half[i + j] - 0.5 * at[i] - 0.5 * at[j]);
                }
                s += fw[i] * row;
            }
            s
        }
    };
    Ok(total * h * h)
}

/// The pairing for densities given as functions on the whole line. The inner integral is
/// split at the diagonal and each half line is integrated by exp-sinh.
pub fn weak_form_pairing_fn(
    f: &dyn Fn(f64) -> f64,
    g: &dyn Fn(f64) -> f64,
    phi: WeakTestFunction,
    rel_tol: f64,
) -> Result<f64> {
    if matches!(phi, WeakTestFunction::One | WeakTestFunction::X) {
        return Ok(0.0);
    }
    nested_line_integral(f, g, &|x, y| phi.collision_bracket(x, y), rel_tol)
}

/// `∫∫ f(x)g(y)k(x,y) dy dx` for densities concentrated near the origin. The inner
/// integral is split at `0` and at the diagonal `y = x`.
pub(crate) fn nested_line_integral(
    f: &dyn Fn(f64) -> f64,
    g: &dyn Fn(f64) -> f64,
    k: &dyn Fn(f64, f64) -> f64,
    rel_tol: f64,
) -> Result<f64> {
    let mut err = None;
    let outer = line_integral(
        |x: f64| {
            let fx = f(x);
            if fx == 0.0 {
                return 0.0;
            }
            let inner = |y: f64| g(y) * k(x, y);
            let (lo, hi) = if x < 0.0 { (x, 0.0) } else { (0.0, x) };
            let t = rel_tol * 0.1;
            let pieces = exp_sinh_estimate(|u| inner(hi + u), 0.0, t).and_then(|r| {
                let l = exp_sinh_estimate(|u| inner(lo - u), 0.0, t)?;
                let m = tanh_sinh_estimate(inner, lo, hi, t)?;
                let scale = r.value.abs() + l.value.abs() + m.value.abs();
                // A piece that stalls only matters if it is visible at the requested tolerance.
                for p in [r, l, m] {
                    if !p.converged && p.value.abs() > t * scale {
                        return Err(Error::Quadrature(format!("inner integral stalled at x = {x:e}")));
                    }
                }
                Ok(r.value + l.value + m.value)
            });
            match pieces {
                Ok(v) => fx * v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        rel_tol,
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(outer),
    }
}

/// Absolute values below this fraction of `∫|f|(1+x²)` count as vanishing moments.
const MOMENT_ZERO: f64 = 1e-10;

/// Transform of a physical field onto a dyadic grid.
///
/// The trapezoid sum is corrected by fitted power-law tails beyond `±X`. Leading moments that
/// vanish are removed analytically so that small-frequency values keep their relative accuracy.
/// Frequencies above `π/(2h)` are set to zero; content between `π/(2h)` and the Nyquist
/// frequency `π/h` above `1e−8` of the peak is reported as aliasing.
pub fn to_fourier(f: &PhysicalField, grid: &Arc<DyadicGrid>) -> Result<GridProfile> {
    let pg = f.grid().clone();
    let h = pg.spacing();
    let x_edge = pg.half_width();
    let tails = fit_tails(f);
    let moments = moments_with_tails(f);
    let scale = f.map(|x, v| v.abs() * (1.0 + x * x)).integral();
    let mut removed = 0usize;
    for m in moments.iter() {
        match m {
            Some(v) if v.abs() <= MOMENT_ZERO * scale => removed += 1,
            _ => break,
        }
    }
    let xs = pg.points();
    let vals = f.values();
    let n = vals.len();
    let weights: Vec<f64> = (0..n).map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h }).collect();

    let transform = |xi: f64| -> Result<Complex64> {
        let mut s = Complex64::new(0.0, 0.0);
        if removed > 0 && xi * x_edge <= 4.0 {
            for i in 0..n {
                if vals[i] != 0.0 {
                    s += exp_remainder(removed, xs[i] * xi) * (vals[i] * weights[i]);
                }
            }
        } else {
            s = rotation_sum(vals, &weights, xs[0], h, -xi) + edge_correction(vals[0], vals[n - 1], x_edge, h, xi);
            if removed > 0 {
                // Subtract the polynomial moments that were rounded to zero.
                let mut term = Complex64::new(1.0, 0.0);
                for (l, m) in f.moments().iter().enumerate().take(removed) {
                    if l > 0 {
                        term *= Complex64::new(0.0, -xi) / l as f64;
                    }
                    s -= term * m;
                }
            }
        }
        for (side, t) in tails.iter().enumerate() {
            let Some(t) = t else { continue };
            // Left tail: ∫_{−∞}^{−X} c|x|^{−q}e^{−ixξ}dx = ∫_X^∞ c x^{−q} e^{ixξ} dx.
            let eta = if side == 0 { -xi } else { xi };
            let mut v = tail_transform(*t, x_edge, eta)?;
            if removed > 0 {
                let mut term = Complex64::new(1.0, 0.0);
                for l in 0..removed {
                    if l > 0 {
                        term *= Complex64::new(0.0, -eta) / l as f64;
                    }
                    if let Some(m) = tail_moment(*t, x_edge, l as i32) {
                        v -= term * m;
                    }
                }
            }
            s += v;
        }
        Ok(s)
    };

    let cutoff = PI / (2.0 * h);
    let mut pos = Vec::with_capacity(grid.len());
    let mut peak: f64 = 0.0;
    for &xi in grid.xi() {
        let v = if xi > cutoff { Complex64::new(0.0, 0.0) } else { transform(xi)? };
        peak = peak.max(v.norm());
        pos.push(v);
    }
    let mut leak: f64 = 0.0;
    for k in 1..=16 {
        let xi = cutoff * (1.0 + k as f64 / 16.0);
        leak = leak.max(transform(xi)?.norm());
    }
    if grid.xi_max() < cutoff {
        for k in 1..=16 {
            let xi = grid.xi_max() * 2f64.powf(k as f64 / 16.0);
            if xi <= cutoff {
                leak = leak.max(transform(xi)?.norm());
            }
        }
    }
    if peak > 0.0 && leak > 1e-8 * peak {
        return Err(Error::Aliasing(leak / peak));
    }
    let neg = pos.iter().map(|v| v.conj()).collect();
    let clean = |i: usize| {
        if i < removed {
            0.0
        } else {
            moments[i].unwrap_or(0.0)
        }
    };
    let taylor = Taylor::new(clean(0), clean(1), clean(2));
    let mut p = GridProfile::new(grid.clone(), pos, neg, taylor)?;
    // Heavy tails make the profile no smoother than |ξ|^{q−1} at the origin.
    let q_min = tails.iter().flatten().map(|t| t.leading_exponent()).fold(f64::INFINITY, f64::min);
    if q_min.is_finite() && q_min - 1.0 < p.small_xi_exponent {
        p.small_xi_exponent = (q_min - 1.0).max(0.5);
    }
    Ok(p)
}

/// Difference between the continuous tail integral and the lattice sum continuing the grid
/// past `±X`, to leading order in the local variation of `f`:
/// `−i e^{∓iXξ} f(±X) [(h/2)cot(ξh/2) − 1/ξ]` on the right, mirrored on the left.
fn edge_correction(left: f64, right: f64, x: f64, h: f64, xi: f64) -> Complex64 {
    if xi == 0.0 || (left == 0.0 && right == 0.0) {
        return Complex64::new(0.0, 0.0);
    }
    let t = xi * h;
    let b = if t.abs() < 1e-3 {
        -xi * h * h / 12.0 * (1.0 + t * t / 60.0)
    } else {
        0.5 * h / (0.5 * t).tan() - 1.0 / xi
    };
    let i = Complex64::new(0.0, 1.0);
    -i * Complex64::from_polar(right * b, -x * xi) + i * Complex64::from_polar(left * b, x * xi)
}

/// `Σ_i w_i v_i e^{iω x_i}` on the uniform grid `x_i = x0 + i·h`, re-seeding the rotation often.
fn rotation_sum(vals: &[f64], weights: &[f64], x0: f64, h: f64, omega: f64) -> Complex64 {
    let step = Complex64::from_polar(1.0, omega * h);
    let mut s = Complex64::new(0.0, 0.0);
    let mut rot = Complex64::new(0.0, 0.0);
    for (i, (v, w)) in vals.iter().zip(weights).enumerate() {
        if i % 256 == 0 {
            rot = Complex64::from_polar(1.0, omega * (x0 + i as f64 * h));
        }
        s += rot * (v * w);
        rot *= step;
    }
    s
}

/// `∫_X^∞ tail(x) e^{−ixη} dx`, each power term along the rotated ray `x = X(1 − i·sgn(η)v)`.
fn tail_transform(t: Tail, x: f64, eta: f64) -> Result<Complex64> {
    if eta == 0.0 {
        return Ok(Complex64::new(tail_moment(t, x, 0).unwrap_or(0.0), 0.0));
    }
    let s = eta.signum();
    let decay = x * eta.abs();
    let phase = Complex64::from_polar(1.0, -x * eta);
    let mut total = Complex64::new(0.0, 0.0);
    for (a, q) in t.terms {
        if a == 0.0 {
            continue;
        }
        let integral = exp_sinh(
            |v: f64| Complex64::new(1.0, -s * v).powf(-q) * (-decay * v).exp(),
            0.0,
            1e-12,
        )?;
        total += Complex64::new(0.0, -s) * a * x * phase * integral;
    }
    Ok(total)
}

/// Values of a profile at `|ξ| = r` on the positive branch, including the model below the
/// grid and zero above it.
fn profile_at(p: &GridProfile, r: f64) -> Complex64 {
    if r == 0.0 {
        return Complex64::new(p.taylor.mass, 0.0);
    }
    if r < p.grid().xi_min() {
        return p.below_grid(Branch::Pos, r);
    }
    interpolate(p, r, |v, _| v)
}

/// [`profile_at`] minus the Taylor polynomial, interpolating the residual itself so that the
/// polynomial part adds no interpolation error.
fn residual_at(p: &GridProfile, r: f64) -> Complex64 {
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if r < p.grid().xi_min() {
        return p.below_grid(Branch::Pos, r) - p.taylor.eval(r);
    }
    interpolate(p, r, |v, xi| v - p.taylor.eval(xi))
}

/// 10-point Lagrange interpolation in `ln ξ` of `f(p(ξ_j), ξ_j)`; zero above the grid.
fn interpolate(p: &GridProfile, r: f64, f: impl Fn(Complex64, f64) -> Complex64) -> Complex64 {
    let grid = p.grid();
    let xi = grid.xi();
    let n = xi.len();
    if r > xi[n - 1] {
        return Complex64::new(0.0, 0.0);
    }
    let u = (r / xi[0]).ln() / grid.log_step();
    let j = (u.floor() as usize).min(n - 2);
    let width = 10.min(n);
    let start = (j as i64 - 4).clamp(0, (n - width) as i64) as usize;
    let vals = p.pos();
    let mut s = Complex64::new(0.0, 0.0);
    for a in start..start + width {
        let mut w = 1.0;
        for b in start..start + width {
            if a != b {
                w *= (u - b as f64) / (a as f64 - b as f64);
            }
        }
        s += f(vals[a], xi[a]) * w;
    }
    s
}

/// Inverse transform `h(x) = (1/2π)∫ p(ξ)e^{ixξ} dξ` onto a physical grid.
///
/// Uses a uniform frequency lattice of spacing `min(0.01, π/(16X))`, so periodic images sit at
/// least `31X` away, truncated where the profile has decayed below `1e−16` of its peak.
pub fn to_physical(p: &GridProfile, xgrid: &Arc<PhysicalGrid>) -> Result<PhysicalField> {
    let peak = p.max_abs().max(p.taylor.mass.abs());
    let defect = p.hermitian_defect();
    if defect > 1e-10 * peak.max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian(defect));
    }
    if peak == 0.0 {
        return Ok(PhysicalField::zeros(xgrid));
    }
    let top = significant_top(p, peak);
    let dxi = 0.01f64.min(PI / (16.0 * xgrid.half_width()));
    let m = (top / dxi).ceil() as usize + 1;
    let samples: Vec<Complex64> = (0..=m)
        .map(|k| {
            let v = profile_at(p, k as f64 * dxi);
            if k == 0 {
                v * 0.5
            } else {
                v
            }
        })
        .collect();
    let mut values = Vec::with_capacity(xgrid.len());
    for i in 0..xgrid.len() {
        let x = xgrid.x(i);
        let step = Complex64::from_polar(1.0, x * dxi);
        let mut rot = Complex64::new(1.0, 0.0);
        let mut s = 0.0;
        for (k, v) in samples.iter().enumerate() {
            if k % 256 == 0 {
                rot = Complex64::from_polar(1.0, x * dxi * k as f64);
            }
            s += (v * rot).re;
            rot *= step;
        }
        values.push(s * dxi / PI);
    }
    PhysicalField::new(xgrid.clone(), values)
}

/// Grid frequency above which the profile stays below `1e−16` of its peak.
fn significant_top(p: &GridProfile, peak: f64) -> f64 {
    let xi = p.grid().xi();
    p.pos()
        .iter()
        .rposition(|v| v.norm() > 1e-16 * peak)
        .map(|j| xi[(j + 1).min(xi.len() - 1)])
        .unwrap_or(xi[0])
}

/// The shell starting at `x` is reconstructed from frequencies below about `SHELL_BAND / x`.
const SHELL_BAND: f64 = 64.0;
/// Low-pass window `½erfc((ξ/c − 1.6)/0.15)`; it is below `1e−17` from `WINDOW_END·c` on.
const WINDOW_END: f64 = 2.5;
/// Frequency spacing `2π/(IMAGE_REACH·x_outer)` keeps periodic images far from each shell.
const IMAGE_REACH: f64 = 32.0;
const MAX_SHELLS: usize = 400;

/// Weighted norm `∫|h|(1+|x|)^a dx` of the inverse transform `h` of `p`, over the whole line.
///
/// `[−1, 1]` and the dyadic shells `±[2^ℓ, 2^{ℓ+1}]` are reconstructed separately, the shell
/// starting at `x` from frequencies below about `64/x` only. Shells are added until they
/// become negligible, reach the rounding level of the lattice sum, or (below the grid) settle
/// into a geometric decay; the geometric remainder past the last resolved shell is added in
/// closed form. Shell contributions that stop decreasing are reported as a divergent tail.
pub fn profile_weighted_l1(p: &GridProfile, a: f64) -> Result<f64> {
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::InvalidParameter(format!("weight order must be non-negative, got {a}")));
    }
    let peak = p.max_abs().max(p.taylor.mass.abs());
    let defect = p.hermitian_defect();
    if defect > 1e-10 * peak.max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian(defect));
    }
    if peak == 0.0 {
        return Ok(0.0);
    }
    let top = significant_top(p, peak);
    let (mut total, _) = shell_integral(p, 0.0, 1.0, top, None, a);
    let below_grid = (SHELL_BAND / p.grid().xi_min()).log2().ceil().max(0.0) as usize;
    let divergent = |lo: f64| {
        Err(Error::DivergentTail(format!("shell contributions stop decreasing near |x| = {lo:e} (a = {a})")))
    };
    let mut prev: Option<f64> = None;
    let mut prev_ratio = f64::NAN;
    for l in 0..MAX_SHELLS {
        let lo = (l as f64).exp2();
        let c = SHELL_BAND / lo;
        let (piece, noise) = if WINDOW_END * c >= top {
            shell_integral(p, lo, 2.0 * lo, top, None, a)
        } else {
            shell_integral(p, lo, 2.0 * lo, WINDOW_END * c, Some(c), a)
        };
        if !piece.is_finite() {
            return Err(Error::NonFinite("weighted shell integral".into()));
        }
        let ratio = prev.map_or(0.0, |q| piece / q);
        if piece <= 10.0 * noise {
            // Nothing further is resolved; continue the last trend geometrically.
            return match prev {
                Some(q) if prev_ratio < 1.0 => Ok(total + q * prev_ratio / (1.0 - prev_ratio)),
                Some(_) if prev_ratio.is_nan() => Ok(total),
                Some(_) => divergent(lo),
                None => Ok(total),
            };
        }
        total += piece;
        if piece <= 1e-13 * total {
            return Ok(total);
        }
        if l > below_grid {
            if ratio >= 1.0 {
                return divergent(lo);
            }
            if (ratio - prev_ratio).abs() <= 1e-3 * ratio {
                return Ok(total + piece * ratio / (1.0 - ratio));
            }
        }
        if prev.is_some() {
            prev_ratio = ratio;
        }
        prev = Some(piece);
    }
    Err(Error::DivergentTail(format!("no convergence within {MAX_SHELLS} dyadic shells (a = {a})")))
}

/// `∫_{lo ≤ |x| ≤ hi} |h|(1+|x|)^a` by Simpson's rule, with `h` summed from lattice
/// frequencies below `band`, optionally under the low-pass window of scale `c`. Also returns
/// the rounding level of that integral.
fn shell_integral(p: &GridProfile, lo: f64, hi: f64, band: f64, window: Option<f64>, a: f64) -> (f64, f64) {
    let dxi = 2.0 * PI / (IMAGE_REACH * hi);
    let m = (band / dxi).ceil() as usize;
    let mut scale = 0.0;
    let samples: Vec<Complex64> = (0..=m)
        .map(|k| {
            let r = k as f64 * dxi;
            let v = match window {
                // The Taylor polynomial transforms to a distribution at the origin, so away
                // from it only the rest of the profile contributes.
                Some(c) => {
                    let chi = 0.5 * libm::erfc((r / c - 1.6) / 0.15);
                    let v = residual_at(p, r);
                    scale += (v.norm() + p.taylor.eval(r).norm()) * chi;
                    v * chi
                }
                None => {
                    let v = profile_at(p, r);
                    scale += v.norm();
                    v
                }
            };
            if k == 0 {
                v * 0.5
            } else {
                v
            }
        })
        .collect();
    let n = ((8.0 * (hi - lo) * band / PI).ceil() as usize).max(4096).next_multiple_of(2);
    let dx = (hi - lo) / n as f64;
    let mut s = 0.0;
    for i in 0..=n {
        let x = lo + i as f64 * dx;
        let step = Complex64::from_polar(1.0, x * dxi);
        let mut rot = Complex64::new(1.0, 0.0);
        let (mut plus, mut minus) = (0.0, 0.0);
        for (k, v) in samples.iter().enumerate() {
            if k % 256 == 0 {
                rot = Complex64::from_polar(1.0, x * dxi * k as f64);
            }
            plus += v.re * rot.re - v.im * rot.im;
            minus += v.re * rot.re + v.im * rot.im;
            rot *= step;
        }
        let c = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        s += c * (plus.abs() + minus.abs()) * (1.0 + x).powf(a);
    }
    s /= 3.0;
    let noise = 1e-15 * scale * dxi / PI * (hi - lo) * (1.0 + hi).powf(a);
    (s * dx * dxi / PI, noise)
}

/// `(∫|f|, ∫x²|f|, (∫f²)^{1/2})`, the three quantities of the L¹–L² interpolation.
pub fn l1_interpolation_sides(f: &PhysicalField) -> (f64, f64, f64) {
    let abs = f.map(|_, v| v.abs());
    let l1 = abs.integral();
    let m2 = abs.integrate_with(|x| x * x);
    let l2 = f.map(|_, v| v * v).integral().sqrt();
    (l1, m2, l2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::{gaussian_profile, h_density, normal_density, phi_steady};
    use crate::fourier_grid::{make_grid, sample_real};

    fn rel_sup(a: &PhysicalField, b: &PhysicalField) -> f64 {
        a.sup_distance(b).unwrap() / b.max_abs()
    }

    #[test]
    fn steady_profile_balances_drift() {
        let g = PhysicalGrid::new(200.0, 0.05).unwrap();
        let h = PhysicalField::from_fn(&g, |x| h_density(x, 1.0)).unwrap();
        let narrow = PhysicalGrid::new(40.0, 0.05).unwrap();
        let short = PhysicalField::from_fn(&narrow, |x| h_density(x, 1.0)).unwrap();
        assert!(matches!(q0_apply(&short, &short), Err(Error::TailsNotNegligible(_))));
        let q = q0_apply(&h, &h).unwrap();
        let drift = PhysicalField::from_fn(&g, |x| 0.25 * (2.0 - 6.0 * x * x) / (PI * (1.0 + x * x).powi(3))).unwrap();
        assert!(rel_sup(&q, &drift) < 1e-6, "{}", rel_sup(&q, &drift));
    }

    #[test]
    fn collision_conserves_mass_and_momentum() {
        let g = PhysicalGrid::new(20.0, 0.02).unwrap();
        let f = PhysicalField::from_fn(&g, |x| normal_density(x - 0.7, 1.3) + 0.4 * normal_density(x + 1.0, 0.5)).unwrap();
        let q = q0_apply(&f, &f).unwrap();
        let m = q.moments();
        assert!(m[0].abs() < 1e-8 && m[1].abs() < 1e-8, "{m:?}");
    }

    #[test]
    fn polynomial_brackets_vanish() {
        let g = PhysicalGrid::new(10.0, 0.1).unwrap();
        let f = PhysicalField::from_fn(&g, |x| normal_density(x, 1.0)).unwrap();
        assert_eq!(weak_form_pairing(&f, &f, WeakTestFunction::One).unwrap(), 0.0);
        assert_eq!(weak_form_pairing(&f, &f, WeakTestFunction::X).unwrap(), 0.0);
        assert_eq!(WeakTestFunction::XSquaredLog.eval(0.0), 0.0);
    }

    #[test]
    fn energy_pairing_of_steady_profile() {
        let h = |x: f64| h_density(x, 1.0);
        let v = weak_form_pairing_fn(&h, &h, WeakTestFunction::XSquared, 1e-11).unwrap();
        assert!((v + 0.5).abs() < 1e-8, "{v}");
    }

    #[test]
    fn fourier_transform_of_steady_profile() {
        let pg = PhysicalGrid::new(40.0, 0.01).unwrap();
        let grid = make_grid(1e-4, 32, 20).unwrap();
        let h = PhysicalField::from_fn(&pg, |x| h_density(x, 1.0)).unwrap();
        let p = to_fourier(&h, &grid).unwrap();
        let exact = sample_real(&grid, phi_steady, Taylor::UNIT).unwrap();
        assert!(p.sup_distance(&exact).unwrap() < 1e-6, "{}", p.sup_distance(&exact).unwrap());
        assert!((p.taylor.energy - 1.0).abs() < 1e-6);
    }

    #[test]
    fn inverse_transform_of_gaussian() {
        let pg = PhysicalGrid::new(12.0, 0.05).unwrap();
        let grid = make_grid(1e-4, 32, 20).unwrap();
        let p = sample_real(&grid, gaussian_profile, Taylor::new(1.0, 0.0, 1.0)).unwrap();
        let f = to_physical(&p, &pg).unwrap();
        let exact = PhysicalField::from_fn(&pg, |x| normal_density(x, 1.0)).unwrap();
        assert!(rel_sup(&f, &exact) < 1e-8, "{}", rel_sup(&f, &exact));
    }

    #[test]
    fn weighted_norm_of_heavy_tailed_profile() {
        // f = (1+x²)^{−3}·8/(3π) has transform e^{−|ξ|}(1+|ξ|+ξ²/3); f'' has −ξ² times that.
        let grid = make_grid(1e-10, 32, 45).unwrap();
        let t5 = |xi: f64| (-xi.abs()).exp() * (1.0 + xi.abs() + xi * xi / 3.0);
        let c = 8.0 / (3.0 * PI);
        let p = sample_real(&grid, t5, Taylor::new(1.0, 0.0, 1.0 / 3.0)).unwrap();
        for (a, tol) in [(0.0, 1e-8), (2.5, 1e-6)] {
            let want = 2.0 * exp_sinh(|x: f64| c * (1.0 + x).powf(a) / (1.0 + x * x).powi(3), 0.0, 1e-14).unwrap();
            let got = profile_weighted_l1(&p, a).unwrap();
            assert!((got - want).abs() < tol * want, "a = {a}: {got} vs {want}");
        }
        assert!(matches!(profile_weighted_l1(&p, 5.5), Err(Error::DivergentTail(_))));

        let d2 = sample_real(&grid, |xi| -xi * xi * t5(xi), Taylor::new(0.0, 0.0, 2.0)).unwrap();
        let f2 = |x: f64| c * (42.0 * x * x - 6.0) / (1.0 + x * x).powi(5);
        let root = (1.0f64 / 7.0).sqrt();
        for (a, tol) in [(2.5, 1e-6), (5.5, 1e-4)] {
            let g = |x: f64| f2(x).abs() * (1.0 + x).powf(a);
            let want = 2.0
                * (crate::quadrature::tanh_sinh(g, 0.0, root, 1e-14).unwrap() + exp_sinh(g, root, 1e-14).unwrap());
            let got = profile_weighted_l1(&d2, a).unwrap();
            assert!((got - want).abs() < tol * want, "a = {a}: {got} vs {want}");
        }
        assert!(matches!(profile_weighted_l1(&d2, 9.5), Err(Error::DivergentTail(_))));
    }

    #[test]
    fn interpolation_sides_scale_linearly() {
        let g = PhysicalGrid::new(20.0, 0.05).unwrap();
        let f = PhysicalField::from_fn(&g, |x| h_density(x, 1.0) - h_density(x, 2.0)).unwrap();
        let (a, b, c) = l1_interpolation_sides(&f);
        let (a2, b2, c2) = l1_interpolation_sides(&f.scale(2.0));
        assert!(a > 0.0 && b.is_finite() && c > 0.0);
        assert!((a2 - 2.0 * a).abs() < 1e-14 && (b2 - 2.0 * b).abs() < 1e-12 && (c2 - 2.0 * c).abs() < 1e-14);
        assert_eq!(l1_interpolation_sides(&PhysicalField::zeros(&g)), (0.0, 0.0, 0.0));
    }
}
