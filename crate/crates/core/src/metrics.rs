//! Fourier-based distances, Sobolev norms, rates and decay fits.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier_grid::{Branch, GridProfile, Taylor};
use crate::physical::PhysicalField;
use crate::special::exp_remainder;

const BRANCHES: [Branch; 2] = [Branch::Pos, Branch::Neg];

/// Small-ξ behaviour `|p(ξ)| ≈ c·|ξ|^e` on one branch.
fn small_xi_law(p: &GridProfile, b: Branch) -> (f64, f64) {
    match p.taylor.leading() {
        Some((order, c)) => (c, order as f64),
        None => {
            let e = p.power_law_exponent(b);
            let v0 = p.branch(b)[0].norm();
            (v0 / p.grid().xi_min().powf(e), e)
        }
    }
}

/// |||p|||_k = sup |p(ξ)|/|ξ|^k.
pub fn norm_k(p: &GridProfile, k: f64) -> Result<f64> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidParameter(format!("k must be positive, got {k}")));
    }
    let xi = p.grid().xi();
    let mut sup: f64 = 0.0;
    for b in BRANCHES {
        for (x, v) in xi.iter().zip(p.branch(b)) {
            sup = sup.max(v.norm() / x.powf(k));
        }
        let (c, e) = small_xi_law(p, b);
        if c == 0.0 {
            continue;
        }
        if e < k - 1e-12 {
            return Err(Error::InfiniteNorm(format!(
                "small-ξ behaviour |ξ|^{e} is too weak for k = {k}"
            )));
        }
        if (e - k).abs() <= 1e-12 {
            sup = sup.max(c);
        } else if !p.taylor.is_zero() {
            // The Taylor model is not monotone in general; scan it below the grid.
            let x0 = p.grid().xi_min();
            for i in 1..=160 {
                let r = x0 * 2f64.powf(-(i as f64) / 8.0);
                sup = sup.max(p.below_grid(b, r).norm() / r.powf(k));
            }
        }
    }
    Ok(sup)
}

/// ∫_0^{ξ0} c^q ξ^{γ−1} dξ for the small-ξ law; `gamma` includes the log-measure factor.
fn below_grid_power_integral(c: f64, gamma: f64, x0: f64, what: &str) -> Result<f64> {
    if c == 0.0 {
        return Ok(0.0);
    }
    if gamma <= 0.0 {
        return Err(Error::InfiniteNorm(format!("{what} diverges at ξ → 0")));
    }
    Ok(x0.powf(gamma) / gamma)
}

/// Log-trapezoid for ∫ g(ξ) dξ = ∫ g(e^u)e^u du over the grid, with an Euler-Maclaurin
/// correction at the bottom end using the known small-ξ slope `gamma` of the log integrand.
fn log_trapezoid(values: &[f64], xi: &[f64], delta: f64, gamma: f64) -> f64 {
    let n = values.len();
    let mut s = 0.0;
    for j in 0..n {
        let c = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
        s += c * values[j] * xi[j];
    }
    let first = values[0] * xi[0];
    delta * s + delta * delta / 12.0 * gamma * first
}

fn check_tail(values: &[f64], xi: &[f64], m: usize, what: &str) -> Result<()> {
    let n = values.len();
    if n <= m {
        return Ok(());
    }
    let g_last = values[n - 1] * xi[n - 1];
    let g_prev = values[n - 1 - m] * xi[n - 1 - m];
    let peak = values.iter().zip(xi).map(|(v, x)| v * x).fold(0.0, f64::max);
    if g_last > 1e-14 * peak && g_last >= g_prev {
        return Err(Error::DivergentTail(format!("{what}: integrand does not decay over the top octave")));
    }
    Ok(())
}

/// |||p|||_{k,q} = (∫ |p(ξ)|^q / |ξ|^{kq} dξ)^{1/q}.
pub fn norm_kp(p: &GridProfile, k: f64, q: f64) -> Result<f64> {
    if !(q.is_finite() && q >= 1.0) {
        return Err(Error::InvalidParameter(format!("p must be ≥ 1, got {q}")));
    }
    if !(k > 1.0 / q && k < 3.0 + 1.0 / q) {
        return Err(Error::OutsideWindow { k, p: q });
    }
    let grid = p.grid();
    let xi = grid.xi();
    let mut total = 0.0;
    for b in BRANCHES {
        let vals: Vec<f64> = xi
            .iter()
            .zip(p.branch(b))
            .map(|(x, v)| v.norm().powf(q) / x.powf(k * q))
            .collect();
        check_tail(&vals, xi, grid.points_per_octave(), "norm_kp")?;
        let (c, e) = small_xi_law(p, b);
        let gamma = (e - k) * q + 1.0;
        total += log_trapezoid(&vals, xi, grid.log_step(), gamma);
        total += c.powf(q) * below_grid_power_integral(c, gamma, grid.xi_min(), "norm_kp")?;
    }
    Ok(total.powf(1.0 / q))
}

/// (∫ w(ξ)|p(ξ)|² dξ)^{1/2} with w = (1+ξ²)^s, or |ξ|^{2s} when `homogeneous`.
/// Fourier-side values; see [`physical_l2_norm`] for the Plancherel convention.
pub fn sobolev_norm(p: &GridProfile, s: f64, homogeneous: bool) -> Result<f64> {
    if !s.is_finite() {
        return Err(Error::InvalidParameter("Sobolev index must be finite".into()));
    }
    let grid = p.grid();
    let xi = grid.xi();
    let weight = |x: f64| if homogeneous { x.powf(2.0 * s) } else { (1.0 + x * x).powf(s) };
    let mut total = 0.0;
    for b in BRANCHES {
        let vals: Vec<f64> = xi
            .iter()
            .zip(p.branch(b))
            .map(|(&x, v)| v.norm_sqr() * weight(x))
            .collect();
        check_tail(&vals, xi, grid.points_per_octave(), "sobolev_norm")?;
        let (c, e) = small_xi_law(p, b);
        let gamma = 2.0 * e + if homogeneous { 2.0 * s } else { 0.0 } + 1.0;
        total += log_trapezoid(&vals, xi, grid.log_step(), gamma);
        let x0 = grid.xi_min();
        let w0 = if homogeneous { 1.0 } else { weight(x0) };
        total += c * c * w0 * below_grid_power_integral(c, gamma, x0, "sobolev_norm")?;
    }
    Ok(total.sqrt())
}

/// Physical L² norm from Fourier samples: ‖f‖² = (1/2π)∫|f̂|².
pub fn physical_l2_norm(p: &GridProfile) -> Result<f64> {
    Ok(sobolev_norm(p, 0.0, false)? / (2.0 * std::f64::consts::PI).sqrt())
}

/// Stored and fitted small-ξ moments.
#[derive(Clone, Copy, Debug)]
pub struct MomentReport {
    pub stored: Taylor,
    pub fitted: Taylor,
    /// Largest absolute difference between the two.
    pub drift: f64,
}

/// Fit `a + bξ + cξ²` to the four smallest samples of each branch (eight, with `|ξ|³` and
/// ξ⁴ terms, when the profile has no Taylor model).
pub fn moments_from_profile(p: &GridProfile) -> Result<MomentReport> {
    let xi = p.grid().xi();
    // Profiles without a Taylor model behave like |ξ|³ at the origin; the |ξ|³ and ξ⁴ terms are
    // fitted too, otherwise they bias the curvature by O(ξ_min). Their samples are small, so the
    // wider basis costs no accuracy there.
    let cubic = p.taylor.is_zero();
    let count = if cubic { 8 } else { 4 };
    if xi.len() < count {
        return Err(Error::InvalidGrid(format!("need {count} points for the moment fit")));
    }
    let scale = xi[count - 1];
    let width = if cubic { 5 } else { 3 };
    let mut ata = [[0.0f64; 5]; 5];
    let mut atb = [Complex64::new(0.0, 0.0); 5];
    for j in 0..count {
        for (x, v) in [(xi[j], p.pos()[j]), (-xi[j], p.neg()[j])] {
            let u = x / scale;
            let row = [1.0, u, u * u, u.abs().powi(3), u.powi(4)];
            for a in 0..width {
                for b in 0..width {
                    ata[a][b] += row[a] * row[b];
                }
                atb[a] += v * row[a];
            }
        }
    }
    let coef = solve(ata, atb, width).ok_or_else(|| Error::InvalidGrid("singular moment fit".into()))?;
    let b = coef[1] / scale;
    let c = coef[2] / (scale * scale);
    let fitted = Taylor::new(coef[0].re, -b.im, -2.0 * c.re);
    let drift = (fitted.mass - p.taylor.mass)
        .abs()
        .max((fitted.momentum - p.taylor.momentum).abs())
        .max((fitted.energy - p.taylor.energy).abs());
    Ok(MomentReport { stored: p.taylor, fitted, drift })
}

/// Gaussian elimination on the leading `n × n` block.
fn solve(mut a: [[f64; 5]; 5], mut b: [Complex64; 5], n: usize) -> Option<[Complex64; 5]> {
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            let bc = b[col];
            b[r] -= bc * f;
        }
    }
    let mut x = [Complex64::new(0.0, 0.0); 5];
    for r in (0..n).rev() {
        let mut s = b[r];
        for c in r + 1..n {
            s -= x[c] * a[r][c];
        }
        x[r] = s / a[r][r];
    }
    Some(x)
}

/// σ_k = 1 − k/4 − 2^{1−k}.
pub fn rate_sigma_k(k: f64) -> f64 {
    1.0 - k / 4.0 - 2f64.powf(1.0 - k)
}

/// σ_k(p) = 1 − k/4 + 1/(4p) − 2^{1+1/p−k}.
pub fn rate_sigma_kp(k: f64, p: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p must be ≥ 1, got {p}")));
    }
    Ok(1.0 - k / 4.0 + 1.0 / (4.0 * p) - 2f64.powf(1.0 + 1.0 / p - k))
}

/// ∫ |f(x)|(1+|x|)^a dx by the trapezoid rule, corrected for the kink of the weight at 0.
pub fn weighted_l1_norm(f: &PhysicalField, a: f64) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::InvalidParameter("weight order must be finite".into()));
    }
    let w = |x: f64| (1.0 + x.abs()).powf(a);
    // Trapezoid plus the Euler-Maclaurin term for the slope jump 2a|f(0)| of the weight at 0.
    let grid = f.grid();
    let h = grid.spacing();
    let jump = 2.0 * a * f.values()[grid.n_half()].abs();
    let norm = f.map(|x, v| v.abs() * w(x)).integral() + h * h / 12.0 * jump;
    // A weighted integrand that does not fall faster than 1/|x| signals divergence.
    let n = grid.len();
    let x_edge = grid.half_width();
    let half = grid.n_half() / 2;
    for (edge, inner) in [(0usize, grid.n_half() - half), (n - 1, grid.n_half() + half)] {
        let e_out = f.values()[edge].abs() * w(x_edge) * x_edge;
        let e_in = f.values()[inner].abs() * w(grid.x(inner)) * grid.x(inner).abs();
        let noise = f.values()[edge].abs() <= 1e-13 * f.max_abs();
        if !noise && e_out > 1e-10 * norm && e_out >= e_in {
            return Err(Error::DivergentTail(format!(
                "weighted integrand decays no faster than 1/|x| (a = {a})"
            )));
        }
    }
    Ok(norm)
}

/// Finite signed atoms `Σ w_j δ_{x_j}`.
#[derive(Clone, Debug, Default)]
pub struct DiscreteMeasure {
    pub atoms: Vec<(f64, f64)>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<(f64, f64)>) -> Self {
        Self { atoms }
    }

    /// Third difference `c·(δ_{x0} − 3δ_{x0+s} + 3δ_{x0+2s} − δ_{x0+3s})`.
    pub fn third_difference(x0: f64, s: f64, c: f64) -> Self {
        Self::new(vec![(x0, c), (x0 + s, -3.0 * c), (x0 + 2.0 * s, 3.0 * c), (x0 + 3.0 * s, -c)])
    }

    pub fn moment(&self, n: i32) -> f64 {
        self.atoms.iter().map(|(x, w)| w * x.powi(n)).sum()
    }

    pub fn weighted_variation(&self, k: f64) -> f64 {
        self.atoms.iter().map(|(x, w)| w.abs() * (1.0 + x.abs()).powf(k)).sum()
    }

    /// μ̂(ξ) = Σ w e^{−ixξ}, evaluated with the vanishing moments removed analytically.
    pub fn transform(&self, xi: f64) -> Complex64 {
        self.atoms.iter().map(|(x, w)| exp_remainder(3, x * xi) * *w).sum()
    }

    fn in_x_k(&self, k: f64) -> Result<()> {
        if !(k > 2.0 && k < 3.0) {
            return Err(Error::InvalidParameter(format!("k must lie in (2, 3), got {k}")));
        }
        let scale = self.weighted_variation(2.0).max(f64::MIN_POSITIVE);
        for n in 0..3 {
            if self.moment(n).abs() > 1e-12 * scale {
                return Err(Error::NotMeanZero(format!("moment {n} = {:e}", self.moment(n))));
            }
        }
        Ok(())
    }
}

/// Outcome of a sup bound check.
#[derive(Clone, Copy, Debug)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub worst_xi: f64,
}

/// Compare sup |μ̂(ξ)|/|ξ|^k against (2/(k−1))·Σ|w|(1+|x|)^k on 2·10⁵ points of [−50, 50].
pub fn fourier_norm_bound_check(mu: &DiscreteMeasure, k: f64) -> Result<BoundCheck> {
    mu.in_x_k(k)?;
    const POINTS: usize = 200_000;
    let step = 100.0 / (POINTS - 1) as f64;
    let mut lhs: f64 = 0.0;
    let mut worst_xi = 0.0;
    for i in 0..POINTS {
        let xi = -50.0 + i as f64 * step;
        if xi == 0.0 {
            continue;
        }
        let v = mu.transform(xi).norm() / xi.abs().powf(k);
        if v > lhs {
            lhs = v;
            worst_xi = xi;
        }
    }
    let rhs = 2.0 / (k - 1.0) * mu.weighted_variation(k);
    Ok(BoundCheck { lhs, rhs, holds: lhs <= rhs * (1.0 + 1e-12), worst_xi })
}

/// Least-squares fit of −ln(norm) = rate·t + b.
#[derive(Clone, Copy, Debug)]
pub struct DecayFit {
    pub fitted_rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Fit over `window` (inclusive), defaulting to `[t_last/4, t_last]`.
pub fn fit_decay(times: &[f64], norms: &[f64], window: Option<(f64, f64)>) -> Result<DecayFit> {
    if times.len() != norms.len() {
        return Err(Error::InvalidParameter("times and norms differ in length".into()));
    }
    let (t0, t1) = match window {
        Some(w) => w,
        None => {
            let last = times.last().copied().unwrap_or(0.0);
            (last / 4.0, last)
        }
    };
    let eps = 1e-9 * t1.abs().max(1.0);
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(norms)
        .filter(|(t, _)| **t >= t0 - eps && **t <= t1 + eps)
        .map(|(&t, &n)| (t, n))
        .collect();
    if pts.len() < 5 {
        return Err(Error::TooFewSamples { needed: 5, got: pts.len() });
    }
    if pts.iter().any(|(_, n)| !(n.is_finite() && *n > 0.0)) {
        return Err(Error::NonPositiveNorm);
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| -p.1.ln()).sum::<f64>() / n;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for (t, v) in &pts {
        let dt = t - tm;
        let dy = -v.ln() - ym;
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if stt == 0.0 {
        return Err(Error::RateUndefined("all samples share one time".into()));
    }
    let rate = sty / stt;
    let intercept = ym - rate * tm;
    let ss_res = syy - rate * sty;
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res.max(0.0) / syy };
    Ok(DecayFit { fitted_rate: rate, intercept, r_squared, samples: pts.len() })
}
