//! Geometric frequency grid on which halving the frequency and the drift flow are index shifts.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Points `±ξ_j = ±ξ_min·2^(j/m)`, `j = 0..N`, with `N = m·octaves + 1`.
#[derive(Clone, Debug)]
pub struct DyadicGrid {
    xi_min: f64,
    points_per_octave: usize,
    octaves: usize,
    xi: Vec<f64>,
}

impl PartialEq for DyadicGrid {
    fn eq(&self, other: &Self) -> bool {
        self.xi_min == other.xi_min
            && self.points_per_octave == other.points_per_octave
            && self.octaves == other.octaves
    }
}

/// Build a grid. `ξ_{j+m} = 2ξ_j` holds exactly in floating point.
pub fn make_grid(xi_min: f64, points_per_octave: usize, octaves: usize) -> Result<Arc<DyadicGrid>> {
    if !(xi_min.is_finite() && xi_min > 0.0) {
        return Err(Error::InvalidGrid(format!("xi_min must be positive, got {xi_min}")));
    }
    if points_per_octave == 0 || octaves == 0 {
        return Err(Error::InvalidGrid("need at least one point per octave and one octave".into()));
    }
    let m = points_per_octave;
    let n = m * octaves + 1;
    let ratios: Vec<f64> = (0..m).map(|l| 2f64.powf(l as f64 / m as f64)).collect();
    let mut xi = Vec::with_capacity(n);
    for j in 0..n {
        let v = xi_min * ratios[j % m] * 2f64.powi((j / m) as i32);
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidGrid(format!("grid point {j} overflows")));
        }
        xi.push(v);
    }
    Ok(Arc::new(DyadicGrid {
        xi_min,
        points_per_octave,
        octaves,
        xi,
    }))
}

impl DyadicGrid {
    pub fn xi_min(&self) -> f64 {
        self.xi_min
    }
    pub fn points_per_octave(&self) -> usize {
        self.points_per_octave
    }
    pub fn octaves(&self) -> usize {
        self.octaves
    }
    /// Points per branch.
    pub fn len(&self) -> usize {
        self.xi.len()
    }
    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }
    pub fn xi(&self) -> &[f64] {
        &self.xi
    }
    pub fn xi_max(&self) -> f64 {
        self.xi[self.xi.len() - 1]
    }
    /// Spacing in ln ξ.
    pub fn log_step(&self) -> f64 {
        std::f64::consts::LN_2 / self.points_per_octave as f64
    }
    /// The time step `(4n/m)·ln 2` realised by a shift of `n` indices.
    pub fn admissible_step(&self, n: usize) -> f64 {
        4.0 * n as f64 * self.log_step()
    }
}

/// Mass, momentum and energy of the underlying density; they fix the small-ξ Taylor model
/// `φ(ξ) ≈ mass − i·momentum·ξ − energy·ξ²/2`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Taylor {
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
}

impl Taylor {
    pub const ZERO: Taylor = Taylor { mass: 0.0, momentum: 0.0, energy: 0.0 };
    /// Normalisation of the nonlinear problem.
    pub const UNIT: Taylor = Taylor { mass: 1.0, momentum: 0.0, energy: 1.0 };

    pub fn new(mass: f64, momentum: f64, energy: f64) -> Self {
        Self { mass, momentum, energy }
    }

    pub fn is_zero(&self) -> bool {
        self.mass == 0.0 && self.momentum == 0.0 && self.energy == 0.0
    }

    pub fn eval(&self, xi: f64) -> Complex64 {
        Complex64::new(self.mass - 0.5 * self.energy * xi * xi, -self.momentum * xi)
    }

    /// Lowest nonvanishing order and the modulus of its coefficient.
    pub fn leading(&self) -> Option<(u32, f64)> {
        if self.mass != 0.0 {
            Some((0, self.mass.abs()))
        } else if self.momentum != 0.0 {
            Some((1, self.momentum.abs()))
        } else if self.energy != 0.0 {
            Some((2, 0.5 * self.energy.abs()))
        } else {
            None
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new(c * self.mass, c * self.momentum, c * self.energy)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Pos,
    Neg,
}

/// Samples of a characteristic-function-like profile on both branches of a grid.
///
/// Below `ξ_min` the profile follows its Taylor model when that is nonzero, and otherwise a
/// power law `A|ξ|^e` whose exponent is fitted from the two smallest samples and floored at
/// `small_xi_exponent`. Above the grid it is zero.
#[derive(Clone, Debug)]
pub struct GridProfile {
    grid: Arc<DyadicGrid>,
    pos: Vec<Complex64>,
    neg: Vec<Complex64>,
    pub taylor: Taylor,
    pub time: f64,
    pub small_xi_exponent: f64,
}

impl GridProfile {
    pub fn new(
        grid: Arc<DyadicGrid>,
        pos: Vec<Complex64>,
        neg: Vec<Complex64>,
        taylor: Taylor,
    ) -> Result<Self> {
        if pos.len() != grid.len() || neg.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples per branch, got {} and {}",
                grid.len(),
                pos.len(),
                neg.len()
            )));
        }
        if pos.iter().chain(neg.iter()).any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite("profile samples".into()));
        }
        Ok(Self {
            grid,
            pos,
            neg,
            taylor,
            time: 0.0,
            small_xi_exponent: 3.0,
        })
    }

    pub fn zeros(grid: Arc<DyadicGrid>) -> Self {
        let n = grid.len();
        let z = vec![Complex64::new(0.0, 0.0); n];
        Self {
            grid,
            pos: z.clone(),
            neg: z,
            taylor: Taylor::ZERO,
            time: 0.0,
            small_xi_exponent: 3.0,
        }
    }

    pub fn grid(&self) -> &Arc<DyadicGrid> {
        &self.grid
    }
    pub fn pos(&self) -> &[Complex64] {
        &self.pos
    }
    pub fn neg(&self) -> &[Complex64] {
        &self.neg
    }
    pub fn branch(&self, b: Branch) -> &[Complex64] {
        match b {
            Branch::Pos => &self.pos,
            Branch::Neg => &self.neg,
        }
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.time = t;
        self
    }

    /// Exponent of the power-law model on one branch.
    pub fn power_law_exponent(&self, b: Branch) -> f64 {
        let v = self.branch(b);
        let xi = self.grid.xi();
        if v.len() < 2 {
            return self.small_xi_exponent;
        }
        fitted_exponent(v[0].norm(), v[1].norm(), xi[1] / xi[0], self.small_xi_exponent)
    }

    /// Value of the small-frequency model at `|ξ| = r < ξ_min` on branch `b`.
    ///
    /// A nonzero Taylor model is corrected by a power law fitted to the first two residuals
    /// `p(ξ_j) − taylor(ξ_j)`, which captures the |ξ|³ term of profiles like Φ.
    pub fn below_grid(&self, b: Branch, r: f64) -> Complex64 {
        let sign = match b {
            Branch::Pos => 1.0,
            Branch::Neg => -1.0,
        };
        let xi = self.grid.xi();
        let v = self.branch(b);
        if !self.taylor.is_zero() {
            let base = self.taylor.eval(sign * r);
            if v.len() < 2 {
                return base;
            }
            let r0 = v[0] - self.taylor.eval(sign * xi[0]);
            let r1 = v[1] - self.taylor.eval(sign * xi[1]);
            let e = fitted_exponent(r0.norm(), r1.norm(), xi[1] / xi[0], self.small_xi_exponent).min(8.0);
            return base + r0 * (r / xi[0]).powf(e);
        }
        let v0 = v[0];
        if v0 == Complex64::new(0.0, 0.0) {
            return v0;
        }
        let e = self.power_law_exponent(b);
        v0 * (r / self.grid.xi_min()).powf(e)
    }

    /// Largest deviation from `p(−ξ) = conj(p(ξ))`.
    pub fn hermitian_defect(&self) -> f64 {
        self.pos
            .iter()
            .zip(&self.neg)
            .map(|(p, n)| (n - p.conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.pos
            .iter()
            .chain(&self.neg)
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// Sup-norm distance between two profiles on the same grid.
    pub fn sup_distance(&self, other: &GridProfile) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self
            .pos
            .iter()
            .zip(&other.pos)
            .chain(self.neg.iter().zip(&other.neg))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    fn check_grid(&self, other: &GridProfile) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn add(&self, other: &GridProfile) -> Result<GridProfile> {
        pointwise(self, Pointwise::Add(other))
    }
    pub fn sub(&self, other: &GridProfile) -> Result<GridProfile> {
        let neg = pointwise(other, Pointwise::Scale(-1.0))?;
        pointwise(self, Pointwise::Add(&neg))
    }
    pub fn mul(&self, other: &GridProfile) -> Result<GridProfile> {
        pointwise(self, Pointwise::Multiply(other))
    }
    pub fn scale(&self, c: f64) -> GridProfile {
        pointwise(self, Pointwise::Scale(c)).expect("scaling never fails")
    }

    /// Map samples branchwise; the small-ξ model is left to the caller.
    pub fn map_samples(&self, f: impl Fn(f64, Complex64) -> Complex64) -> GridProfile {
        let xi = self.grid.xi();
        let mut out = self.clone();
        for j in 0..xi.len() {
            out.pos[j] = f(xi[j], self.pos[j]);
            out.neg[j] = f(-xi[j], self.neg[j]);
        }
        out
    }
}

fn fitted_exponent(a0: f64, a1: f64, ratio: f64, floor: f64) -> f64 {
    if a0 > 0.0 && a1 > 0.0 {
        let e = (a1 / a0).ln() / ratio.ln();
        if e.is_finite() {
            return e.max(floor);
        }
    }
    floor
}

/// Sample `f` at `±ξ_j`.
pub fn sample_function(
    grid: &Arc<DyadicGrid>,
    f: impl Fn(f64) -> Complex64,
    taylor: Taylor,
) -> Result<GridProfile> {
    let pos: Vec<Complex64> = grid.xi().iter().map(|&x| f(x)).collect();
    let neg: Vec<Complex64> = grid.xi().iter().map(|&x| f(-x)).collect();
    GridProfile::new(grid.clone(), pos, neg, taylor)
}

/// Sample a real-valued `f` at `±ξ_j`.
pub fn sample_real(grid: &Arc<DyadicGrid>, f: impl Fn(f64) -> f64, taylor: Taylor) -> Result<GridProfile> {
    sample_function(grid, |x| Complex64::new(f(x), 0.0), taylor)
}

/// `e^{−rate·t} p(ξ e^{t/4})` at `t = (4n/m) ln 2`, i.e. an index shift by `n` with zero fill
/// above the grid.
pub fn drift_decay_apply(p: &GridProfile, n: usize, rate: f64) -> GridProfile {
    let len = p.grid.len();
    let t = p.grid.admissible_step(n);
    let c = (-rate * t).exp();
    let shift = |v: &[Complex64]| -> Vec<Complex64> {
        (0..len)
            .map(|j| if j + n < len { v[j + n] * c } else { Complex64::new(0.0, 0.0) })
            .collect()
    };
    let stretch = (t / 4.0).exp();
    GridProfile {
        grid: p.grid.clone(),
        pos: shift(&p.pos),
        neg: shift(&p.neg),
        taylor: Taylor::new(
            c * p.taylor.mass,
            c * p.taylor.momentum * stretch,
            c * p.taylor.energy * stretch * stretch,
        ),
        time: p.time + t,
        small_xi_exponent: p.small_xi_exponent,
    }
}

/// `u(ξ/2)`: an index shift by `−m`, with the bottom octave filled from the small-ξ model.
pub fn halve_argument(p: &GridProfile) -> GridProfile {
    let m = p.grid.points_per_octave();
    let len = p.grid.len();
    let xi = p.grid.xi();
    let build = |b: Branch| -> Vec<Complex64> {
        let v = p.branch(b);
        (0..len)
            .map(|j| if j >= m { v[j - m] } else { p.below_grid(b, 0.5 * xi[j]) })
            .collect()
    };
    GridProfile {
        grid: p.grid.clone(),
        pos: build(Branch::Pos),
        neg: build(Branch::Neg),
        taylor: Taylor::new(p.taylor.mass, 0.5 * p.taylor.momentum, 0.25 * p.taylor.energy),
        time: p.time,
        small_xi_exponent: p.small_xi_exponent,
    }
}

/// Pointwise operations. Taylor models combine the way the underlying expansions do.
#[derive(Clone, Copy, Debug)]
pub enum Pointwise<'a> {
    Add(&'a GridProfile),
    Multiply(&'a GridProfile),
    Scale(f64),
    Conjugate,
}

pub fn pointwise(p: &GridProfile, op: Pointwise<'_>) -> Result<GridProfile> {
    let mut out = p.clone();
    match op {
        Pointwise::Add(q) => {
            p.check_grid(q)?;
            for (o, v) in out.pos.iter_mut().zip(&q.pos) {
                *o += v;
            }
            for (o, v) in out.neg.iter_mut().zip(&q.neg) {
                *o += v;
            }
            out.taylor = Taylor::new(
                p.taylor.mass + q.taylor.mass,
                p.taylor.momentum + q.taylor.momentum,
                p.taylor.energy + q.taylor.energy,
            );
            out.small_xi_exponent = p.small_xi_exponent.min(q.small_xi_exponent);
        }
        Pointwise::Multiply(q) => {
            p.check_grid(q)?;
            for (o, v) in out.pos.iter_mut().zip(&q.pos) {
                *o *= v;
            }
            for (o, v) in out.neg.iter_mut().zip(&q.neg) {
                *o *= v;
            }
            let (a, b) = (p.taylor, q.taylor);
            out.taylor = Taylor::new(
                a.mass * b.mass,
                a.mass * b.momentum + a.momentum * b.mass,
                a.mass * b.energy + a.energy * b.mass + 2.0 * a.momentum * b.momentum,
            );
            out.small_xi_exponent = match (a.is_zero(), b.is_zero()) {
                (true, true) => p.small_xi_exponent + q.small_xi_exponent,
                (true, false) => p.small_xi_exponent,
                (false, true) => q.small_xi_exponent,
                (false, false) => p.small_xi_exponent.min(q.small_xi_exponent),
            };
        }
        Pointwise::Scale(c) => {
            if !c.is_finite() {
                return Err(Error::NonFinite("scale factor".into()));
            }
            for o in out.pos.iter_mut().chain(out.neg.iter_mut()) {
                *o *= c;
            }
            out.taylor = p.taylor.scaled(c);
        }
        Pointwise::Conjugate => {
            for o in out.pos.iter_mut().chain(out.neg.iter_mut()) {
                *o = o.conj();
            }
            out.taylor = Taylor::new(p.taylor.mass, -p.taylor.momentum, p.taylor.energy);
        }
    }
    Ok(out)
}
