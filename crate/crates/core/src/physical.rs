//! Uniform symmetric grids and real fields sampled on them.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Points `x_i = (i − n)·h`, `i = 0..=2n`, with `X = n·h`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalGrid {
    spacing: f64,
    n_half: usize,
}

impl PhysicalGrid {
    pub fn new(half_width: f64, spacing: f64) -> Result<Arc<Self>> {
        if !(half_width.is_finite() && spacing.is_finite() && half_width > 0.0 && spacing > 0.0) {
            return Err(Error::InvalidGrid("half-width and spacing must be positive".into()));
        }
        let n = (half_width / spacing).round();
        if (n * spacing - half_width).abs() > 1e-9 * half_width || n < 4.0 {
            return Err(Error::InvalidGrid(format!(
                "half-width {half_width} is not a multiple (≥ 4) of spacing {spacing}"
            )));
        }
        Ok(Arc::new(Self { spacing, n_half: n as usize }))
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }
    pub fn half_width(&self) -> f64 {
        self.n_half as f64 * self.spacing
    }
    pub fn n_half(&self) -> usize {
        self.n_half
    }
    pub fn len(&self) -> usize {
        2 * self.n_half + 1
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - self.n_half as f64) * self.spacing
    }
    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }
}

/// Samples of a real function on a [`PhysicalGrid`].
#[derive(Clone, Debug)]
pub struct PhysicalField {
    grid: Arc<PhysicalGrid>,
    values: Vec<f64>,
}

impl PhysicalField {
    pub fn new(grid: Arc<PhysicalGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("field values".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &Arc<PhysicalGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.x(i))).collect();
        Self::new(grid.clone(), values)
    }

    pub fn zeros(grid: &Arc<PhysicalGrid>) -> Self {
        Self { grid: grid.clone(), values: vec![0.0; grid.len()] }
    }

    pub fn grid(&self) -> &Arc<PhysicalGrid> {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn same_grid(&self, other: &PhysicalField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Trapezoid rule for ∫ f(x)·w(x) dx.
    pub fn integrate_with(&self, w: impl Fn(f64) -> f64) -> f64 {
        let n = self.values.len();
        let h = self.grid.spacing();
        let mut s = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let c = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            s += c * v * w(self.grid.x(i));
        }
        s * h
    }

    pub fn integral(&self) -> f64 {
        self.integrate_with(|_| 1.0)
    }

    /// (∫f, ∫xf, ∫x²f) by the trapezoid rule.
    pub fn moments(&self) -> [f64; 3] {
        [
            self.integral(),
            self.integrate_with(|x| x),
            self.integrate_with(|x| x * x),
        ]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest endpoint magnitude relative to the maximum.
    pub fn boundary_ratio(&self) -> f64 {
        let m = self.max_abs();
        if m == 0.0 {
            return 0.0;
        }
        let n = self.values.len();
        self.values[0].abs().max(self.values[n - 1].abs()) / m
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> PhysicalField {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| f(self.grid.x(i), v))
            .collect();
        PhysicalField { grid: self.grid.clone(), values }
    }

    /// Maps `(index, x) ↦ value` onto a new field on the same grid.
    pub fn map_indexed(&self, f: impl Fn(usize, f64) -> f64) -> PhysicalField {
        let values = (0..self.values.len()).map(|i| f(i, self.grid.x(i))).collect();
        PhysicalField { grid: self.grid.clone(), values }
    }

    pub fn zip_map(&self, other: &PhysicalField, f: impl Fn(f64, f64) -> f64) -> Result<PhysicalField> {
        self.same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(PhysicalField { grid: self.grid.clone(), values })
    }

    pub fn add(&self, other: &PhysicalField) -> Result<PhysicalField> {
        self.zip_map(other, |a, b| a + b)
    }
    pub fn sub(&self, other: &PhysicalField) -> Result<PhysicalField> {
        self.zip_map(other, |a, b| a - b)
    }
    pub fn scale(&self, c: f64) -> PhysicalField {
        self.map(|_, v| c * v)
    }

    pub fn sup_distance(&self, other: &PhysicalField) -> Result<f64> {
        self.same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Sixth-order centred derivative, one-sided seven-point stencils at the edges.
    pub fn derivative(&self) -> PhysicalField {
        const C: [f64; 3] = [45.0, -9.0, 1.0];
        let n = self.values.len();
        let h = self.grid.spacing();
        let v = &self.values;
        let values = (0..n)
            .map(|i| {
                if i >= 3 && i + 3 < n {
                    let mut s = 0.0;
                    for (k, c) in C.iter().enumerate() {
                        s += c * (v[i + k + 1] - v[i - k - 1]);
                    }
                    s / (60.0 * h)
                } else {
                    // One-sided seven-point stencil near the edges.
                    let start = if i < 3 { 0 } else { n - 7 };
                    let m = i - start;
                    let mut s = 0.0;
                    for k in 0..7 {
                        s += lagrange_slope(m, k) * v[start + k];
                    }
                    s / h
                }
            })
            .collect();
        PhysicalField { grid: self.grid.clone(), values }
    }

    /// Eight-point Lagrange interpolation; zero outside the grid.
    pub fn sample_at(&self, x: f64) -> f64 {
        let h = self.grid.spacing();
        let s = x / h + self.grid.n_half() as f64;
        let n = self.values.len();
        if s < 0.0 || s > (n - 1) as f64 {
            return 0.0;
        }
        let base = s.floor();
        let frac = s - base;
        if frac == 0.0 {
            return self.values[base as usize];
        }
        let b = base as isize;
        let mut out = 0.0;
        for a in -3..=4isize {
            let idx = b + a;
            let v = if idx < 0 || idx >= n as isize { 0.0 } else { self.values[idx as usize] };
            if v == 0.0 {
                continue;
            }
            let mut l = 1.0;
            for c in -3..=4isize {
                if c != a {
                    l *= (frac - c as f64) / (a - c) as f64;
                }
            }
            out += l * v;
        }
        out
    }
}

/// Derivative at node `m` of the Lagrange basis polynomial `k` on nodes `0..7` (unit spacing).
fn lagrange_slope(m: usize, k: usize) -> f64 {
    let (mf, kf) = (m as f64, k as f64);
    if m == k {
        return (0..7).filter(|&l| l != m).map(|l| 1.0 / (mf - l as f64)).sum();
    }
    let mut p = 1.0 / (kf - mf);
    for l in (0..7).filter(|&l| l != m && l != k) {
        p *= (mf - l as f64) / (kf - l as f64);
    }
    p
}
