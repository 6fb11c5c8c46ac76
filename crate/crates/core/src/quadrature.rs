//! Double-exponential and Gauss rules used by the functionals.

use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be accumulated by the quadrature rules.
pub trait Accum: Copy + Add<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl Accum for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Accum for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

const T_MAX: f64 = 4.5;
const MIN_LEVEL: usize = 4;
const MAX_LEVEL: usize = 12;

/// Result of a double-exponential rule that may have stopped before meeting its tolerance.
#[derive(Clone, Copy, Debug)]
pub struct Estimate<T> {
    pub value: T,
    pub converged: bool,
}

impl<T: Accum> Estimate<T> {
    fn require(self) -> Result<T> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::Quadrature(format!(
                "no convergence after {MAX_LEVEL} levels (estimate {:e})",
                self.value.magnitude()
            )))
        }
    }
}

/// Tanh-sinh rule on a finite interval. Tolerates integrable endpoint singularities;
/// the endpoints themselves are never evaluated.
pub fn tanh_sinh<T: Accum>(f: impl FnMut(f64) -> T, a: f64, b: f64, rel_tol: f64) -> Result<T> {
    tanh_sinh_estimate(f, a, b, rel_tol)?.require()
}

/// Exp-sinh rule on [a, ∞). The integrand must decay at infinity.
pub fn exp_sinh<T: Accum>(f: impl FnMut(f64) -> T, a: f64, rel_tol: f64) -> Result<T> {
    exp_sinh_estimate(f, a, rel_tol)?.require()
}

/// [`tanh_sinh`] returning its last estimate even without convergence.
pub fn tanh_sinh_estimate<T: Accum>(mut f: impl FnMut(f64) -> T, a: f64, b: f64, rel_tol: f64) -> Result<Estimate<T>> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter("tanh_sinh needs finite limits".into()));
    }
    if a == b {
        return Ok(Estimate { value: T::zero(), converged: true });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let d = 0.5 * (hi - lo);
    let mut node = |t: f64| -> T {
        let u = FRAC_PI_2 * t.sinh();
        let q = (-2.0 * u.abs()).exp();
        let gap = d * 2.0 * q / (1.0 + q);
        let x = if t >= 0.0 { hi - gap } else { lo + gap };
        if x <= lo || x >= hi {
            return T::zero();
        }
        let w = d * FRAC_PI_2 * t.cosh() * 4.0 * q / ((1.0 + q) * (1.0 + q));
        if w == 0.0 {
            return T::zero();
        }
        f(x) * w
    };
    refine(&mut node, T_MAX, rel_tol).map(|e| Estimate { value: e.value * sign, converged: e.converged })
}

/// [`exp_sinh`] returning its last estimate even without convergence.
pub fn exp_sinh_estimate<T: Accum>(mut f: impl FnMut(f64) -> T, a: f64, rel_tol: f64) -> Result<Estimate<T>> {
    let mut node = |t: f64| -> T {
        let e = (FRAC_PI_2 * t.sinh()).exp();
        if !e.is_finite() || e == 0.0 {
            return T::zero();
        }
        let x = a + e;
        if x == a {
            return T::zero();
        }
        let w = FRAC_PI_2 * t.cosh() * e;
        let v = f(x);
        if v.magnitude() == 0.0 {
            return T::zero();
        }
        v * w
    };
    refine(&mut node, T_MAX, rel_tol)
}

/// `∫_ℝ f` as two exp-sinh rules on the half lines either side of `split`. A singularity
/// at `split` sits at an endpoint of both pieces.
pub fn line_integral<T: Accum>(mut f: impl FnMut(f64) -> T, split: f64, rel_tol: f64) -> Result<T> {
    let right = exp_sinh(|u| f(split + u), 0.0, rel_tol)?;
    let left = exp_sinh(|u| f(split - u), 0.0, rel_tol)?;
    Ok(right + left)
}

fn refine<T: Accum>(node: &mut impl FnMut(f64) -> T, t_max: f64, rel_tol: f64) -> Result<Estimate<T>> {
    let mut h = 1.0;
    let jmax = t_max.floor() as i64;
    let mut total = T::zero();
    for j in -jmax..=jmax {
        total = total + node(j as f64);
    }
    let mut estimate = total * h;
    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let count = (t_max / h).floor() as i64;
        let mut fresh = T::zero();
        let mut i = -count;
        if i % 2 == 0 {
            i += 1;
        }
        while i <= count {
            fresh = fresh + node(i as f64 * h);
            i += 2;
        }
        total = total + fresh;
        let next = total * h;
        let change = (next + estimate * -1.0).magnitude();
        estimate = next;
        if !estimate.magnitude().is_finite() {
            return Err(Error::Quadrature("non-finite partial sum".into()));
        }
        if level >= MIN_LEVEL && change <= rel_tol * estimate.magnitude() + 1e-300 {
            return Ok(Estimate { value: estimate, converged: true });
        }
    }
    Ok(Estimate { value: estimate, converged: false })
}

/// Nodes and weights of the 4-point Gauss-Legendre rule on [-1, 1].
pub const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_8),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_8),
];

/// 4-point Gauss-Legendre on [a, b].
pub fn gauss4(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let d = 0.5 * (b - a);
    GAUSS4.iter().map(|&(x, w)| w * f(c + d * x)).sum::<f64>() * d
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn tanh_sinh_handles_log_endpoint() {
        let v = tanh_sinh(|x: f64| x.ln(), 0.0, 1.0, 1e-14).unwrap();
        assert!((v + 1.0).abs() < 1e-13);
        let v = tanh_sinh(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-14).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn tanh_sinh_reversed_limits() {
        let v = tanh_sinh(|x: f64| x * x, 2.0, 0.0, 1e-14).unwrap();
        assert!((v + 8.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn exp_sinh_algebraic_and_exponential() {
        let v = exp_sinh(|x: f64| 1.0 / (1.0 + x * x), 0.0, 1e-14).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-12);
        let v = exp_sinh(|x: f64| (-x).exp(), 1.0, 1e-14).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn complex_accumulation() {
        let v = exp_sinh(|x: f64| Complex64::new(0.0, -x).exp() * (-x).exp(), 0.0, 1e-13).unwrap();
        // ∫ e^{-(1+i)x} = 1/(1+i)
        let want = Complex64::new(1.0, 0.0) / Complex64::new(1.0, 1.0);
        assert!((v - want).norm() < 1e-12);
    }

    #[test]
    fn gauss4_exact_for_cubics_and_septics() {
        let v = gauss4(|x| x.powi(7) - 2.0 * x.powi(3) + 1.0, 0.0, 1.0);
        assert!((v - (1.0 / 8.0 - 0.5 + 1.0)).abs() < 1e-14);
    }
}
