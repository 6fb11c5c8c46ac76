//! Closed-form profiles, densities, barriers and smooth cutoffs.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Φ(ξ) = (1+|ξ|)e^{−|ξ|}, the transform of the steady density.
pub fn phi_steady(xi: f64) -> f64 {
    let r = xi.abs();
    (1.0 + r) * (-r).exp()
}

/// ξΦ′(ξ) = −ξ²e^{−|ξ|}.
pub fn phi_steady_log_derivative(xi: f64) -> f64 {
    -xi * xi * (-xi.abs()).exp()
}

/// Φ(ξ) − (1 − ξ²/2), accurate at small ξ.
pub fn phi_steady_remainder(xi: f64) -> f64 {
    let r = xi.abs();
    if r > 0.5 {
        return phi_steady(r) - 1.0 + 0.5 * r * r;
    }
    // Σ_{n≥3} (−1)^{n+1}(n−1)/n! · r^n
    let mut sum = 0.0;
    let mut pow_over_fact = r * r / 2.0;
    for n in 3..40u32 {
        pow_over_fact *= r / n as f64;
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * (n - 1) as f64 * pow_over_fact;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// Φ(ξ/λ), the transform of the rescaled steady density `H_λ`.
pub fn phi_scaled(xi: f64, lambda: f64) -> f64 {
    phi_steady(xi / lambda)
}

/// e^{−ξ²/2}.
pub fn gaussian_profile(xi: f64) -> f64 {
    (-0.5 * xi * xi).exp()
}

/// e^{−ξ²/2} − (1 − ξ²/2), accurate at small ξ.
pub fn gaussian_remainder(xi: f64) -> f64 {
    let u = -0.5 * xi * xi;
    if u.abs() > 0.25 {
        return u.exp_m1() - u;
    }
    let mut sum = 0.0;
    let mut term = 0.5 * u * u;
    let mut n = 2u32;
    loop {
        sum += term;
        n += 1;
        term *= u / n as f64;
        if term.abs() < 1e-18 * sum.abs() || n > 40 {
            break;
        }
    }
    sum
}

/// e^{−ξ²/2} − Φ(ξ) without cancellation near ξ = 0.
pub fn gaussian_minus_steady(xi: f64) -> f64 {
    gaussian_remainder(xi) - phi_steady_remainder(xi)
}

/// H_λ(x) = λ·2/(π(1+λ²x²)²); λ = 1 gives the steady density H.
pub fn h_density(x: f64, lambda: f64) -> f64 {
    let y = lambda * x;
    let d = 1.0 + y * y;
    lambda * 2.0 / (PI * d * d)
}

/// 1/(π(1+x²)), whose transform is e^{−|ξ|}.
pub fn lorentzian(x: f64) -> f64 {
    1.0 / (PI * (1.0 + x * x))
}

/// g₀(x) = (2/π)(1−3x²)/(1+x²)³, the kernel element of the linearised operator.
pub fn g0_density(x: f64) -> f64 {
    let d = 1.0 + x * x;
    2.0 / PI * (1.0 - 3.0 * x * x) / (d * d * d)
}

/// ψ₀(ξ) = ξ²e^{−|ξ|}, the transform of g₀.
pub fn psi0(xi: f64) -> f64 {
    xi * xi * (-xi.abs()).exp()
}

/// ξψ₀′(ξ) = ξ²(2 − |ξ|)e^{−|ξ|}.
pub fn psi0_log_derivative(xi: f64) -> f64 {
    let r = xi.abs();
    xi * xi * (2.0 - r) * (-r).exp()
}

/// ξ⁴e^{−ξ²}.
pub fn psi_test4(xi: f64) -> f64 {
    let s = xi * xi;
    s * s * (-s).exp()
}

/// Physical density with transform ξ⁴e^{−ξ²}.
pub fn psi_test4_density(x: f64) -> f64 {
    let s = x * x;
    (0.25 * s * s - 3.0 * s + 3.0) * (-0.25 * s).exp() / (8.0 * PI.sqrt())
}

/// Standard normal density with variance `var`; its transform is e^{−var·ξ²/2}.
pub fn normal_density(x: f64, var: f64) -> f64 {
    (-0.5 * x * x / var).exp() / (2.0 * PI * var).sqrt()
}

/// Ψ_β(r) = (1+r²)^{−β/2}.
pub fn psi_beta(beta: f64, r: f64) -> f64 {
    (1.0 + r * r).powf(-0.5 * beta)
}

/// ζ₁, ζ₂, ζ₃ with M = e^{−x²}/√π; biorthogonal to (1, x, x²).
pub fn zetas(x: f64) -> [f64; 3] {
    let m = (-x * x).exp() / PI.sqrt();
    [(1.5 - x * x) * m, 2.0 * x * m, (2.0 * x * x - 1.0) * m]
}

/// Quintic smoothstep on [0, 1].
fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
}

/// Smooth cutoffs θ_R and ρ_R.
#[derive(Clone, Copy, Debug)]
pub struct Cutoffs {
    r: f64,
}

impl Cutoffs {
    pub fn new(r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 1.0) {
            return Err(Error::InvalidParameter(format!("cutoff radius must exceed 1, got {r}")));
        }
        Ok(Self { r })
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    /// 1 on |x| ≤ R/2, 0 on |x| ≥ R/2 + 1.
    pub fn theta(&self, x: f64) -> f64 {
        1.0 - smoothstep(x.abs() - 0.5 * self.r)
    }

    /// 1 on |x| ≤ R/2, 0 on |x| ≥ 2R/3.
    pub fn rho(&self, x: f64) -> f64 {
        1.0 - smoothstep((x.abs() - 0.5 * self.r) / (self.r / 6.0))
    }
}

pub fn cutoff_theta(r: f64, x: f64) -> Result<f64> {
    Ok(Cutoffs::new(r)?.theta(x))
}

pub fn cutoff_rho(r: f64, x: f64) -> Result<f64> {
    Ok(Cutoffs::new(r)?.rho(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steady_taylor_coefficients() {
        let r: f64 = 1e-3;
        let want = r.powi(3) / 3.0 - r.powi(4) / 8.0 + r.powi(5) / 30.0 - r.powi(6) / 144.0;
        assert!((phi_steady_remainder(r) - want).abs() < 1e-12 * want);
        for &x in &[0.4, 0.6, 2.0] {
            let direct = phi_steady(x) - 1.0 + 0.5 * x * x;
            assert!((phi_steady_remainder(x) - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn gaussian_remainder_matches_direct() {
        for &x in &[0.3, 0.7, 1.5] {
            let direct = gaussian_profile(x) - 1.0 + 0.5 * x * x;
            assert!((gaussian_remainder(x) - direct).abs() < 1e-15);
        }
        let x: f64 = 1e-5;
        assert!((gaussian_remainder(x) - x.powi(4) / 8.0 + x.powi(6) / 48.0).abs() < 1e-12 * x.powi(4));
    }

    #[test]
    fn stationarity_in_closed_form() {
        for &x in &[1e-6, 0.1, 1.0, 3.7, 25.0] {
            let res = 0.25 * phi_steady_log_derivative(x) + phi_steady(x / 2.0).powi(2) - phi_steady(x);
            assert!(res.abs() < 1e-15);
            let lin = 0.25 * psi0_log_derivative(x) + 2.0 * psi0(x / 2.0) * phi_steady(x / 2.0) - psi0(x);
            assert!(lin.abs() < 1e-15);
        }
    }

    #[test]
    fn reference_values() {
        assert!((h_density(0.0, 1.0) - 2.0 / PI).abs() < 1e-15);
        assert!((g0_density(0.0) - 2.0 / PI).abs() < 1e-15);
        assert!((phi_steady(1.0) - 2.0 / std::f64::consts::E).abs() < 1e-15);
        assert!((psi_beta(2.0, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cutoff_support() {
        let c = Cutoffs::new(100.0).unwrap();
        assert_eq!(c.theta(50.0), 1.0);
        assert_eq!(c.theta(-51.0), 0.0);
        assert!((c.theta(50.5) - 0.5).abs() < 1e-15);
        assert_eq!(c.rho(50.0), 1.0);
        assert_eq!(c.rho(66.7), 0.0);
        assert!((c.rho(50.0 + 100.0 / 12.0) - 0.5).abs() < 1e-14);
        assert!(Cutoffs::new(1.0).is_err());
    }

    #[test]
    fn zetas_are_biorthogonal() {
        // Gauss-Hermite would be exact; a fine trapezoid is enough here.
        let h = 1e-3;
        let mut m = [[0.0; 3]; 3];
        for i in -10000..=10000 {
            let x = i as f64 * h;
            let z = zetas(x);
            for a in 0..3 {
                for (b, p) in [1.0, x, x * x].iter().enumerate() {
                    m[a][b] += z[a] * p * h;
                }
            }
        }
        for (a, row) in m.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-12, "{a}{b}: {v}");
            }
        }
    }

    #[test]
    fn test_density_vs_transform() {
        // ∫ψ_test4_density = ψ_test4(0) = 0 and ∫x⁴·density = 4!·(coefficient) = 24.
        let h = 1e-3;
        let (mut m0, mut m4) = (0.0, 0.0);
        for i in -40000..=40000 {
            let x = i as f64 * h;
            let d = psi_test4_density(x);
            m0 += d * h;
            m4 += d * x.powi(4) * h;
        }
        assert!(m0.abs() < 1e-12);
        assert!((m4 - 24.0).abs() < 1e-9);
    }
}
