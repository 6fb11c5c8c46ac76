use num_complex::Complex64;

use crate::closed_forms::phi_steady;
use crate::error::{Error, Result};
use crate::fourier_grid::{halve_argument, sample_real, Branch, GridProfile, Taylor};

/// Source of `ξ∂_ξ` samples in the residuals.
#[derive(Clone, Copy, Debug)]
pub enum Derivative<'a> {
    /// Fourth-order centred differences in ln ξ; ghost points follow the small-ξ model below
    /// the grid and vanish above it.
    FiniteDifference,
    /// Supplied samples of `ξ∂_ξ p`.
    Exact(&'a GridProfile),
}

fn log_derivative_fd(p: &GridProfile) -> GridProfile {
    let grid = p.grid();
    let xi = grid.xi();
    let n = xi.len() as isize;
    let m = grid.points_per_octave() as f64;
    let delta = grid.log_step();
    let value = |b: Branch, j: isize| -> Complex64 {
        if j < 0 {
            p.below_grid(b, grid.xi_min() * 2f64.powf(j as f64 / m))
        } else if j >= n {
            Complex64::new(0.0, 0.0)
        } else {
            p.branch(b)[j as usize]
        }
    };
    let build = |b: Branch| -> Vec<Complex64> {
        (0..n)
            .map(|j| {
                (value(b, j - 2) - value(b, j - 1) * 8.0 + value(b, j + 1) * 8.0 - value(b, j + 2))
                    / (12.0 * delta)
            })
            .collect()
    };
    GridProfile::new(grid.clone(), build(Branch::Pos), build(Branch::Neg), Taylor::ZERO)
        .expect("finite differences of finite samples are finite")
}

fn derivative_of(p: &GridProfile, d: Derivative<'_>) -> Result<GridProfile> {
    match d {
        Derivative::FiniteDifference => Ok(log_derivative_fd(p)),
        Derivative::Exact(q) => {
            p.sup_distance(q)?;
            Ok(q.clone())
        }
    }
}

/// `¼ξ∂_ξφ + φ(ξ/2)² − φ` for a full profile φ.
///
/// With finite differences, φ is split as Φ + ψ and only ψ is differentiated; Φ's part of the
/// residual vanishes in closed form.
pub fn rhs_nonlinear(phi: &GridProfile, d: Derivative<'_>) -> Result<GridProfile> {
    let grid = phi.grid();
    match d {
        Derivative::Exact(dphi) => {
            let dphi = derivative_of(phi, Derivative::Exact(dphi))?;
            let half = halve_argument(phi);
            dphi.scale(0.25).add(&half.mul(&half)?)?.sub(phi)
        }
        Derivative::FiniteDifference => {
            if phi.taylor != Taylor::UNIT {
                return Err(Error::InvalidParameter(
                    "finite-difference residual expects the normalisation (1, 0, 1)".into(),
                ));
            }
            let steady = sample_real(grid, phi_steady, Taylor::UNIT)?;
            let psi = phi.sub(&steady)?;
            let half_steady = sample_real(grid, |x| phi_steady(0.5 * x), Taylor::new(1.0, 0.0, 0.25))?;
            let dpsi = log_derivative_fd(&psi);
            let l = halve_argument(&psi);
            let gain = l.mul(&l.add(&half_steady.scale(2.0))?)?;
            let mut r = dpsi.scale(0.25).add(&gain)?.sub(&psi)?;
            r.taylor = Taylor::ZERO;
            Ok(r)
        }
    }
}

/// `¼ξ∂_ξψ + 2ψ(ξ/2)Φ(ξ/2) − ψ`.
pub fn rhs_linear(psi: &GridProfile, d: Derivative<'_>) -> Result<GridProfile> {
    let grid = psi.grid();
    let dpsi = derivative_of(psi, d)?;
    let half_steady = sample_real(grid, |x| phi_steady(0.5 * x), Taylor::new(1.0, 0.0, 0.25))?;
    let gain = halve_argument(psi).mul(&half_steady)?.scale(2.0);
    let mut r = dpsi.scale(0.25).add(&gain)?.sub(psi)?;
    r.taylor = Taylor::ZERO;
    Ok(r)
}

/// Max modulus over indices `2..N−2` of both branches.
pub(crate) fn interior_max(p: &GridProfile) -> f64 {
    let n = p.grid().len();
    p.pos()[2..n - 2]
        .iter()
        .chain(&p.neg()[2..n - 2])
        .map(|v| v.norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::*;
    use crate::fourier_grid::make_grid;

    /// Samples of ξΦ′, for use with [`Derivative::Exact`].
    fn steady_log_derivative(grid: &std::sync::Arc<crate::fourier_grid::DyadicGrid>) -> Result<GridProfile> {
        sample_real(grid, phi_steady_log_derivative, Taylor::ZERO)
    }

    #[test]
    fn steady_residual_exact_derivative() {
        let g = make_grid(1e-4, 32, 24).unwrap();
        let phi = sample_real(&g, phi_steady, Taylor::UNIT).unwrap();
        let d = steady_log_derivative(&g).unwrap();
        let r = rhs_nonlinear(&phi, Derivative::Exact(&d)).unwrap();
        assert!(r.max_abs() < 1e-12);
        let r = rhs_nonlinear(&phi, Derivative::FiniteDifference).unwrap();
        assert_eq!(r.max_abs(), 0.0);
    }

    #[test]
    fn gaussian_residual_matches_closed_form() {
        let g = make_grid(1e-4, 32, 24).unwrap();
        let phi = sample_real(&g, gaussian_profile, Taylor::UNIT).unwrap();
        let r = rhs_nonlinear(&phi, Derivative::FiniteDifference).unwrap();
        let xi = g.xi();
        let mut worst: f64 = 0.0;
        for j in 2..xi.len() - 2 {
            let x = xi[j];
            let want = -0.25 * x * x * (-0.5 * x * x).exp() + (-0.25 * x * x).exp() - (-0.5 * x * x).exp();
            worst = worst.max((r.pos()[j].re - want).abs());
        }
        assert!(worst < 1e-6, "{worst}");
        let x: f64 = 1.0;
        let at_one = (-0.25 * x).exp() - 1.25 * (-0.5 * x).exp();
        assert!((at_one - 0.020_637_5).abs() < 1e-7);
        assert!(r.pos()[2].norm() < 1e-12);
    }

    #[test]
    fn kernel_residual() {
        let g = make_grid(1e-4, 32, 24).unwrap();
        let psi = sample_real(&g, psi0, Taylor::new(0.0, 0.0, -2.0)).unwrap();
        let d = sample_real(&g, psi0_log_derivative, Taylor::ZERO).unwrap();
        let r = rhs_linear(&psi, Derivative::Exact(&d)).unwrap();
        let (j, v) = r.pos().iter().enumerate().fold((0, 0.0), |a, (j, v)| if v.norm() > a.1 { (j, v.norm()) } else { a });
        assert!(r.max_abs() < 1e-12, "{v:e} at {}", g.xi()[j]);
    }
}
