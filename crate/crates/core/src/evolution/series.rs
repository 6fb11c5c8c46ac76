use crate::error::{Error, Result};
use crate::fourier_grid::{halve_argument, GridProfile};

/// Truncated series and the size of the omitted tail.
#[derive(Clone, Debug)]
pub struct SeriesResult {
    pub profile: GridProfile,
    pub tail_bound: f64,
}

/// `Σ_{j ≤ j_max} ((αt)^j/j!)·u₀(ξ/2^j)`, the solution of `∂_t u = α·u(ξ/2)` at time t.
pub fn evolution_series_constant(u0: &GridProfile, alpha: f64, t: f64, j_max: usize) -> Result<SeriesResult> {
    if !(alpha.is_finite() && t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter("alpha and t must be finite with t ≥ 0".into()));
    }
    let at = alpha * t;
    let mut term = u0.clone();
    let mut coef = 1.0;
    let mut sum = u0.clone();
    for j in 1..=j_max {
        term = halve_argument(&term);
        coef *= at / j as f64;
        sum = sum.add(&term.scale(coef))?;
    }
    let next = coef * at.abs() / (j_max + 1) as f64;
    let tail_bound = next * at.abs().exp() * u0.max_abs();
    Ok(SeriesResult { profile: sum.with_time(u0.time + t), tail_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::phi_steady;
    use crate::fourier_grid::{make_grid, sample_real, Taylor};

    #[test]
    fn trivial_cases() {
        let g = make_grid(1e-4, 32, 24).unwrap();
        let u = sample_real(&g, phi_steady, Taylor::UNIT).unwrap();
        let s = evolution_series_constant(&u, 1.0, 0.0, 10).unwrap();
        assert_eq!(s.profile.sup_distance(&u).unwrap(), 0.0);
        let s = evolution_series_constant(&u, 1.0, 2.0, 0).unwrap();
        assert_eq!(s.profile.sup_distance(&u).unwrap(), 0.0);
        assert!((s.tail_bound - 2.0 * 2f64.exp() * phi_steady(1e-4)).abs() < 1e-12);
    }
}
