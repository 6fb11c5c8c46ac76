//! Seeded field generators shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use dyadic_kinetics::linear_analysis::projection_p;
use dyadic_kinetics::physical::{PhysicalField, PhysicalGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sum of `bumps` Gaussians with random sign, centre in `±reach` and width in [0.5, 3].
pub fn smooth_field(rng: &mut ChaCha8Rng, grid: &Arc<PhysicalGrid>, bumps: usize, reach: f64) -> PhysicalField {
    let params: Vec<(f64, f64, f64)> = (0..bumps)
        .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-reach..reach), rng.random_range(0.5..3.0)))
        .collect();
    PhysicalField::from_fn(grid, |x| {
        params.iter().map(|&(c, m, w)| c * (-((x - m) / w).powi(2)).exp()).sum()
    })
    .unwrap()
}

/// [`smooth_field`] with mass, momentum and energy removed by `h − P h`.
pub fn mean_zero_field(rng: &mut ChaCha8Rng, grid: &Arc<PhysicalGrid>, bumps: usize, reach: f64) -> PhysicalField {
    let h = smooth_field(rng, grid, bumps, reach);
    h.sub(&projection_p(&h)).unwrap()
}
