mod common;

use std::sync::Arc;

use dyadic_kinetics::closed_forms::{g0_density, h_density, normal_density, zetas};
use dyadic_kinetics::fourier_grid::{make_grid, sample_function, Taylor};
use dyadic_kinetics::linear_analysis::{
    apply_lin_physical, gap_estimate, i0_fn, lambda0, moment_identities, phi0_density,
    g0_rescaled_steady, projection_p, rescaled_operator_check, signed_pairing, split_apply, weight,
    SplitConfig, SplitPart,
};
use dyadic_kinetics::metrics::{norm_k, weighted_l1_norm, DiscreteMeasure};
use dyadic_kinetics::physical::{PhysicalField, PhysicalGrid};
use dyadic_kinetics::physical_space::moments_with_tails;
use dyadic_kinetics::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn grid40() -> Arc<PhysicalGrid> {
    PhysicalGrid::new(40.0, 0.05).unwrap()
}

fn sum_of_parts(h: &PhysicalField, cfg: &SplitConfig) -> PhysicalField {
    let mut acc = PhysicalField::zeros(h.grid());
    for part in SplitPart::ALL {
        acc = acc.add(&split_apply(h, part, cfg).unwrap()).unwrap();
    }
    acc
}

#[test]
fn projection_properties() {
    let g = PhysicalGrid::new(20.0, 0.01).unwrap();
    let z2 = PhysicalField::from_fn(&g, |x| zetas(x)[1]).unwrap();
    assert!(projection_p(&z2).sup_distance(&z2).unwrap() < 1e-12);
    assert_eq!(projection_p(&PhysicalField::zeros(&g)).max_abs(), 0.0);
    let mut rng = common::rng(3);
    let h = common::smooth_field(&mut rng, &g, 5, 5.0);
    let m = h.sub(&projection_p(&h)).unwrap().moments();
    for v in m {
        assert!(v.abs() < 1e-9);
    }
}

#[test]
fn support_of_cutoff_parts() {
    let g = grid40();
    let cfg = SplitConfig::new(10.0, 2.5).unwrap();
    let h = common::smooth_field(&mut common::rng(4), &g, 4, 8.0);
    let a1 = split_apply(&h, SplitPart::A1, &cfg).unwrap();
    let b21 = split_apply(&h, SplitPart::B21, &cfg).unwrap();
    for (i, x) in g.points().into_iter().enumerate() {
        if x.abs() >= 6.0 {
            assert_eq!(a1.values()[i], 0.0, "A1 at {x}");
        }
        if x.abs() <= 2.5 {
            assert_eq!(b21.values()[i], 0.0, "B21 at {x}");
        }
    }
    assert!(SplitPart::parse("b22").unwrap() == SplitPart::B22);
    assert!(SplitPart::parse("c1").is_err());
}

#[test]
fn linearised_operator_conserves_mass_and_is_linear() {
    let g = grid40();
    let mut rng = common::rng(5);
    let p = common::mean_zero_field(&mut rng, &g, 3, 5.0);
    let q = common::mean_zero_field(&mut rng, &g, 3, 5.0);
    let lp = apply_lin_physical(&p).unwrap();
    assert!(lp.integral().abs() < 1e-6 * p.max_abs());
    let lc = apply_lin_physical(&p.scale(2.0).add(&q.scale(-0.5)).unwrap()).unwrap();
    let want = lp.scale(2.0).add(&apply_lin_physical(&q).unwrap().scale(-0.5)).unwrap();
    assert!(lc.sup_distance(&want).unwrap() < 1e-12 * lc.max_abs().max(1.0));
}

#[test]
fn explicit_identities() {
    let (a, b) = moment_identities(1e-12).unwrap();
    assert!((a - 1.0).abs() < 1e-6);
    assert!(b.abs() < 1e-6);
    assert!((lambda0() - 3.297_442_541_400_256).abs() < 1e-12);
    let hh = i0_fn(&|x| h_density(x, 1.0), &|x| h_density(x, 1.0), 1e-10).unwrap();
    assert!(((0.5 * hh).exp() - lambda0()).abs() < 1e-5);
}

#[test]
fn kernel_dichotomy() {
    // φ₀ spans the kernel of 𝓛₀; it has nonzero energy and nonzero I₀ against G₀.
    let v = i0_fn(&phi0_density, &g0_rescaled_steady, 1e-10).unwrap();
    assert!((v + 1.0 / lambda0().powi(3)).abs() < 1e-6);
    let g = PhysicalGrid::new(400.0, 0.02).unwrap();
    let phi0 = PhysicalField::from_fn(&g, phi0_density).unwrap();
    let m2 = moments_with_tails(&phi0)[2].unwrap();
    assert!((m2 + 2.0 / lambda0().powi(3)).abs() < 1e-4);
    let cfg = SplitConfig::new(10.0, 2.5).unwrap();
    assert!(matches!(gap_estimate(&cfg, &phi0, 10.0), Err(Error::NotMeanZero(_))));

    // 𝓛₀ is bounded below on mean-zero samples; the conjugation stretches by λ₀, hence the wider grid.
    let g = PhysicalGrid::new(120.0, 0.05).unwrap();
    let mut rng = common::rng(6);
    for _ in 0..10 {
        let h = common::mean_zero_field(&mut rng, &g, 3, 3.0);
        let (l0h, _) = rescaled_operator_check(&h, lambda0()).unwrap();
        let ratio = weighted_l1_norm(&l0h, 2.5).unwrap() / weighted_l1_norm(&h, 2.5).unwrap();
        assert!(ratio > 0.01 * SplitConfig::new(10.0, 2.5).unwrap().nu_target, "ratio {ratio}");
    }
}

#[test]
fn rescaled_operator() {
    let g = grid40();
    let h = common::smooth_field(&mut common::rng(7), &g, 1, 0.1);
    let (l, r) = rescaled_operator_check(&h, 1.0).unwrap();
    assert!(l.sup_distance(&r).unwrap() <= 1e-14 * l.max_abs());
    assert!(l.sup_distance(&apply_lin_physical(&h).unwrap()).unwrap() <= 1e-14 * l.max_abs());

    // 𝓛g₀ = 0, so φ₀ = g₀(λ₀·) spans the kernel of 𝓛₀ by the conjugation identity below.
    let wide = PhysicalGrid::new(160.0, 0.01).unwrap();
    let g0 = PhysicalField::from_fn(&wide, g0_density).unwrap();
    assert!(apply_lin_physical(&g0).unwrap().max_abs() <= 1e-6 * g0.max_abs());

    // The x⁻⁴ tail of H beyond the grid edge limits the identity, hence the wider grid.
    let g = PhysicalGrid::new(80.0, 0.05).unwrap();
    let h = common::smooth_field(&mut common::rng(8), &g, 3, 4.0);
    let (l, r) = rescaled_operator_check(&h, 2.0).unwrap();
    let d = l.sup_distance(&r).unwrap();
    assert!(d < 1e-7 * l.max_abs(), "{}", d / l.max_abs());
}

/// Third-difference measure at spacing `s`, smoothed by a Gaussian of variance `v`.
fn smoothed_measure(mu: &DiscreteMeasure, v: f64, g: &Arc<PhysicalGrid>) -> PhysicalField {
    PhysicalField::from_fn(g, |x| mu.atoms.iter().map(|(y, w)| w * normal_density(x - y, v)).sum()).unwrap()
}

#[test]
fn a_is_bounded_from_x_k() {
    let g = grid40();
    let fg = make_grid(1e-4, 32, 20).unwrap();
    let cfg = SplitConfig::new(10.0, 2.5).unwrap();
    let mut rng = common::rng(10);
    let mut ratios = Vec::new();
    // The weighted norm is not translation invariant while |||·|||_k is, so the atoms stay centred.
    for _ in 0..50 {
        use rand::Rng;
        let s = rng.random_range(0.5..1.5);
        let c = rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let mu = DiscreteMeasure::third_difference(-1.5 * s + rng.random_range(-0.5..0.5), s, c);
        let var = rng.random_range(0.5..2.0);
        let h = smoothed_measure(&mu, var, &g);
        let transform = sample_function(
            &fg,
            |xi| {
                let damp = (-0.5 * var * xi * xi).exp();
                mu.atoms.iter().map(|(y, w)| Complex64::from_polar(*w, -y * xi)).sum::<Complex64>() * damp
            },
            Taylor::ZERO,
        )
        .unwrap();
        let a = split_apply(&h, SplitPart::A1, &cfg)
            .unwrap()
            .add(&split_apply(&h, SplitPart::A2, &cfg).unwrap())
            .unwrap();
        ratios.push(weighted_l1_norm(&a, cfg.a).unwrap() / norm_k(&transform, 2.5).unwrap());
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    assert!(hi.is_finite() && hi < 2.0 * lo, "ratios in [{lo}, {hi}]");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn six_parts_sum_to_the_operator(seed in 0u64..10_000, r in 6.0f64..20.0) {
        let g = grid40();
        // The split drops the H·∫h term of Q₀, so it holds on mass-free fields.
        let h = common::mean_zero_field(&mut common::rng(seed), &g, 3, 5.0);
        let cfg = SplitConfig::new(r, 2.5).unwrap();
        let l = apply_lin_physical(&h).unwrap();
        let s = sum_of_parts(&h, &cfg);
        prop_assert!(s.sup_distance(&l).unwrap() <= 1e-8 * l.max_abs());
    }

    #[test]
    fn drift_part_is_dissipative(seed in 0u64..10_000, a in 2.1f64..2.9) {
        let g = grid40();
        let h = common::smooth_field(&mut common::rng(seed), &g, 3, 5.0);
        let cfg = SplitConfig::new(10.0, a).unwrap();
        let b1 = split_apply(&h, SplitPart::B1, &cfg).unwrap();
        let lhs = signed_pairing(&h, &b1, a).unwrap();
        let norm = h.map(|_, v| v.abs()).integrate_with(|x| weight(a, x));
        prop_assert!(lhs <= (a - 4.0) / 4.0 * norm + 1e-6 * norm, "{} vs {}", lhs / norm, (a - 4.0) / 4.0);
    }
}
