//! Small special functions shared across modules.

use num_complex::Complex64;

/// `e^{-iy}` minus its Taylor polynomial of degree `order - 1`.
/// Uses the series below |y| = 1 so that vanishing moments do not leak rounding noise.
pub fn exp_remainder(order: usize, y: f64) -> Complex64 {
    if y.abs() >= 1.0 || order == 0 {
        let mut v = Complex64::new(0.0, -y).exp();
        let mut term = Complex64::new(1.0, 0.0);
        for l in 0..order {
            if l > 0 {
                term *= Complex64::new(0.0, -y) / l as f64;
            }
            v -= term;
        }
        return v;
    }
    let step = Complex64::new(0.0, -y);
    let mut term = Complex64::new(1.0, 0.0);
    for l in 1..=order {
        term *= step / l as f64;
    }
    let mut sum = term;
    let mut l = order;
    loop {
        l += 1;
        term *= step / l as f64;
        sum += term;
        if term.norm() <= 1e-18 * sum.norm() || l > order + 40 {
            break;
        }
    }
    sum
}

/// Japanese bracket ⟨r⟩ = √(1 + r²).
pub fn bracket(r: f64) -> f64 {
    r.hypot(1.0)
}
