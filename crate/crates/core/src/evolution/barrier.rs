use crate::closed_forms::{phi_steady, psi_beta};
use crate::error::{Error, Result};
use crate::fourier_grid::{Branch, GridProfile};
use crate::metrics::rate_sigma_k;
use crate::special::bracket;

/// 4 ln(4/3), the short time after which the gain dominates from below.
pub const T0: f64 = 1.150_728_289_807_123_8;

/// Pointwise majorants of |φ|.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Envelope {
    /// Φ(a|ξ|).
    PhiScaled(f64),
    /// Ψ_β(c₀|ξ|). A `c0` that underflowed to zero makes the envelope identically 1.
    PsiBetaScaled { beta: f64, c0: f64 },
}

impl Envelope {
    pub fn eval(&self, xi: f64) -> f64 {
        match *self {
            Envelope::PhiScaled(a) => phi_steady(a * xi),
            Envelope::PsiBetaScaled { beta, c0 } => psi_beta(beta, c0 * xi),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EnvelopeCheck {
    pub holds: bool,
    pub worst_margin: f64,
    pub worst_xi: f64,
}

/// min over both branches of envelope − |p|.
pub fn barrier_envelope_check(p: &GridProfile, envelope: Envelope) -> EnvelopeCheck {
    let xi = p.grid().xi();
    let mut worst = f64::INFINITY;
    let mut at = 0.0;
    for (b, sign) in [(Branch::Pos, 1.0), (Branch::Neg, -1.0)] {
        for (x, v) in xi.iter().zip(p.branch(b)) {
            let m = envelope.eval(*x) - v.norm();
            if m < worst {
                worst = m;
                at = sign * x;
            }
        }
    }
    EnvelopeCheck { holds: worst >= -1e-14, worst_margin: worst, worst_xi: at }
}

/// τ(δ, β, β') = β'·ln⟨√(β/(2β'))δ⟩ / (2^{2β'} − 1).
pub fn tau(delta: f64, beta: f64, beta_prime: f64) -> f64 {
    if beta_prime > 1e-280 {
        let r = (beta / (2.0 * beta_prime)).sqrt() * delta;
        return beta_prime * bracket(r).ln() / (2.0 * beta_prime * std::f64::consts::LN_2).exp_m1();
    }
    tau_from_log(delta, beta, beta_prime.ln())
}

/// τ with β' given through its logarithm, for β' far below the smallest double.
pub fn tau_from_log(delta: f64, beta: f64, ln_beta_prime: f64) -> f64 {
    if ln_beta_prime > -600.0 {
        return tau(delta, beta, ln_beta_prime.exp());
    }
    // β'/(2^{2β'} − 1) → 1/(2 ln 2) and ln⟨r⟩ → ln r as β' → 0.
    let ln_r2 = (beta * delta * delta / 2.0).ln() - ln_beta_prime;
    0.5 * ln_r2 / (2.0 * std::f64::consts::LN_2)
}

/// Barrier certificate: constants that let an envelope Ψ_β(c|ξ|) on the data propagate to
/// `sup_t |φ(t, ξ)| ≤ Ψ_β(c₀|ξ|)`.
#[derive(Clone, Debug)]
pub struct BarrierCertificate {
    pub beta: f64,
    pub c: f64,
    pub c_k: f64,
    pub k: f64,
    pub alpha: f64,
    pub delta: f64,
    pub r_alpha_k: f64,
    pub t0: f64,
    pub t_star: f64,
    /// May underflow to zero; `ln_alpha_prime` is exact.
    pub alpha_prime: f64,
    pub ln_alpha_prime: f64,
    pub tau: f64,
    pub j: u64,
    /// May underflow to zero; `log2_c0` is exact.
    pub c0: f64,
    pub log2_c0: f64,
}

impl BarrierCertificate {
    pub fn envelope(&self) -> Envelope {
        Envelope::PsiBetaScaled { beta: self.beta, c0: self.c0 }
    }
}

/// (1+r)e^{−r} − 1 without cancellation.
fn steady_minus_one(r: f64) -> f64 {
    if r < 0.5 {
        crate::closed_forms::phi_steady_remainder(r) - 0.5 * r * r
    } else {
        phi_steady(r) - 1.0
    }
}

pub fn barrier_certificate(beta: f64, c: f64, c_k: f64, k: f64) -> Result<BarrierCertificate> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::InvalidParameter(format!("c must lie in (0, 1], got {c}")));
    }
    if !(k > 2.0 && k < 3.0) {
        return Err(Error::InvalidParameter(format!("k must lie in (2, 3), got {k}")));
    }
    if c_k.is_nan() || c_k < 0.0 {
        return Err(Error::InvalidParameter(format!("C_k must be non-negative, got {c_k}")));
    }
    if c_k.is_infinite() {
        return Err(Error::CertificateFailed("C_k < ∞ violated".into()));
    }
    let alpha = ((-4f64).exp() / 2.0).min(c * c * beta);
    let r_alpha_k = if c_k == 0.0 { 4.0 } else { (alpha / (2.0 * c_k)).powf(1.0 / (k - 2.0)).min(4.0) };

    // F(r) = (1+r)e^{−r} + C_k r^k − (1+r²)^{−α/2}; δ is its first positive crossing.
    let f = |r: f64| steady_minus_one(r) + c_k * r.powf(k) - (-0.5 * alpha * (r * r).ln_1p()).exp_m1();
    let mut lo = 1e-6;
    if f(lo) > 0.0 {
        return Err(Error::CertificateFailed("F(r) ≤ 0 fails already at r = 1e-6".into()));
    }
    let r_max = 1e3;
    let mut delta = r_max;
    let ratio = 1.005f64;
    let mut r = lo;
    while r < r_max {
        let next = r * ratio;
        if f(next) > 0.0 {
            let mut hi = next;
            lo = r;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            delta = lo;
            break;
        }
        r = next;
    }

    let sigma = rate_sigma_k(k);
    let h_alpha = steady_minus_one(r_alpha_k) + 0.5 * alpha * r_alpha_k * r_alpha_k;
    if h_alpha >= 0.0 {
        return Err(Error::CertificateFailed(format!(
            "h_alpha(r_alpha_k) < 0 violated (h = {h_alpha:e} at r = {r_alpha_k:e})"
        )));
    }
    let t_star = if c_k == 0.0 {
        0.0
    } else {
        let arg = -h_alpha / (c_k * 4f64.powf(k));
        if arg >= 1.0 {
            0.0
        } else {
            -arg.ln() / sigma
        }
    };

    let ln2 = std::f64::consts::LN_2;
    let mut ln_alpha_prime = alpha.ln() - ln2;
    let mut tau_value = tau_from_log(delta, alpha, ln_alpha_prime);
    let mut halvings = 0u64;
    while tau_value < t_star {
        ln_alpha_prime -= ln2;
        tau_value = tau_from_log(delta, alpha, ln_alpha_prime);
        halvings += 1;
        if halvings > 10_000_000 {
            return Err(Error::CertificateFailed("tau ≥ t_star not reached".into()));
        }
    }
    let log2_ratio = (beta.ln() - ln_alpha_prime) / ln2;
    let j = log2_ratio.floor() as u64 + 1;
    let log2_c0 = c.log2() - j as f64;
    Ok(BarrierCertificate {
        beta,
        c,
        c_k,
        k,
        alpha,
        delta,
        r_alpha_k,
        t0: T0,
        t_star,
        alpha_prime: ln_alpha_prime.exp(),
        ln_alpha_prime,
        tau: tau_value,
        j,
        c0: log2_c0.exp2(),
        log2_c0,
    })
}
