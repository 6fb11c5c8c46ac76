//! Run configuration read from TOML.

use std::path::Path;
use std::sync::Arc;

use dyadic_kinetics::evolution::{Envelope, ObservableParams};
use dyadic_kinetics::fourier_grid::{make_grid, DyadicGrid};
use dyadic_kinetics::physical::PhysicalGrid;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub grid: GridConfig,
    pub physical: PhysicalConfig,
    pub run: RunSection,
    #[serde(rename = "observable", skip_serializing_if = "Vec::is_empty")]
    pub observables: Vec<ObservableConfig>,
    pub rates: RatesConfig,
    pub certificate: CertificateConfig,
    pub gap: GapConfig,
}

/// Dyadic frequency grid `ξ_j = xi_min·2^{j/m}`, `j = 0..m·octaves`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub xi_min: f64,
    pub m: usize,
    pub octaves: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { xi_min: 1e-14, m: 32, octaves: 56 }
    }
}

/// Uniform physical grid on `[−half_width, half_width]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalConfig {
    pub half_width: f64,
    pub spacing: f64,
}

impl Default for PhysicalConfig {
    fn default() -> Self {
        Self { half_width: 80.0, spacing: 0.05 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// `nonlinear` or `linear`; the subcommand decides when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    /// Initial datum; `gaussian` for nonlinear runs and `psi_test4` for linear runs by default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub datum: Option<String>,
    /// Scale of `steady_scaled`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Sample file of `custom_samples`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples_path: Option<String>,
    pub t_end: f64,
    pub sample_every: usize,
    pub step_shift: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { kind: None, datum: None, lambda: None, samples_path: None, t_end: 40.0, sample_every: 4, step_shift: 1 }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObservableConfig {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    pub homogeneous: bool,
    /// Envelope Ψ_β(c₀|ξ|) of `barrier_margin`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    /// Envelope Φ(a|ξ|) of `barrier_margin`, used when `beta` is absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_scale: Option<f64>,
}

impl ObservableConfig {
    pub fn named(name: &str) -> Self {
        Self { name: name.into(), ..Default::default() }
    }

    pub fn params(&self) -> ObservableParams {
        let envelope = match (self.beta, self.c0, self.phi_scale) {
            (Some(beta), c0, _) => Some(Envelope::PsiBetaScaled { beta, c0: c0.unwrap_or(1.0) }),
            (None, _, Some(a)) => Some(Envelope::PhiScaled(a)),
            _ => None,
        };
        ObservableParams { k: self.k, p: self.p, s: self.s, homogeneous: self.homogeneous, envelope }
    }
}

/// Observables recorded when the config lists none.
pub fn default_observables() -> Vec<ObservableConfig> {
    vec![
        ObservableConfig { k: Some(2.5), ..ObservableConfig::named("norm_k") },
        ObservableConfig { k: Some(2.5), p: Some(2.0), ..ObservableConfig::named("norm_kp") },
        ObservableConfig { s: Some(1.0), ..ObservableConfig::named("sobolev") },
        ObservableConfig::named("moments"),
        ObservableConfig::named("residual"),
    ]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatesConfig {
    pub k: Vec<f64>,
    /// Integrability orders; each adds a `(k, p)` row next to the plain `k` row.
    pub p: Vec<f64>,
    /// Flow of the sweep; linear unless set.
    pub kind: String,
    pub t_end: f64,
    /// Fit window; defaults to `[t_end/4, t_end]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    pub tolerance: f64,
}

impl Default for RatesConfig {
    fn default() -> Self {
        Self { k: vec![2.2, 2.5, 2.8], p: Vec::new(), kind: "linear".into(), t_end: 200.0, window: None, tolerance: 0.005 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertificateConfig {
    pub beta: f64,
    pub c: f64,
    /// `|||φ₀ − Φ|||_k`; computed for the Gaussian datum on the configured grid when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_k: Option<f64>,
    pub k: f64,
    /// τ is tabulated at β' = 2^{−i}, i = 1..=halvings.
    pub halvings: u32,
}

impl Default for CertificateConfig {
    fn default() -> Self {
        Self { beta: 2.0, c: 1.0, c_k: None, k: 2.5, halvings: 20 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GapConfig {
    pub a: f64,
    pub r: f64,
    pub t_end: f64,
    pub sample_interval: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    /// Size of the seeded dissipativity ensemble.
    pub samples: usize,
    /// Gaussian bumps per ensemble member, centred within ±reach.
    pub bumps: usize,
    pub reach: f64,
    pub tolerance: f64,
}

impl Default for GapConfig {
    fn default() -> Self {
        Self {
            a: 2.5,
            r: 100.0,
            t_end: 200.0,
            sample_interval: 5.0,
            window: Some([50.0, 200.0]),
            samples: 30,
            bumps: 3,
            reach: 30.0,
            tolerance: 0.005,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let usage = |m: String| Err(CliError::Usage(m));
        let r = &self.run;
        if !(r.t_end.is_finite() && r.t_end >= 0.0) {
            return usage(format!("run.t_end must be non-negative, got {}", r.t_end));
        }
        if r.sample_every == 0 || r.step_shift == 0 {
            return usage("run.sample_every and run.step_shift must be positive".into());
        }
        if let Some(k) = &r.kind {
            if k != "nonlinear" && k != "linear" {
                return usage(format!("run.kind must be 'nonlinear' or 'linear', got '{k}'"));
            }
        }
        if self.rates.kind != "nonlinear" && self.rates.kind != "linear" {
            return usage(format!("rates.kind must be 'nonlinear' or 'linear', got '{}'", self.rates.kind));
        }
        if let Some(w) = self.rates.window.or(self.gap.window) {
            if !(w[0] < w[1]) {
                return usage(format!("fit window [{}, {}] is empty", w[0], w[1]));
            }
        }
        let c = &self.certificate;
        if !(c.k > 2.0 && c.k < 3.0) {
            return usage(format!("certificate.k must lie in (2, 3), got {}", c.k));
        }
        Ok(())
    }

    pub fn dyadic_grid(&self) -> CliResult<Arc<DyadicGrid>> {
        let g = &self.grid;
        Ok(make_grid(g.xi_min, g.m, g.octaves)?)
    }

    pub fn physical_grid(&self) -> CliResult<Arc<PhysicalGrid>> {
        Ok(PhysicalGrid::new(self.physical.half_width, self.physical.spacing)?)
    }

    /// The config as TOML, for echoing into output headers.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }
}
