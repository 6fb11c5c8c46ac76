use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;

use crate::closed_forms::{gaussian_minus_steady, gaussian_profile, phi_scaled, phi_steady, psi0, psi_test4};
use crate::error::{Error, Result};
use crate::fourier_grid::{sample_function, sample_real, DyadicGrid, GridProfile, Taylor};
use crate::registry::{Named, Registry};

/// An initial profile.
pub trait InitialDatum: Send + Sync {
    fn label(&self) -> String;

    /// Scale λ of the steady state the nonlinear flow relaxes to.
    fn reference_scale(&self) -> f64 {
        1.0
    }

    /// The stepped state: the deviation `φ₀ − Φ_λ` for nonlinear flows, the profile itself
    /// for the linearised flow.
    fn state(&self, grid: &Arc<DyadicGrid>, nonlinear: bool) -> Result<GridProfile>;
}

/// Parameters a datum may read.
#[derive(Clone, Debug, Default)]
pub struct DatumParams {
    pub lambda: Option<f64>,
    pub path: Option<PathBuf>,
}

/// Builds a datum from parameters; registered by name.
pub trait InitialDatumFactory: Named + Send + Sync {
    fn build(&self, params: &DatumParams) -> Result<Arc<dyn InitialDatum>>;
}

fn linear_only(name: &str) -> Error {
    Error::InvalidParameter(format!("'{name}' is a datum of the linearised flow"))
}

struct Gaussian;
impl InitialDatum for Gaussian {
    fn label(&self) -> String {
        "gaussian".into()
    }
    fn state(&self, grid: &Arc<DyadicGrid>, nonlinear: bool) -> Result<GridProfile> {
        if nonlinear {
            sample_real(grid, gaussian_minus_steady, Taylor::ZERO)
        } else {
            sample_real(grid, gaussian_profile, Taylor::UNIT)
        }
    }
}

struct SteadyScaled(f64);
impl InitialDatum for SteadyScaled {
    fn label(&self) -> String {
        format!("steady_scaled({})", self.0)
    }
    fn reference_scale(&self) -> f64 {
        self.0
    }
    fn state(&self, grid: &Arc<DyadicGrid>, nonlinear: bool) -> Result<GridProfile> {
        if nonlinear {
            Ok(GridProfile::zeros(grid.clone()))
        } else {
            let l = self.0;
            sample_real(grid, |x| phi_scaled(x, l), Taylor::new(1.0, 0.0, 1.0 / (l * l)))
        }
    }
}

struct Psi0;
impl InitialDatum for Psi0 {
    fn label(&self) -> String {
        "psi0".into()
    }
    fn state(&self, grid: &Arc<DyadicGrid>, nonlinear: bool) -> Result<GridProfile> {
        if nonlinear {
            return Err(linear_only("psi0"));
        }
        sample_real(grid, psi0, Taylor::new(0.0, 0.0, -2.0))
    }
}

struct PsiTest4;
impl InitialDatum for PsiTest4 {
    fn label(&self) -> String {
        "psi_test4".into()
    }
    fn state(&self, grid: &Arc<DyadicGrid>, nonlinear: bool) -> Result<GridProfile> {
        if nonlinear {
            return Err(linear_only("psi_test4"));
        }
        sample_real(grid, psi_test4, Taylor::ZERO)
    }
}

/// Samples `xi,re,im` on ξ > 0, read from a text file; the negative branch is the conjugate.
/// Nonlinear runs read φ₀ (with moments (1, 0, 1)); linear runs read a mean-zero ψ₀.
struct CustomSamples {
    path: PathBuf,
    rows: Vec<(f64, Complex64)>,
}

impl CustomSamples {
    fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("xi") {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() < 2 {
                return Err(Error::Parse(format!("line {}: expected xi,re[,im]", lineno + 1)));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            let xi = parse(cols[0])?;
            let re = parse(cols[1])?;
            let im = if cols.len() > 2 { parse(cols[2])? } else { 0.0 };
            if !(xi > 0.0) {
                return Err(Error::Parse(format!("line {}: xi must be positive", lineno + 1)));
            }
            rows.push((xi, Complex64::new(re, im)));
        }
        if rows.len() < 2 {
            return Err(Error::Parse("need at least two samples".into()));
        }
        if rows.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Parse("xi must increase strictly".into()));
        }
        Ok(Self { path: path.to_path_buf(), rows })
    }

    /// Linear interpolation in ln ξ; zero above the last sample, a cubic law below the first.
    fn value(&self, xi: f64, base: impl Fn(f64) -> f64) -> Complex64 {
        let r = xi.abs();
        let dev = |i: usize| self.rows[i].1 - base(self.rows[i].0);
        let last = self.rows.len() - 1;
        let v = if r > self.rows[last].0 {
            Complex64::new(-base(r), 0.0)
        } else if r < self.rows[0].0 {
            dev(0) * (r / self.rows[0].0).powi(3)
        } else {
            let i = self.rows.partition_point(|row| row.0 <= r).clamp(1, last);
            let (x0, x1) = (self.rows[i - 1].0.ln(), self.rows[i].0.ln());
            let w = (r.ln() - x0) / (x1 - x0);
            dev(i - 1) * (1.0 - w) + dev(i) * w
        };
        if xi < 0.0 {
            v.conj()
        } else {
            v
        }
    }
}

impl InitialDatum for CustomSamples {
    fn label(&self) -> String {
        format!("custom_samples({})", self.path.display())
    }
    fn state(&self, grid: &Arc<DyadicGrid>, nonlinear: bool) -> Result<GridProfile> {
        if nonlinear {
            sample_function(grid, |x| self.value(x, phi_steady), Taylor::ZERO)
        } else {
            sample_function(grid, |x| self.value(x, |_| 0.0), Taylor::ZERO)
        }
    }
}

macro_rules! factory {
    ($ty:ident, $name:literal, |$p:ident| $body:expr) => {
        struct $ty;
        impl Named for $ty {
            fn name(&self) -> &str {
                $name
            }
        }
        impl InitialDatumFactory for $ty {
            fn build(&self, $p: &DatumParams) -> Result<Arc<dyn InitialDatum>> {
                $body
            }
        }
    };
}

factory!(GaussianFactory, "gaussian", |_p| Ok(Arc::new(Gaussian)));
factory!(Psi0Factory, "psi0", |_p| Ok(Arc::new(Psi0)));
factory!(PsiTest4Factory, "psi_test4", |_p| Ok(Arc::new(PsiTest4)));
factory!(SteadyFactory, "steady_scaled", |p| {
    let l = p.lambda.unwrap_or(1.0);
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {l}")));
    }
    Ok(Arc::new(SteadyScaled(l)))
});
factory!(CustomFactory, "custom_samples", |p| {
    let path = p
        .path
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("custom_samples needs a path".into()))?;
    Ok(Arc::new(CustomSamples::load(path)?))
});

/// Registry of the built-in initial data.
pub fn default_initial_data() -> Registry<dyn InitialDatumFactory> {
    let mut r: Registry<dyn InitialDatumFactory> = Registry::new("initial datum");
    r.register(Arc::new(GaussianFactory));
    r.register(Arc::new(Psi0Factory));
    r.register(Arc::new(PsiTest4Factory));
    r.register(Arc::new(SteadyFactory));
    r.register(Arc::new(CustomFactory));
    r
}
