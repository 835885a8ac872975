use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Univariate nonlinearity applied elementwise to a design column.
pub type TransformFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Magnitude floor applied before logs and negative powers so the power/log
/// family never divides by zero or takes ln(0).
pub const MAG_FLOOR: f64 = 1e-12;
/// Magnitude ceiling for the same family: x² at |x| ≈ 1e300 would overflow,
/// and every registered transform must stay finite on all finite inputs.
pub const MAG_CEIL: f64 = 1e12;

fn clamped_mag(x: f64) -> f64 {
    x.abs().clamp(MAG_FLOOR, MAG_CEIL)
}

fn sign(x: f64) -> f64 {
    // f64::signum(0.0) is 1.0; the power family wants sign(0) = 0.
    if x == 0.0 {
        0.0
    } else {
        x.signum()
    }
}

fn norm_cdf(x: f64) -> f64 {
    0.5 * (1.0 + statrs::function::erf::erf(x / std::f64::consts::SQRT_2))
}

/// Named transforms available to the feature generator and the parser.
/// Registration order is preserved so serialized configurations and uniform
/// sampling over transforms are deterministic.
pub struct TransformRegistry {
    names: Vec<String>,
    fns: HashMap<String, TransformFn>,
}

impl TransformRegistry {
    pub fn empty() -> Self {
        TransformRegistry {
            names: Vec::new(),
            fns: HashMap::new(),
        }
    }

    /// The stock library of 30 transforms.
    pub fn builtin() -> Self {
        let mut reg = TransformRegistry::empty();
        let deg = std::f64::consts::PI / 180.0;
        let builtins: Vec<(&str, fn(f64) -> f64)> = vec![
            ("sigmoid", |x| 1.0 / (1.0 + (-x).exp())),
            ("relu", |x| x.max(0.0)),
            ("nrelu", |x| (-x).max(0.0)),
            ("hs", |x| (x > 0.0) as u8 as f64),
            ("nhs", |x| (x < 0.0) as u8 as f64),
            ("gelu", |x| x * norm_cdf(x)),
            ("ngelu", |x| -x * norm_cdf(-x)),
            ("not", |x| 1.0 - x),
            ("sqroot", |x| x.abs().sqrt()),
            ("troot", |x| x.abs().cbrt()),
            ("exp_dbl", |x| (-x.abs()).exp()),
            ("gauss", |x| (-x * x).exp()),
            ("erf", statrs::function::erf::erf),
            ("arcsinh", f64::asinh),
            ("pm2", |x| clamped_mag(x).powi(-2)),
            ("pm1", |x| sign(x) * clamped_mag(x).recip()),
            ("pm05", |x| clamped_mag(x).powf(-0.5)),
            ("p0", |x| clamped_mag(x).ln()),
            ("p05", |x| x.abs().sqrt()),
            ("p2", |x| clamped_mag(x).powi(2)),
            ("p3", |x| sign(x) * clamped_mag(x).powi(3)),
            ("p0pm2", |x| clamped_mag(x).ln() * clamped_mag(x).powi(-2)),
            ("p0pm05", |x| clamped_mag(x).ln() * clamped_mag(x).powf(-0.5)),
            ("p0p0", |x| clamped_mag(x).ln().powi(2)),
            ("p0p05", |x| clamped_mag(x).ln() * clamped_mag(x).sqrt()),
            ("p0p1", |x| clamped_mag(x).ln() * sign(x) * clamped_mag(x)),
            ("p0p2", |x| clamped_mag(x).ln() * clamped_mag(x).powi(2)),
            ("p0p3", |x| {
                clamped_mag(x).ln() * sign(x) * clamped_mag(x).powi(3)
            }),
        ];
        for (name, f) in builtins {
            reg.register(name, f).expect("builtin transforms are finite");
        }
        // Closures that capture `deg` cannot be plain fn items.
        reg.register("sin_deg", move |x| (x * deg).sin())
            .expect("builtin transforms are finite");
        reg.register("cos_deg", move |x| (x * deg).cos())
            .expect("builtin transforms are finite");
        // Keep the published name order independent of registration details.
        let order = [
            "sigmoid", "relu", "nrelu", "hs", "nhs", "gelu", "ngelu", "not", "sqroot", "troot",
            "sin_deg", "cos_deg", "exp_dbl", "gauss", "erf", "arcsinh", "pm2", "pm1", "pm05",
            "p0", "p05", "p2", "p3", "p0pm2", "p0pm05", "p0p0", "p0p05", "p0p1", "p0p2", "p0p3",
        ];
        reg.names = order.iter().map(|s| s.to_string()).collect();
        reg
    }

    /// Add a transform after checking it stays finite on a 1000-point probe
    /// grid spanning 0, ±1e-12 … ±1e12.
    pub fn register(
        &mut self,
        name: &str,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<()> {
        if self.fns.contains_key(name) {
            return Err(Error::DuplicateName(name.to_string()));
        }
        for x in probe_grid() {
            let y = f(x);
            if !y.is_finite() {
                return Err(Error::NonFiniteTransform {
                    name: name.to_string(),
                    input: x,
                });
            }
        }
        self.names.push(name.to_string());
        self.fns.insert(name.to_string(), Arc::new(f));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&TransformFn> {
        self.fns
            .get(name)
            .ok_or_else(|| Error::UnknownTransform(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.fns.contains_key(name)
    }

    /// Registered names in stable order.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Restrict to the given names, preserving the given order. Unknown names
    /// error; an empty list yields an empty registry (linear-terms-only runs).
    pub fn subset(&self, names: &[String]) -> Result<TransformRegistry> {
        let mut out = TransformRegistry::empty();
        for name in names {
            let f = self.get(name)?.clone();
            if out.fns.contains_key(name) {
                return Err(Error::DuplicateName(name.clone()));
            }
            out.names.push(name.clone());
            out.fns.insert(name.clone(), f);
        }
        Ok(out)
    }
}

/// 1000 probe inputs: 0, the clamp edges ±1e-12 and ±1e12, and log-spaced
/// magnitudes between them with both signs.
fn probe_grid() -> Vec<f64> {
    let mut grid = vec![0.0, 1e-12, -1e-12, 1e12, -1e12];
    let rest = 1000 - grid.len();
    let pairs = rest / 2;
    for i in 0..pairs {
        let t = i as f64 / (pairs - 1) as f64;
        let mag = 10f64.powf(-12.0 + 24.0 * t);
        grid.push(mag);
        grid.push(-mag);
    }
    if grid.len() < 1000 {
        grid.push(1.0);
    }
    debug_assert_eq!(grid.len(), 1000);
    grid
}
