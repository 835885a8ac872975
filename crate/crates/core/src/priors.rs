use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature::Complexity;
use crate::quadrature::{log_integrate, log_sum_exp};

const QUAD_REL_TOL: f64 = 1e-8;

/// Names that exist in the wider literature but are not implemented here.
const UNSUPPORTED: [&str; 8] = [
    "EB-local", "EB-global", "JZS", "ZS-null", "ZS-full", "hyper-g", "hyper-g-laplace", "AIC",
];

/// Prior on regression coefficients, selecting the marginal-likelihood
/// criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BetaPrior {
    /// Zellner g-prior with fixed g (default g = max(n, p²), p the number of
    /// original covariates).
    GPrior { g: Option<f64> },
    /// Jeffreys prior on coefficients, BIC-style criterion.
    Bic,
    /// A hyperprior on u = 1/(1+g) from the truncated
    /// compound-confluent-hypergeometric family.
    Tcch(TcchRow),
}

impl Default for BetaPrior {
    fn default() -> Self {
        BetaPrior::GPrior { g: None }
    }
}

/// Named hyperprior configurations plus the fully custom row. Rows whose
/// parameters depend on the data (n, p, model size) are resolved per model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TcchRow {
    Ch { a: f64, b: f64, s: f64 },
    Uniform,
    Jeffreys,
    BetaPrime,
    Benchmark,
    TruncGamma { a: f64, s: f64 },
    ZsAdapted,
    Robust,
    HyperGN,
    Intrinsic,
    Custom { a: f64, b: f64, rho: f64, s: f64, v: f64, k: f64 },
}

/// Concrete hyperparameters of one tCCH density
/// f(u) ∝ u^{a/2−1}(1−vu)^{b/2−1}(k+(1−k)vu)^{−ρ} e^{−su/2} on (0, 1/v).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcchParams {
    pub a: f64,
    pub b: f64,
    pub rho: f64,
    pub s: f64,
    pub v: f64,
    pub k: f64,
}

impl TcchRow {
    /// `n` rows, `p` original covariates, `p_m` non-intercept columns of the
    /// model at hand.
    pub fn resolve(&self, n: usize, p: usize, p_m: usize) -> TcchParams {
        let (nf, pmf) = (n as f64, p_m as f64);
        let t = |a, b, rho, s, v, k| TcchParams { a, b, rho, s, v, k };
        match *self {
            TcchRow::Ch { a, b, s } => t(a, b, 0.0, s, 1.0, 1.0),
            TcchRow::Uniform => t(2.0, 2.0, 0.0, 0.0, 1.0, 1.0),
            TcchRow::Jeffreys => t(0.0, 2.0, 0.0, 0.0, 1.0, 1.0),
            TcchRow::BetaPrime => t(0.5, nf - pmf - 1.5, 0.0, 0.0, 1.0, 1.0),
            TcchRow::Benchmark => {
                t(0.02, 0.02 * default_g(n, p), 0.0, 0.0, 1.0, 1.0)
            }
            TcchRow::TruncGamma { a, s } => t(2.0 * a, 2.0, 0.0, 2.0 * s, 1.0, 1.0),
            TcchRow::ZsAdapted => t(1.0, 2.0, 0.0, nf + 3.0, 1.0, 1.0),
            TcchRow::Robust => t(1.0, 2.0, 1.5, 0.0, (nf + 1.0) / (pmf + 1.0), 1.0),
            TcchRow::HyperGN => t(1.0, 2.0, 1.5, 0.0, 1.0, 1.0 / nf),
            TcchRow::Intrinsic => t(
                1.0,
                1.0,
                1.0,
                0.0,
                (nf + pmf + 1.0) / (pmf + 1.0),
                (nf + pmf + 1.0) / nf,
            ),
            TcchRow::Custom { a, b, rho, s, v, k } => t(a, b, rho, s, v, k),
        }
    }
}

impl BetaPrior {
    /// Resolve a user-facing prior name plus numeric parameters.
    pub fn from_name(name: &str, params: &BTreeMap<String, f64>) -> Result<BetaPrior> {
        let need = |key: &str| -> Result<f64> {
            params.get(key).copied().ok_or_else(|| {
                Error::Config(format!("prior `{name}` requires parameter `{key}`"))
            })
        };
        let prior = match name {
            "g-prior" => BetaPrior::GPrior { g: params.get("g").copied() },
            "BIC" => BetaPrior::Bic,
            "CH" => BetaPrior::Tcch(TcchRow::Ch {
                a: need("a")?,
                b: need("b")?,
                s: params.get("s").copied().unwrap_or(0.0),
            }),
            "uniform" => BetaPrior::Tcch(TcchRow::Uniform),
            "Jeffreys" => BetaPrior::Tcch(TcchRow::Jeffreys),
            "beta.prime" => BetaPrior::Tcch(TcchRow::BetaPrime),
            "benchmark" => BetaPrior::Tcch(TcchRow::Benchmark),
            "TG" => BetaPrior::Tcch(TcchRow::TruncGamma { a: need("a")?, s: need("s")? }),
            "ZS-adapted" => BetaPrior::Tcch(TcchRow::ZsAdapted),
            "robust" => BetaPrior::Tcch(TcchRow::Robust),
            "hyper-g-n" => BetaPrior::Tcch(TcchRow::HyperGN),
            "intrinsic" => BetaPrior::Tcch(TcchRow::Intrinsic),
            "tCCH" => BetaPrior::Tcch(TcchRow::Custom {
                a: need("a")?,
                b: need("b")?,
                rho: need("rho")?,
                s: need("s")?,
                v: need("v")?,
                k: need("k")?,
            }),
            other if UNSUPPORTED.contains(&other) => {
                return Err(Error::UnsupportedPrior(other.to_string()))
            }
            other => return Err(Error::UnsupportedPrior(other.to_string())),
        };
        Ok(prior)
    }
}

pub fn default_g(n: usize, p: usize) -> f64 {
    (n as f64).max((p as f64) * (p as f64))
}

/// Gaussian g-prior log marginal likelihood (shared constant dropped).
/// `k` counts all retained columns including the intercept.
pub fn mloglik_gprior_gaussian(r2: f64, n: usize, k: usize, g: f64) -> f64 {
    let r2 = r2.clamp(0.0, 1.0);
    let nf = n as f64;
    0.5 * (nf - k as f64) * (1.0 + g).ln() - 0.5 * (nf - 1.0) * (1.0 + g * (1.0 - r2)).ln()
}

/// Laplace-approximate log marginal likelihood under a fixed-g prior for
/// non-gaussian families. `q` is the observed-information quadratic form
/// β̂ᵀ(X̃ᵀWX̃)β̂ of the non-intercept block.
pub fn mloglik_gprior_glm(loglik: f64, q: f64, p_m: usize, g: f64) -> f64 {
    loglik - 0.5 * p_m as f64 * (1.0 + g).ln() - 0.5 * q / (1.0 + g)
}

/// BIC-style criterion: log-likelihood at the mode penalized by model size.
/// `p_m` excludes the intercept.
pub fn mloglik_bic(loglik_at_mode: f64, n: usize, p_m: usize) -> f64 {
    loglik_at_mode - 0.5 * p_m as f64 * (n as f64).ln()
}

/// Gaussian unknown-variance form −(aic + (ln n − 2)·rank)/2 with
/// aic = n(ln(2π·RSS/n)+1) + 2 + 2·rank; differs from
/// [`mloglik_bic`] at the profile likelihood by the model-independent
/// constant 0.5·ln n + 1.
pub fn mloglik_bic_gaussian_aic(rss: f64, n: usize, rank: usize) -> f64 {
    let nf = n as f64;
    let aic = nf * ((2.0 * std::f64::consts::PI * rss / nf).ln() + 1.0) + 2.0 + 2.0 * rank as f64;
    -(aic + (nf.ln() - 2.0) * rank as f64) / 2.0
}

/// Unnormalized log density of u under one tCCH configuration.
#[cfg(test)]
fn log_tcch_density(u: f64, p: &TcchParams) -> f64 {
    (0.5 * p.a - 1.0) * u.ln() + (0.5 * p.b - 1.0) * (1.0 - p.v * u).ln()
        - p.rho * (p.k + (1.0 - p.k) * p.v * u).ln()
        - 0.5 * p.s * u
}

/// Log of ∫ m(u)·f₀(u) du / ∫ f₀(u) du where m is the gaussian g-prior
/// marginal in u = 1/(1+g) coordinates. The Jeffreys row (a = 0) has a
/// divergent normalizer and is left unnormalized (a constant offset shared by
/// all models).
pub fn mloglik_tcch_gaussian(r2: f64, n: usize, p_m: usize, params: &TcchParams) -> Result<f64> {
    if p_m == 0 {
        return Ok(0.0);
    }
    let r2 = r2.clamp(0.0, 1.0);
    let nf = n as f64;
    let pm = p_m as f64;
    let log_rest = move |u: f64| -0.5 * (nf - 1.0) * (1.0 - r2 * (1.0 - u)).ln();
    log_tcch_ratio(params, 0.5 * pm, log_rest)
}

/// Same ratio with the Laplace GLM marginal m(u) = e^ℓ·u^{p_m/2}·e^{−qu/2};
/// the e^ℓ factor is pulled out of the integral.
pub fn mloglik_tcch_glm(loglik: f64, q: f64, p_m: usize, params: &TcchParams) -> Result<f64> {
    if p_m == 0 {
        return Ok(loglik);
    }
    let pm = p_m as f64;
    Ok(loglik + log_tcch_ratio(params, 0.5 * pm, move |u: f64| -0.5 * q * u)?)
}

/// `extra_pow` is the u-power contributed by the marginal m(u) on top of the
/// density's own u^{a/2−1}; `log_rest` is the remaining smooth factor of m.
fn log_tcch_ratio(
    params: &TcchParams,
    extra_pow: f64,
    log_rest: impl Fn(f64) -> f64,
) -> Result<f64> {
    let log_num = log_tcch_integral(params, extra_pow, log_rest)?;
    if params.a == 0.0 {
        // improper prior: normalizer diverges, skip it
        return Ok(log_num);
    }
    let log_den = log_tcch_integral(params, 0.0, |_| 0.0)?;
    Ok(log_num - log_den)
}

/// log ∫₀^{1/v} u^{a/2+e−1}(1−vu)^{b/2−1}(k+(1−k)vu)^{−ρ}e^{−su/2}·e^{rest(u)} du.
///
/// In t = vu coordinates the integrand is t^{c0−1}(1−t)^{c1−1}g(t) with g
/// bounded; it is split at t = 1/2. A half whose power exponent is below one
/// carries an integrable singularity that stalls the adaptive rule (the
/// Kronrod−Gauss discrepancy underreports the unresolved mass near the
/// endpoint), so that half is integrated in w = t^{c0} (resp. z = (1−t)^{c1})
/// coordinates, which absorb the power factor exactly. Exponents of one or
/// more keep the original coordinates: the power substitution would compress
/// sharp interior peaks of the marginal toward the endpoint instead.
fn log_tcch_integral(
    p: &TcchParams,
    extra_pow: f64,
    log_rest: impl Fn(f64) -> f64,
) -> Result<f64> {
    let c0 = 0.5 * p.a + extra_pow;
    let c1 = 0.5 * p.b;
    let upper = 1.0 / p.v;
    let log_g = |t: f64| {
        -p.rho * (p.k + (1.0 - p.k) * t).ln() - 0.5 * p.s * upper * t + log_rest(upper * t)
    };
    // Exact-one exponents short-circuit so endpoints cannot produce 0·ln 0.
    let term_lo = |t: f64| if c0 == 1.0 { 0.0 } else { (c0 - 1.0) * t.ln() };
    let term_hi = |t: f64| if c1 == 1.0 { 0.0 } else { (c1 - 1.0) * (1.0 - t).ln() };
    let lo = if c0 < 1.0 {
        log_integrate(
            |w| {
                let t = w.powf(1.0 / c0);
                term_hi(t) + log_g(t)
            },
            0.0,
            0.5f64.powf(c0),
            QUAD_REL_TOL,
        )? - c0.ln()
    } else {
        log_integrate(|t| term_lo(t) + term_hi(t) + log_g(t), 0.0, 0.5, QUAD_REL_TOL)?
    };
    let hi = if c1 < 1.0 {
        log_integrate(
            |z| {
                let t = 1.0 - z.powf(1.0 / c1);
                term_lo(t) + log_g(t)
            },
            0.0,
            0.5f64.powf(c1),
            QUAD_REL_TOL,
        )? - c1.ln()
    } else {
        log_integrate(|t| term_lo(t) + term_hi(t) + log_g(t), 0.5, 1.0, QUAD_REL_TOL)?
    };
    Ok(c0 * upper.ln() + log_sum_exp(&[lo, hi]))
}

/// Which structural size measure the complexity prior penalizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplexityMeasure {
    Oc,
    Width,
}

/// Prior over model structures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelPrior {
    /// p(m) ∝ Π r^{c(Fⱼ)} over included features; r defaults to 1/n.
    /// Plain covariates have zero operation count, so linear models carry no
    /// penalty under the default measure.
    Complexity { r: Option<f64>, measure: ComplexityMeasure },
    /// Multiplicity correction for logic-regression trees; p defaults to the
    /// number of original covariates.
    Logic { p: Option<usize> },
}

impl Default for ModelPrior {
    fn default() -> Self {
        ModelPrior::Complexity { r: None, measure: ComplexityMeasure::Oc }
    }
}

impl ModelPrior {
    pub fn from_name(name: &str, r: Option<f64>, measure: Option<ComplexityMeasure>, p: Option<usize>) -> Result<ModelPrior> {
        match name {
            "complexity" | "default" => Ok(ModelPrior::Complexity {
                r,
                measure: measure.unwrap_or(ComplexityMeasure::Oc),
            }),
            "logic" => Ok(ModelPrior::Logic { p }),
            other => Err(Error::Config(format!("unknown model prior `{other}`"))),
        }
    }

    /// Log prior of a model given the complexities of its included features.
    /// `n` = rows (default r), `p` = original covariates (logic default).
    pub fn log_prior(&self, included: &[Complexity], n: usize, p: usize) -> f64 {
        match self {
            ModelPrior::Complexity { r, measure } => {
                let r = r.unwrap_or(1.0 / n as f64);
                let total: usize = included
                    .iter()
                    .map(|c| match measure {
                        ComplexityMeasure::Oc => c.oc,
                        ComplexityMeasure::Width => c.width,
                    })
                    .sum();
                r.ln() * total as f64
            }
            ModelPrior::Logic { p: logic_p } => {
                let p = logic_p.unwrap_or(p);
                log_model_prior_logic(included.iter().map(|c| c.width), p)
            }
        }
    }
}

pub fn log_model_prior_default(complexities: impl Iterator<Item = usize>, r: f64) -> f64 {
    r.ln() * complexities.sum::<usize>() as f64
}

/// Σⱼ [ln(wⱼ!) − wⱼ·ln(4p) + ln 4]: the inverse of the approximate number of
/// logic trees with wⱼ leaves, N̂(w) ≈ (4p)^w / (4·w!).
pub fn log_model_prior_logic(widths: impl Iterator<Item = usize>, p: usize) -> f64 {
    widths
        .map(|w| {
            statrs::function::gamma::ln_gamma(w as f64 + 1.0) - (w as f64) * (4.0 * p as f64).ln()
                + 4.0f64.ln()
        })
        .sum()
}
