use serde::{Deserialize, Serialize};

use crate::linalg::{lstsq, lstsq_weighted};

/// Response families, each with its standard link: identity, logit, log,
/// inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gaussian,
    Binomial,
    Poisson,
    Gamma,
}

/// |η| beyond this on a logit scale means fitted probabilities are within
/// ~1e-13 of 0/1: quasi-separation.
const SEPARATION_ETA: f64 = 30.0;
const MAX_ITER: usize = 100;
const DEV_TOL: f64 = 1e-8;

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::Binomial => "binomial",
            Family::Poisson => "poisson",
            Family::Gamma => "gamma",
        }
    }

    pub fn ilink(&self, eta: f64) -> f64 {
        match self {
            Family::Gaussian => eta,
            Family::Binomial => 1.0 / (1.0 + (-eta).exp()),
            Family::Poisson => eta.exp(),
            Family::Gamma => 1.0 / eta,
        }
    }

    pub fn link(&self, mu: f64) -> f64 {
        match self {
            Family::Gaussian => mu,
            Family::Binomial => (mu / (1.0 - mu)).ln(),
            Family::Poisson => mu.ln(),
            Family::Gamma => 1.0 / mu,
        }
    }

    /// Clamp the mean into the valid open domain.
    fn guard_mu(&self, mu: f64) -> f64 {
        match self {
            Family::Gaussian => mu,
            Family::Binomial => mu.clamp(1e-10, 1.0 - 1e-10),
            Family::Poisson | Family::Gamma => mu.max(1e-10),
        }
    }

    fn mu_start(&self, y: f64) -> f64 {
        match self {
            Family::Gaussian => y,
            Family::Binomial => (y + 0.5) / 2.0,
            Family::Poisson => y + 0.1,
            Family::Gamma => self.guard_mu(y),
        }
    }

    /// IRLS working weight at the standard link.
    fn working_weight(&self, mu: f64) -> f64 {
        let w = match self {
            Family::Gaussian => 1.0,
            Family::Binomial => mu * (1.0 - mu),
            Family::Poisson => mu,
            Family::Gamma => mu * mu,
        };
        w.max(1e-10)
    }

    /// dη/dμ, used to build the working response.
    fn dlink(&self, mu: f64) -> f64 {
        match self {
            Family::Gaussian => 1.0,
            Family::Binomial => 1.0 / (mu * (1.0 - mu)).max(1e-10),
            Family::Poisson => 1.0 / mu.max(1e-10),
            Family::Gamma => -1.0 / (mu * mu).max(1e-300),
        }
    }

    /// Multiplier D in the score Xᵀ D (y − μ) at the standard link (φ = 1).
    pub fn score_scale(&self) -> f64 {
        match self {
            Family::Gamma => -1.0,
            _ => 1.0,
        }
    }

    /// Log-likelihood at dispersion 1 (gaussian: profile over σ²).
    pub fn loglik(&self, y: &[f64], mu: &[f64]) -> f64 {
        let n = y.len() as f64;
        match self {
            Family::Gaussian => {
                let rss: f64 = y.iter().zip(mu).map(|(a, b)| (a - b) * (a - b)).sum();
                -0.5 * n * ((2.0 * std::f64::consts::PI * rss / n).ln() + 1.0)
            }
            Family::Binomial => y
                .iter()
                .zip(mu)
                .map(|(&yi, &m)| {
                    let m = self.guard_mu(m);
                    yi * m.ln() + (1.0 - yi) * (1.0 - m).ln()
                })
                .sum(),
            Family::Poisson => y
                .iter()
                .zip(mu)
                .map(|(&yi, &m)| {
                    let m = self.guard_mu(m);
                    yi * m.ln() - m - statrs::function::gamma::ln_gamma(yi + 1.0)
                })
                .sum(),
            Family::Gamma => y
                .iter()
                .zip(mu)
                .map(|(&yi, &m)| {
                    let m = self.guard_mu(m);
                    -m.ln() - yi / m
                })
                .sum(),
        }
    }

    pub fn deviance(&self, y: &[f64], mu: &[f64]) -> f64 {
        match self {
            Family::Gaussian => y.iter().zip(mu).map(|(a, b)| (a - b) * (a - b)).sum(),
            Family::Binomial => {
                2.0 * y
                    .iter()
                    .zip(mu)
                    .map(|(&yi, &m)| {
                        let m = self.guard_mu(m);
                        let t1 = if yi > 0.0 { yi * (yi / m).ln() } else { 0.0 };
                        let t2 = if yi < 1.0 {
                            (1.0 - yi) * ((1.0 - yi) / (1.0 - m)).ln()
                        } else {
                            0.0
                        };
                        t1 + t2
                    })
                    .sum::<f64>()
            }
            Family::Poisson => {
                2.0 * y
                    .iter()
                    .zip(mu)
                    .map(|(&yi, &m)| {
                        let m = self.guard_mu(m);
                        let t = if yi > 0.0 { yi * (yi / m).ln() } else { 0.0 };
                        t - (yi - m)
                    })
                    .sum::<f64>()
            }
            Family::Gamma => {
                2.0 * y
                    .iter()
                    .zip(mu)
                    .map(|(&yi, &m)| {
                        let m = self.guard_mu(m);
                        -(yi / m).ln() + (yi - m) / m
                    })
                    .sum::<f64>()
            }
        }
    }
}

/// Converged (or best-effort) fit of one design.
#[derive(Debug, Clone)]
pub struct GlmFit {
    pub coef: Vec<f64>,
    /// Retained design columns, intercept included.
    pub rank: usize,
    pub dropped: Vec<bool>,
    pub deviance: f64,
    pub loglik: f64,
    pub rss: f64,
    pub eta: Vec<f64>,
    pub mu: Vec<f64>,
    /// IRLS working weights at the final iterate (all 1 for gaussian).
    pub weights: Vec<f64>,
    pub iters: usize,
    pub converged: bool,
    /// Quasi-separation seen (binomial only); reported, not fatal.
    pub separation: bool,
}

/// Fit by ordinary least squares (gaussian) or iteratively reweighted least
/// squares at the family's standard link. `cols` are design columns, the
/// intercept column included by the caller.
pub fn fit_glm(family: Family, cols: &[Vec<f64>], y: &[f64]) -> GlmFit {
    match family {
        Family::Gaussian => fit_gaussian_ols(cols, y),
        _ => fit_irls(family, cols, y),
    }
}

pub fn fit_gaussian_ols(cols: &[Vec<f64>], y: &[f64]) -> GlmFit {
    let ls = lstsq(cols, y);
    let loglik = Family::Gaussian.loglik(y, &ls.fitted);
    GlmFit {
        coef: ls.coef,
        rank: ls.rank,
        dropped: ls.dropped,
        deviance: ls.rss,
        loglik,
        rss: ls.rss,
        eta: ls.fitted.clone(),
        mu: ls.fitted,
        weights: vec![1.0; y.len()],
        iters: 1,
        converged: true,
        separation: false,
    }
}

fn fit_irls(family: Family, cols: &[Vec<f64>], y: &[f64]) -> GlmFit {
    let n = y.len();
    let mut mu: Vec<f64> = y.iter().map(|&v| family.mu_start(v)).collect();
    let mut eta: Vec<f64> = mu.iter().map(|&m| family.link(m)).collect();
    let mut dev = family.deviance(y, &mu);
    let mut coef = vec![0.0; cols.len()];
    let mut rank = 0;
    let mut dropped = vec![false; cols.len()];
    let mut weights = vec![1.0; n];
    let mut converged = false;
    let mut iters = 0;

    for it in 1..=MAX_ITER {
        iters = it;
        let mut z = vec![0.0; n];
        for i in 0..n {
            weights[i] = family.working_weight(mu[i]);
            z[i] = eta[i] + (y[i] - mu[i]) * family.dlink(mu[i]);
        }
        let ls = lstsq_weighted(cols, &z, Some(&weights));
        coef = ls.coef;
        rank = ls.rank;
        dropped = ls.dropped;
        eta = ls.fitted;
        if family == Family::Gamma {
            // inverse link: keep the linear predictor in the valid domain
            for e in eta.iter_mut() {
                if *e <= 0.0 {
                    *e = 1e-10;
                }
            }
        }
        mu = eta.iter().map(|&e| family.guard_mu(family.ilink(e))).collect();
        let dev_new = family.deviance(y, &mu);
        let rel = (dev_new - dev).abs() / (dev_new.abs() + 0.1);
        dev = dev_new;
        if rel < DEV_TOL {
            converged = true;
            break;
        }
    }

    let separation = family == Family::Binomial
        && eta.iter().any(|e| e.abs() > SEPARATION_ETA);
    let rss = y.iter().zip(&mu).map(|(a, b)| (a - b) * (a - b)).sum();
    let loglik = family.loglik(y, &mu);
    GlmFit {
        coef,
        rank,
        dropped,
        deviance: dev,
        loglik,
        rss,
        eta,
        mu,
        weights,
        iters,
        converged,
        separation,
    }
}
