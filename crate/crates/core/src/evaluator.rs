use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::bits::ModelKey;
use crate::error::{Error, Result};
use crate::feature::Complexity;
use crate::glm::{fit_glm, Family, GlmFit};
use crate::linalg::lstsq_weighted;
use crate::priors::{
    default_g, mloglik_bic, mloglik_gprior_gaussian, mloglik_gprior_glm, mloglik_tcch_gaussian,
    mloglik_tcch_glm, BetaPrior, ModelPrior,
};

/// Any criterion that is NaN or ±∞ is replaced by this floor so a degenerate
/// fit can never abort or hijack a chain.
pub const CRIT_FLOOR: f64 = -10000.0;

const SUB_IRLS_STEPS: usize = 20;
const SUB_SGD_FIRST: usize = 250;
const SUB_SGD_REVISIT: usize = 250;
const SGD_LR0: f64 = 2e-3;
const SGD_TAU: f64 = 250.0;

/// Everything the criterion computation needs to know besides the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatorParams {
    pub family: Family,
    pub beta_prior: BetaPrior,
    pub model_prior: ModelPrior,
    /// Number of original covariates (drives default g and the logic prior).
    pub p_original: usize,
    /// Subsample fraction for the stochastic evaluator; `None` = exact fits.
    pub sub: Option<f64>,
    /// Opaque key-value bag forwarded to custom evaluators.
    pub extra: BTreeMap<String, f64>,
}

impl EvaluatorParams {
    pub fn new(family: Family, p_original: usize) -> Self {
        EvaluatorParams {
            family,
            beta_prior: BetaPrior::default(),
            model_prior: ModelPrior::default(),
            p_original,
            sub: None,
            extra: BTreeMap::new(),
        }
    }
}

/// Criterion and coefficients of one fitted model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    /// Log marginal likelihood plus log model prior, up to a constant shared
    /// by all models; always finite.
    pub crit: f64,
    /// One coefficient per included column: intercept first, then fixed
    /// columns, then included features in index order.
    pub coefs: Vec<f64>,
    pub rank: usize,
    pub converged: bool,
    pub separation: bool,
}

/// User-supplied criterion, mirroring the plug-in signature
/// (y, design, model indicator, feature complexities, params) → (crit, coefs).
pub trait CustomEvaluator: Send + Sync {
    fn evaluate(
        &self,
        y: &[f64],
        design: &[Vec<f64>],
        model: &[bool],
        complexities: &[Complexity],
        params: &EvaluatorParams,
    ) -> (f64, Vec<f64>);
}

#[derive(Clone)]
pub enum Evaluator {
    Builtin,
    Custom(Arc<dyn CustomEvaluator>),
}

impl std::fmt::Debug for Evaluator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Evaluator::Builtin => f.write_str("Builtin"),
            Evaluator::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Per-model state of the stochastic evaluator, persisted across revisits.
#[derive(Debug, Clone)]
pub struct WarmState {
    pub coef: Vec<f64>,
    /// Global SGD step count; the learning rate keeps decaying across visits.
    pub sgd_step: u64,
    pub visits: u32,
}

/// The fixed data of one sampler run: response plus candidate design columns.
pub struct ModelContext<'a> {
    pub y: &'a [f64],
    pub intercept: bool,
    pub fixed_cols: &'a [Vec<f64>],
    pub feature_cols: &'a [Vec<f64>],
    pub feature_complexities: &'a [Complexity],
    pub params: &'a EvaluatorParams,
    pub evaluator: &'a Evaluator,
}

impl ModelContext<'_> {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Number of searchable bits.
    pub fn n_features(&self) -> usize {
        self.feature_cols.len()
    }

    /// Included design columns for a model key over the feature bits.
    fn assemble(&self, key: &ModelKey) -> (Vec<Vec<f64>>, Vec<usize>) {
        let included: Vec<usize> = key.ones().collect();
        let mut cols =
            Vec::with_capacity(self.intercept as usize + self.fixed_cols.len() + included.len());
        if self.intercept {
            cols.push(vec![1.0; self.n()]);
        }
        cols.extend(self.fixed_cols.iter().cloned());
        cols.extend(included.iter().map(|&j| self.feature_cols[j].clone()));
        (cols, included)
    }

    fn log_model_prior(&self, included: &[usize]) -> f64 {
        let cx: Vec<Complexity> =
            included.iter().map(|&j| self.feature_complexities[j]).collect();
        self.params.model_prior.log_prior(&cx, self.n(), self.params.p_original)
    }

    /// Exact criterion: fit, criterion dispatch, model prior, floor.
    pub fn evaluate(&self, key: &ModelKey) -> FitResult {
        let (cols, included) = self.assemble(key);
        let prior = self.log_model_prior(&included);

        if let Evaluator::Custom(custom) = self.evaluator {
            let mut indicator = vec![true; self.intercept as usize + self.fixed_cols.len()];
            indicator.extend((0..self.n_features()).map(|j| key.get(j)));
            let cx: Vec<Complexity> =
                included.iter().map(|&j| self.feature_complexities[j]).collect();
            let (crit, coefs) =
                custom.evaluate(self.y, &cols, &indicator, &cx, self.params);
            return FitResult {
                crit: floor_crit(crit),
                coefs,
                rank: cols.len(),
                converged: true,
                separation: false,
            };
        }

        let fit = fit_glm(self.params.family, &cols, self.y);
        let mlik = self.marginal_loglik(&cols, &fit);
        let coefs = included_coefs(&fit);
        FitResult {
            crit: floor_crit(mlik.map(|v| v + prior).unwrap_or(f64::NEG_INFINITY)),
            coefs,
            rank: fit.rank,
            converged: fit.converged,
            separation: fit.separation,
        }
    }

    fn marginal_loglik(&self, cols: &[Vec<f64>], fit: &GlmFit) -> Result<f64> {
        let n = self.n();
        let p = self.params.p_original;
        let p_m = fit.rank.saturating_sub(self.intercept as usize);
        match (self.params.family, &self.params.beta_prior) {
            (Family::Gaussian, BetaPrior::GPrior { g }) => {
                let g = g.unwrap_or_else(|| default_g(n, p));
                let r2 = r_squared(self.y, fit.rss)?;
                Ok(mloglik_gprior_gaussian(r2, n, fit.rank, g))
            }
            (Family::Gaussian, BetaPrior::Bic) => Ok(mloglik_bic(fit.loglik, n, p_m)),
            (Family::Gaussian, BetaPrior::Tcch(row)) => {
                let r2 = r_squared(self.y, fit.rss)?;
                let params = row.resolve(n, p, p_m);
                mloglik_tcch_gaussian(r2, n, p_m, &params)
            }
            (_, BetaPrior::GPrior { g }) => {
                let g = g.unwrap_or_else(|| default_g(n, p));
                let q = laplace_q(cols, fit, self.intercept);
                Ok(mloglik_gprior_glm(fit.loglik, q, p_m, g))
            }
            (_, BetaPrior::Bic) => Ok(mloglik_bic(fit.loglik, n, p_m)),
            (_, BetaPrior::Tcch(row)) => {
                let q = laplace_q(cols, fit, self.intercept);
                let params = row.resolve(n, p, p_m);
                mloglik_tcch_glm(fit.loglik, q, p_m, &params)
            }
        }
    }

    /// Stochastic-approximation criterion for tall binomial data. Each visit
    /// refines the stored coefficients; the criterion is recomputed from a
    /// full-data deviance pass, so it changes (usually improves) over visits.
    pub fn evaluate_sub(
        &self,
        key: &ModelKey,
        warm: Option<&WarmState>,
        rng: &mut crate::rng::Rng,
    ) -> (FitResult, WarmState) {
        debug_assert_eq!(self.params.family, Family::Binomial);
        let fraction = self.params.sub.unwrap_or(1.0).clamp(0.0, 1.0);
        let (cols, included) = self.assemble(key);
        let n = self.n();
        let k = cols.len();
        let m = ((fraction * n as f64).round() as usize).clamp(1, n);

        let mut state = match warm {
            Some(w) => w.clone(),
            None => WarmState { coef: vec![0.0; k], sgd_step: 0, visits: 0 },
        };

        if fraction >= 1.0 {
            // subsample = full data: the estimator degenerates to plain IRLS,
            // and the score vanishes at the mode, so gradient steps are moot
            if state.visits == 0 {
                let fit = fit_glm(Family::Binomial, &cols, self.y);
                state.coef = fit.coef;
            }
            state.visits += 1;
            return (self.sub_crit(&cols, &included, &state), state);
        }

        if state.visits == 0 {
            // rough mode: subsampled reweighting steps, fresh rows each step
            for step in 0..SUB_IRLS_STEPS {
                let rows = sample_rows(rng, n, m);
                state.coef = irls_step(
                    &cols,
                    self.y,
                    &rows,
                    if step == 0 { None } else { Some(&state.coef) },
                );
            }
        }
        let sgd_steps = if state.visits == 0 { SUB_SGD_FIRST } else { SUB_SGD_REVISIT };
        let snapshot = state.coef.clone();
        for _ in 0..sgd_steps {
            let rows = sample_rows(rng, n, m);
            // harmonic decay: the step sum diverges, so the iterate keeps
            // drifting toward the full-data mode across revisits instead of
            // freezing with a residual bias, while lr -> 0 damps the
            // subsampling noise (row resampling makes the score unbiased for
            // the full-data score, so the fixed point is the full-data mode)
            let lr = SGD_LR0 / (1.0 + state.sgd_step as f64 / SGD_TAU);
            state.sgd_step += 1;
            // score summed over the subsample at the logit link; in expectation
            // this is fraction times the full-data score, so the drift pulls
            // toward the full-data mode with per-step contraction lr·fraction·λ
            let mut grad = vec![0.0; k];
            for &i in &rows {
                let eta: f64 = cols.iter().zip(&state.coef).map(|(c, b)| c[i] * b).sum();
                let mu = 1.0 / (1.0 + (-eta).exp());
                let resid = self.y[i] - mu;
                for (gj, col) in grad.iter_mut().zip(&cols) {
                    *gj += resid * col[i];
                }
            }
            for (b, gj) in state.coef.iter_mut().zip(&grad) {
                *b += lr * gj;
            }
        }
        if !state.coef.iter().all(|b| b.is_finite()) {
            // unscaled columns can make lr·λ exceed the stability bound; the
            // pre-refinement iterate is still a valid rough mode
            state.coef = snapshot;
        }
        state.visits += 1;

        (self.sub_crit(&cols, &included, &state), state)
    }

    /// Full-data BIC-style criterion at the stochastic iterate's coefficients.
    fn sub_crit(&self, cols: &[Vec<f64>], included: &[usize], state: &WarmState) -> FitResult {
        let n = self.n();
        let k = cols.len();
        let mu: Vec<f64> = (0..n)
            .map(|i| {
                let eta: f64 = cols.iter().zip(&state.coef).map(|(c, b)| c[i] * b).sum();
                1.0 / (1.0 + (-eta).exp())
            })
            .collect();
        let dev = Family::Binomial.deviance(self.y, &mu);
        let p_m = k.saturating_sub(self.intercept as usize);
        let prior = self.log_model_prior(included);
        let crit = floor_crit(mloglik_bic(-0.5 * dev, n, p_m) + prior);
        FitResult {
            crit,
            coefs: state.coef.clone(),
            rank: k,
            converged: true,
            separation: false,
        }
    }
}

/// R² = 1 − RSS/TSS.
pub fn r_squared(y: &[f64], rss: f64) -> Result<f64> {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let tss: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    if tss <= 0.0 {
        return Err(Error::ZeroVarianceResponse);
    }
    Ok(1.0 - rss / tss)
}

fn floor_crit(crit: f64) -> f64 {
    if crit.is_finite() {
        crit
    } else {
        CRIT_FLOOR
    }
}

/// Coefficients restricted to included columns (dropped columns keep 0).
fn included_coefs(fit: &GlmFit) -> Vec<f64> {
    fit.coef.clone()
}

/// β̂ᵀ(X̃ᵀWX̃)β̂ over the non-intercept block, with columns centered by their
/// W-weighted means when an intercept is present.
pub(crate) fn laplace_q(cols: &[Vec<f64>], fit: &GlmFit, intercept: bool) -> f64 {
    let start = intercept as usize;
    if cols.len() <= start {
        return 0.0;
    }
    let n = fit.weights.len();
    let wsum: f64 = fit.weights.iter().sum();
    let mut t = vec![0.0; n];
    for (j, col) in cols.iter().enumerate().skip(start) {
        let beta = fit.coef[j];
        if beta == 0.0 {
            continue;
        }
        let center = if intercept {
            col.iter().zip(&fit.weights).map(|(x, w)| x * w).sum::<f64>() / wsum
        } else {
            0.0
        };
        for (ti, xi) in t.iter_mut().zip(col) {
            *ti += beta * (xi - center);
        }
    }
    t.iter().zip(&fit.weights).map(|(ti, w)| w * ti * ti).sum()
}

fn sample_rows(rng: &mut crate::rng::Rng, n: usize, m: usize) -> Vec<usize> {
    if m >= n {
        return (0..n).collect();
    }
    // sampling with replacement: cheap and unbiased for score estimates
    (0..m).map(|_| rng.random_range(0..n)).collect()
}

/// One IRLS reweighting step for the logit link restricted to `rows`.
fn irls_step(cols: &[Vec<f64>], y: &[f64], rows: &[usize], coef: Option<&[f64]>) -> Vec<f64> {
    let k = cols.len();
    let msize = rows.len();
    let mut z = vec![0.0; msize];
    let mut w = vec![0.0; msize];
    for (t, &i) in rows.iter().enumerate() {
        let (mu, eta) = match coef {
            Some(beta) => {
                let eta: f64 = cols.iter().zip(beta).map(|(c, b)| c[i] * b).sum();
                (1.0 / (1.0 + (-eta).exp()), eta)
            }
            None => {
                let mu = (y[i] + 0.5) / 2.0;
                (mu, (mu / (1.0 - mu)).ln())
            }
        };
        let mu = mu.clamp(1e-10, 1.0 - 1e-10);
        let wi = (mu * (1.0 - mu)).max(1e-10);
        w[t] = wi;
        z[t] = eta + (y[i] - mu) / wi;
    }
    let sub_cols: Vec<Vec<f64>> = (0..k)
        .map(|j| rows.iter().map(|&i| cols[j][i]).collect())
        .collect();
    lstsq_weighted(&sub_cols, &z, Some(&w)).coef
}
