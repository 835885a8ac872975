//! Mode-jumping MCMC over a fixed feature population.
//!
//! Most steps are standard Metropolis-Hastings moves through the model
//! indicator space. With a small probability the chain instead makes a large
//! jump: perturb many bits at once, run a local optimizer back uphill, then
//! randomize lightly around the optimum. The backward path is mirrored from
//! the proposal so the acceptance ratio stays valid, which lets the chain
//! cross deep criterion valleys that single-bit moves cannot.
//!
//! Every evaluated model lands in a per-chain cache keyed by its indicator
//! bitset; posterior estimates renormalize the cached criteria directly, so
//! they do not depend on visit frequencies.

pub mod kernels;
pub mod optimize;

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::bits::ModelKey;
use crate::evaluator::{Evaluator, FitResult, ModelContext, WarmState};
use crate::quadrature::log_sum_exp;
use crate::rng::Rng;
use crate::{Error, Result};

use kernels::{propose, NeighSize};
use optimize::{greedy, simulated_annealing, validate_weights, GreedyParams, Objective, SaParams};

/// Move-type probabilities. Weight vectors need not be normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbsMj {
    /// Probability of attempting a large jump instead of a plain MH move.
    pub large: f64,
    /// Weights over kernel types 1..=4 for the initial large perturbation.
    pub large_kern: Vec<f64>,
    /// Weights over the two local optimizers: [annealing, greedy].
    pub localopt_kern: Vec<f64>,
    /// Carried for config compatibility; the randomization step is pinned to
    /// independent per-position flips with `ParamsMj::random_prob`.
    pub random_kern: Vec<f64>,
    /// Weights over kernel types 1..=6 for plain MH moves.
    pub mh: Vec<f64>,
}

impl Default for ProbsMj {
    fn default() -> Self {
        ProbsMj {
            large: 0.05,
            large_kern: vec![0.0, 0.0, 0.0, 1.0],
            localopt_kern: vec![0.5, 0.5],
            random_kern: vec![0.5, 0.5, 0.0, 0.0],
            mh: vec![0.2, 0.2, 0.2, 0.2, 0.1, 0.1],
        }
    }
}

impl ProbsMj {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.large) {
            return Err(Error::Config(format!(
                "large-jump probability must lie in [0,1], got {}",
                self.large
            )));
        }
        if self.large_kern.len() != 4 {
            return Err(Error::Config("large_kern needs 4 entries".into()));
        }
        if self.localopt_kern.len() != 2 {
            return Err(Error::Config("localopt_kern needs 2 entries".into()));
        }
        if self.mh.len() != 6 {
            return Err(Error::Config("mh kernel vector needs 6 entries".into()));
        }
        validate_weights(&self.large_kern)?;
        validate_weights(&self.localopt_kern)?;
        validate_weights(&self.mh)
    }
}

/// Chain tuning parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsMj {
    /// Steps excluded from frequency counters; cached models are kept.
    pub burn_in: usize,
    pub mh_neigh: NeighSize,
    /// `None` derives size/min/max from the feature count.
    pub large_neigh: Option<NeighSize>,
    /// Per-position flip probability of the randomization step.
    pub random_prob: f64,
    pub sa: SaParams,
    pub greedy: GreedyParams,
}

impl Default for ParamsMj {
    fn default() -> Self {
        ParamsMj {
            burn_in: 100,
            mh_neigh: NeighSize::LOCAL,
            large_neigh: None,
            random_prob: 0.01,
            sa: SaParams::default(),
            greedy: GreedyParams::default(),
        }
    }
}

impl ParamsMj {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.random_prob) {
            return Err(Error::Config(format!(
                "randomization probability must lie in [0,1), got {}",
                self.random_prob
            )));
        }
        self.mh_neigh.validate()?;
        if let Some(n) = &self.large_neigh {
            n.validate()?;
        }
        self.sa.validate()?;
        self.greedy.validate()
    }

    fn large_neigh(&self, q: usize) -> NeighSize {
        self.large_neigh.unwrap_or_else(|| NeighSize::large_default(q))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MjmcmcConfig {
    /// Number of sampler steps.
    pub n_iter: usize,
    pub probs: ProbsMj,
    pub params: ParamsMj,
}

impl MjmcmcConfig {
    pub fn new(n_iter: usize) -> Self {
        MjmcmcConfig { n_iter, probs: ProbsMj::default(), params: ParamsMj::default() }
    }

    pub fn validate(&self) -> Result<()> {
        self.probs.validate()?;
        self.params.validate()
    }
}

/// Cached evaluation of one model.
#[derive(Debug, Clone)]
pub struct ModelRecord {
    pub crit: f64,
    pub coefs: Vec<f64>,
    pub rank: usize,
    pub converged: bool,
    pub separation: bool,
    /// Times the chain evaluated this key (>= 1 by construction).
    pub visits: u64,
    pub warm: Option<WarmState>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptStats {
    pub mh_proposed: u64,
    pub mh_accepted: u64,
    pub large_proposed: u64,
    pub large_accepted: u64,
}

pub struct MjmcmcResult {
    pub cache: BTreeMap<ModelKey, ModelRecord>,
    pub best_key: ModelKey,
    pub best_crit: f64,
    /// Post-burn-in occupancy counts of the chain's current model.
    pub freq: BTreeMap<ModelKey, u64>,
    /// Current criterion after each post-burn-in step.
    pub crit_trace: Vec<f64>,
    pub accept: AcceptStats,
}

impl MjmcmcResult {
    /// p̂(m) = exp(crit_m − logΣexp crits), in deterministic key order.
    pub fn posteriors(&self) -> Vec<(ModelKey, f64)> {
        renormalized_posteriors(&self.cache)
    }

    /// Marginal inclusion probability per feature bit.
    pub fn inclusions(&self, q: usize) -> Vec<f64> {
        marginal_inclusions(&self.cache, q)
    }
}

pub fn renormalized_posteriors(cache: &BTreeMap<ModelKey, ModelRecord>) -> Vec<(ModelKey, f64)> {
    let crits: Vec<f64> = cache.values().map(|r| r.crit).collect();
    let lse = log_sum_exp(&crits);
    cache.iter().map(|(k, r)| (k.clone(), (r.crit - lse).exp())).collect()
}

pub fn marginal_inclusions(cache: &BTreeMap<ModelKey, ModelRecord>, q: usize) -> Vec<f64> {
    let mut incl = vec![0.0; q];
    for (key, p) in renormalized_posteriors(cache) {
        for j in key.ones() {
            incl[j] += p;
        }
    }
    incl
}

/// Criterion source for a chain. The separation between deterministic and
/// stochastic sources decides cache behaviour: deterministic criteria are
/// computed once per key, stochastic ones are refreshed on every revisit.
pub trait CritEval {
    fn eval_crit(
        &mut self,
        key: &ModelKey,
        warm: Option<&WarmState>,
        rng: &mut Rng,
    ) -> (FitResult, Option<WarmState>);

    fn stochastic(&self) -> bool {
        false
    }
}

/// Adapter turning a plain criterion function into a chain evaluator.
pub struct FnCrit<F>(pub F);

impl<F: FnMut(&ModelKey) -> f64> CritEval for FnCrit<F> {
    fn eval_crit(
        &mut self,
        key: &ModelKey,
        _warm: Option<&WarmState>,
        _rng: &mut Rng,
    ) -> (FitResult, Option<WarmState>) {
        let crit = (self.0)(key);
        let fit = FitResult {
            crit: if crit.is_finite() { crit } else { crate::evaluator::CRIT_FLOOR },
            coefs: Vec::new(),
            rank: 0,
            converged: true,
            separation: false,
        };
        (fit, None)
    }
}

impl CritEval for ModelContext<'_> {
    fn eval_crit(
        &mut self,
        key: &ModelKey,
        warm: Option<&WarmState>,
        rng: &mut Rng,
    ) -> (FitResult, Option<WarmState>) {
        if self.stochastic() {
            let (fit, state) = self.evaluate_sub(key, warm, rng);
            (fit, Some(state))
        } else {
            (self.evaluate(key), None)
        }
    }

    fn stochastic(&self) -> bool {
        self.params.sub.is_some() && matches!(*self.evaluator, Evaluator::Builtin)
    }
}

struct Chain<'a, E: CritEval> {
    eval: &'a mut E,
    stochastic: bool,
    cache: BTreeMap<ModelKey, ModelRecord>,
    rng: &'a mut Rng,
    probs: &'a ProbsMj,
    params: &'a ParamsMj,
    large_neigh: NeighSize,
    w_mh: WeightedIndex<f64>,
    w_large: WeightedIndex<f64>,
    w_localopt: WeightedIndex<f64>,
    cur: ModelKey,
    accept: AcceptStats,
}

impl<E: CritEval> Objective for Chain<'_, E> {
    /// Cache gate: one evaluation per key unless the source is stochastic,
    /// in which case revisits refresh the record in place.
    fn crit(&mut self, key: &ModelKey) -> f64 {
        if let Some(rec) = self.cache.get_mut(key) {
            rec.visits += 1;
            if !self.stochastic {
                return rec.crit;
            }
            let (fit, warm) = self.eval.eval_crit(key, rec.warm.as_ref(), self.rng);
            rec.crit = fit.crit;
            rec.coefs = fit.coefs;
            rec.rank = fit.rank;
            rec.converged = fit.converged;
            rec.separation = fit.separation;
            rec.warm = warm;
            return rec.crit;
        }
        let (fit, warm) = self.eval.eval_crit(key, None, self.rng);
        let crit = fit.crit;
        self.cache.insert(
            key.clone(),
            ModelRecord {
                crit,
                coefs: fit.coefs,
                rank: fit.rank,
                converged: fit.converged,
                separation: fit.separation,
                visits: 1,
                warm,
            },
        );
        crit
    }

    fn rng(&mut self) -> &mut Rng {
        self.rng
    }
}

impl<E: CritEval> Chain<'_, E> {
    fn cur_crit(&self) -> f64 {
        self.cache[&self.cur].crit
    }

    fn optimize(&mut self, use_annealing: bool, start: ModelKey) -> ModelKey {
        let params = self.params;
        if use_annealing {
            simulated_annealing(self, &start, &params.sa)
        } else {
            greedy(self, &start, &params.greedy)
        }
    }

    fn step(&mut self) {
        if self.rng.random::<f64>() < self.probs.large {
            self.large_jump();
        } else {
            self.mh_move();
        }
        debug_assert!(self.cache.contains_key(&self.cur));
    }

    fn mh_move(&mut self) {
        self.accept.mh_proposed += 1;
        let kind = self.rng.sample(&self.w_mh) + 1;
        let prop = propose(&self.cur, kind, &self.params.mh_neigh, self.rng);
        let prop_crit = self.crit(&prop);
        let delta = prop_crit - self.cur_crit();
        if delta >= 0.0 || self.rng.random::<f64>() < delta.exp() {
            self.cur = prop;
            self.accept.mh_accepted += 1;
        }
    }

    /// Large perturbation -> local optimum -> light randomization, with the
    /// backward construction mirrored from the proposal. The optimizers are
    /// treated as deterministic given the chain's stream, so the acceptance
    /// ratio only carries the randomization kernel densities.
    fn large_jump(&mut self) {
        self.accept.large_proposed += 1;
        let kind = self.rng.sample(&self.w_large) + 1;
        let use_annealing = self.rng.sample(&self.w_localopt) == 0;
        let rho = self.params.random_prob;

        let chi0 = propose(&self.cur, kind, &self.large_neigh, self.rng);
        let chi_star = self.optimize(use_annealing, chi0);
        let prop = randomize(&chi_star, rho, self.rng);

        let chi0_back = propose(&prop, kind, &self.large_neigh, self.rng);
        let chi_star_back = self.optimize(use_annealing, chi0_back);

        let prop_crit = self.crit(&prop);
        let mut log_acc = prop_crit - self.cur_crit();
        if rho > 0.0 {
            // q_r(x|chi) = rho^d (1-rho)^(q-d) with d = hamming(x, chi);
            // the (q-d) terms cancel up to the two distances
            let d_fwd = prop.hamming(&chi_star) as f64;
            let d_back = self.cur.hamming(&chi_star_back) as f64;
            log_acc += (d_back - d_fwd) * (rho.ln() - (1.0 - rho).ln());
        }
        if log_acc >= 0.0 || self.rng.random::<f64>() < log_acc.exp() {
            self.cur = prop;
            self.accept.large_accepted += 1;
        }
    }
}

/// Independent per-position flips with probability `rho`.
fn randomize(key: &ModelKey, rho: f64, rng: &mut Rng) -> ModelKey {
    let mut out = key.clone();
    for j in 0..key.len() {
        if rng.random::<f64>() < rho {
            out.flip(j);
        }
    }
    out
}

/// Run one chain of `config.n_iter` steps over `q` searchable features.
pub fn run_mjmcmc<E: CritEval>(
    eval: &mut E,
    q: usize,
    config: &MjmcmcConfig,
    rng: &mut Rng,
) -> Result<MjmcmcResult> {
    config.validate()?;
    let stochastic = eval.stochastic();
    let init = ModelKey::random(&mut *rng, q, 0.5);
    let mut chain = Chain {
        eval,
        stochastic,
        cache: BTreeMap::new(),
        rng,
        probs: &config.probs,
        params: &config.params,
        large_neigh: config.params.large_neigh(q),
        w_mh: WeightedIndex::new(&config.probs.mh).expect("validated weights"),
        w_large: WeightedIndex::new(&config.probs.large_kern).expect("validated weights"),
        w_localopt: WeightedIndex::new(&config.probs.localopt_kern).expect("validated weights"),
        cur: init.clone(),
        accept: AcceptStats::default(),
    };
    chain.crit(&init);

    let mut freq: BTreeMap<ModelKey, u64> = BTreeMap::new();
    let mut crit_trace = Vec::new();
    for iter in 0..config.n_iter {
        chain.step();
        if iter >= config.params.burn_in {
            *freq.entry(chain.cur.clone()).or_insert(0) += 1;
            crit_trace.push(chain.cur_crit());
        }
    }

    let (best_key, best_crit) = chain
        .cache
        .iter()
        .fold(None::<(&ModelKey, f64)>, |best, (k, r)| match best {
            Some((_, c)) if c >= r.crit => best,
            _ => Some((k, r.crit)),
        })
        .map(|(k, c)| (k.clone(), c))
        .expect("cache holds at least the initial model");

    Ok(MjmcmcResult {
        cache: chain.cache,
        best_key,
        best_crit,
        freq,
        crit_trace,
        accept: chain.accept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{chain_rng, master_rng};

    fn config(n_iter: usize) -> MjmcmcConfig {
        MjmcmcConfig::new(n_iter)
    }

    #[test]
    fn single_step_run_caches_and_reports_best() {
        let mut eval = FnCrit(|k: &ModelKey| -(k.count_ones() as f64));
        let res = run_mjmcmc(&mut eval, 4, &config(1), &mut master_rng(1)).unwrap();
        assert!(!res.cache.is_empty());
        assert!(res.cache.contains_key(&res.best_key));
        assert!(res.best_crit.is_finite());
    }

    #[test]
    fn deterministic_criteria_are_computed_once_per_key() {
        let mut evals = 0usize;
        let mut eval = FnCrit(|k: &ModelKey| {
            evals += 1;
            (k.count_ones() as f64) * 0.1
        });
        let res = run_mjmcmc(&mut eval, 6, &config(400), &mut master_rng(2)).unwrap();
        assert_eq!(evals, res.cache.len());
    }

    #[test]
    fn plain_mh_occupancy_is_uniform_on_flat_landscape() {
        let mut cfg = config(100_000);
        cfg.probs.large = 0.0;
        // restrict to the symmetric kernels 1-4; the add/remove pair is not
        // symmetric and tilts the stationary law toward the corner models
        cfg.probs.mh = vec![0.2, 0.2, 0.2, 0.2, 0.0, 0.0];
        let mut eval = FnCrit(|_: &ModelKey| 0.0);
        let res = run_mjmcmc(&mut eval, 2, &cfg, &mut master_rng(3)).unwrap();
        let total: u64 = res.freq.values().sum();
        assert_eq!(res.freq.len(), 4);
        for (&count, key) in res.freq.values().zip(res.freq.keys()) {
            let share = count as f64 / total as f64;
            assert!(
                (share - 0.25).abs() < 0.02,
                "occupancy {share} for {}",
                key.to_bitstring()
            );
        }
    }

    #[test]
    fn detailed_balance_on_two_model_space() {
        let mut cfg = config(1_000_000);
        cfg.probs.large = 0.0;
        cfg.params.burn_in = 0;
        // crits {0, ln 3} -> stationary occupancy {1/4, 3/4}
        let mut eval = FnCrit(|k: &ModelKey| if k.get(0) { 3.0f64.ln() } else { 0.0 });
        let res = run_mjmcmc(&mut eval, 1, &cfg, &mut master_rng(4)).unwrap();
        let total: u64 = res.freq.values().sum();
        let on = res.freq[&ModelKey::from_bools(&[true])] as f64 / total as f64;
        assert!((on - 0.75).abs() < 0.01, "occupancy of the better model: {on}");
        // flow counts between the two states differ by at most one crossing
        assert!(res.accept.mh_proposed >= total);
    }

    #[test]
    fn posteriors_match_enumeration_on_full_coverage() {
        // deterministic pseudo-random landscape over q=6 (64 models)
        let table: Vec<f64> = {
            let mut rng = master_rng(99);
            (0..64).map(|_| 4.0 * rng.random::<f64>()).collect()
        };
        let idx = |k: &ModelKey| {
            k.ones().fold(0usize, |acc, j| acc | (1 << j))
        };
        let mut eval = FnCrit(|k: &ModelKey| table[idx(k)]);
        let res = run_mjmcmc(&mut eval, 6, &config(6000), &mut master_rng(5)).unwrap();
        assert_eq!(res.cache.len(), 64, "full model space coverage");

        let lse = log_sum_exp(&table);
        for (key, p) in res.posteriors() {
            let exact = (table[idx(&key)] - lse).exp();
            assert!((p - exact).abs() < 1e-12, "key {} p {p} exact {exact}", key.to_bitstring());
        }
        let incl = res.inclusions(6);
        for j in 0..6 {
            let exact: f64 = (0..64usize)
                .filter(|m| m & (1 << j) != 0)
                .map(|m| (table[m] - lse).exp())
                .sum();
            assert!((incl[j] - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn renormalization_is_shift_invariant() {
        let keys: Vec<ModelKey> = (0..8u8)
            .map(|m| ModelKey::from_bools(&[(m & 1) != 0, (m & 2) != 0, (m & 4) != 0]))
            .collect();
        let record = |crit: f64| ModelRecord {
            crit,
            coefs: vec![],
            rank: 0,
            converged: true,
            separation: false,
            visits: 1,
            warm: None,
        };
        let crits = [0.4, -2.0, 1.1, 0.0, -5.5, 3.2, 2.2, -0.7];
        let base: BTreeMap<_, _> =
            keys.iter().cloned().zip(crits.iter().map(|&c| record(c))).collect();
        let shifted: BTreeMap<_, _> =
            keys.iter().cloned().zip(crits.iter().map(|&c| record(c + 123.456))).collect();
        for ((_, p), (_, ps)) in
            renormalized_posteriors(&base).iter().zip(renormalized_posteriors(&shifted))
        {
            assert!((p - ps).abs() < 1e-12);
        }
    }

    #[test]
    fn inclusion_of_single_cached_model_is_indicator() {
        let key = ModelKey::from_bools(&[true, false, true, false]);
        let mut cache = BTreeMap::new();
        cache.insert(
            key.clone(),
            ModelRecord {
                crit: -3.0,
                coefs: vec![],
                rank: 0,
                converged: true,
                separation: false,
                visits: 1,
                warm: None,
            },
        );
        assert_eq!(marginal_inclusions(&cache, 4), vec![1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn mode_jumps_cross_deep_valleys_that_block_plain_mh() {
        // two equal-height, equal-size peaks at Hamming distance 20 in a
        // q=25 space; equal sizes keep them reachable by the swap-type
        // large-jump kernel, which preserves model size
        let q = 25;
        let peak_a = ModelKey::from_bools(&(0..q).map(|j| j < 10).collect::<Vec<_>>());
        let peak_b = ModelKey::from_bools(&(0..q).map(|j| (10..20).contains(&j)).collect::<Vec<_>>());
        assert_eq!(peak_a.hamming(&peak_b), 20);
        let landscape = |k: &ModelKey| {
            let da = k.hamming(&peak_a) as f64;
            let db = k.hamming(&peak_b) as f64;
            (-3.0 * da).max(-3.0 * db)
        };

        let seeds = 50;
        let mut both_with_jumps = 0;
        let mut single_without = 0;
        for seed in 0..seeds {
            let cfg = config(5000);
            let mut eval = FnCrit(landscape);
            let res = run_mjmcmc(&mut eval, q, &cfg, &mut chain_rng(100, seed)).unwrap();
            if res.cache.contains_key(&peak_a) && res.cache.contains_key(&peak_b) {
                both_with_jumps += 1;
            }

            let mut cfg_mh = config(5000);
            cfg_mh.probs.large = 0.0;
            let mut eval = FnCrit(landscape);
            let res = run_mjmcmc(&mut eval, q, &cfg_mh, &mut chain_rng(100, seed)).unwrap();
            if res.cache.contains_key(&peak_a) != res.cache.contains_key(&peak_b) {
                single_without += 1;
            }
        }
        assert!(both_with_jumps >= 48, "mode jumps found both peaks in {both_with_jumps}/50");
        assert!(single_without >= 45, "plain MH stuck on one peak in {single_without}/50");
    }

    #[test]
    fn zero_randomization_probability_still_explores() {
        let mut cfg = config(2000);
        cfg.probs.large = 1.0;
        cfg.params.random_prob = 0.0;
        let mut eval = FnCrit(|k: &ModelKey| -((k.count_ones() as f64) - 3.0).powi(2));
        let res = run_mjmcmc(&mut eval, 10, &cfg, &mut master_rng(6)).unwrap();
        assert!(res.cache.len() > 10, "cache explored {} models", res.cache.len());
        assert!(res.best_crit == 0.0, "optimizer reaches a size-3 model");
    }

    #[test]
    fn runs_are_reproducible_for_a_seed() {
        let run = |seed: u64| {
            let mut eval = FnCrit(|k: &ModelKey| {
                (k.count_ones() as f64) * 0.3 - (k.get(0) as u8 as f64) * 2.0
            });
            let res = run_mjmcmc(&mut eval, 8, &config(500), &mut master_rng(seed)).unwrap();
            (res.best_key.clone(), res.cache.len(), res.accept)
        };
        assert_eq!(run(42), run(42));
        assert_ne!(run(42), run(43));
    }

    #[test]
    fn linear_scenario_recovers_strong_signals() {
        use crate::evaluator::EvaluatorParams;
        use crate::feature::{Complexity, Feature};
        use crate::glm::Family;
        use crate::simulate::{simulate, Scenario};

        let mut rng = master_rng(21);
        let data = simulate(Scenario::Linear, 100, None, &mut rng);
        let cx: Vec<Complexity> =
            (0..data.p()).map(|j| Feature::leaf(j).complexity()).collect();
        let params = EvaluatorParams::new(Family::Gaussian, data.p());
        let ev = Evaluator::Builtin;
        let mut ctx = ModelContext {
            y: &data.y,
            intercept: true,
            fixed_cols: &[],
            feature_cols: &data.cols,
            feature_complexities: &cx,
            params: &params,
            evaluator: &ev,
        };
        let res = run_mjmcmc(&mut ctx, data.p(), &config(1000), &mut master_rng(22)).unwrap();
        let incl = res.inclusions(data.p());
        // effect sizes 0.6, 0.8, 1.0 against unit noise are decisive at n=100
        for j in [2, 3, 4] {
            assert!(incl[j] >= 0.95, "inclusion of x{} = {}", j + 1, incl[j]);
        }
    }

    #[test]
    fn config_validation_rejects_bad_vectors() {
        let mut cfg = config(10);
        cfg.probs.mh = vec![0.5; 5];
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = config(10);
        cfg.probs.large = 1.5;
        assert!(cfg.validate().is_err());
        let mut cfg = config(10);
        cfg.params.sa.dt = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = config(10);
        cfg.params.random_prob = 1.0;
        assert!(cfg.validate().is_err());
    }
}
