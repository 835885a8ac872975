//! Local optimizers used to refine large-jump proposals.

use rand::distr::weighted::WeightedIndex;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::bits::ModelKey;
use crate::mjmcmc::kernels::{propose, NeighSize};
use crate::rng::Rng;

/// Criterion source for the optimizers. The sampler implements this on top of
/// its model cache so every evaluated key is cached; tests plug in plain
/// closures via the blanket impl in the parent module.
pub trait Objective {
    fn crit(&mut self, key: &ModelKey) -> f64;
    fn rng(&mut self) -> &mut Rng;
}

const LOCAL_KERN: [f64; 6] = [0.1, 0.05, 0.2, 0.3, 0.2, 0.15];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaParams {
    pub t_init: f64,
    pub t_min: f64,
    pub dt: f64,
    /// Proposals per temperature.
    pub m: usize,
    /// Weights over kernel types 1..=6.
    pub kern: Vec<f64>,
    pub neigh: NeighSize,
}

impl Default for SaParams {
    fn default() -> Self {
        SaParams {
            t_init: 10.0,
            t_min: 1e-4,
            dt: 3.0,
            m: 12,
            kern: LOCAL_KERN.to_vec(),
            neigh: NeighSize::LOCAL,
        }
    }
}

impl SaParams {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.dt > 1.0) {
            return Err(crate::Error::Config(format!(
                "annealing decrement dt must exceed 1, got {}",
                self.dt
            )));
        }
        if !(self.t_min > 0.0 && self.t_min <= self.t_init) {
            return Err(crate::Error::Config(format!(
                "annealing temperatures need 0 < t_min <= t_init, got {} and {}",
                self.t_min, self.t_init
            )));
        }
        validate_kern(&self.kern)?;
        self.neigh.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyParams {
    pub steps: usize,
    /// Candidates drawn per step; the best one is taken iff it improves.
    pub tries: usize,
    pub kern: Vec<f64>,
    pub neigh: NeighSize,
}

impl Default for GreedyParams {
    fn default() -> Self {
        GreedyParams { steps: 20, tries: 3, kern: LOCAL_KERN.to_vec(), neigh: NeighSize::LOCAL }
    }
}

impl GreedyParams {
    pub fn validate(&self) -> crate::Result<()> {
        validate_kern(&self.kern)?;
        self.neigh.validate()
    }
}

pub(crate) fn validate_kern(kern: &[f64]) -> crate::Result<()> {
    if kern.len() != 6 {
        return Err(crate::Error::Config(format!(
            "kernel weight vector must have 6 entries, got {}",
            kern.len()
        )));
    }
    validate_weights(kern)
}

pub(crate) fn validate_weights(w: &[f64]) -> crate::Result<()> {
    if w.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(crate::Error::Config(format!("negative or non-finite weight in {w:?}")));
    }
    if w.iter().sum::<f64>() <= 0.0 {
        return Err(crate::Error::Config("weight vector sums to zero".into()));
    }
    Ok(())
}

/// Simulated annealing maximizing the criterion; returns the best key seen
/// across the whole trajectory, which may be a rejected proposal.
pub fn simulated_annealing<O: Objective>(
    obj: &mut O,
    start: &ModelKey,
    params: &SaParams,
) -> ModelKey {
    let kern = WeightedIndex::new(&params.kern).expect("validated kernel weights");
    let mut cur = start.clone();
    let mut cur_crit = obj.crit(&cur);
    let mut best = cur.clone();
    let mut best_crit = cur_crit;
    let mut t = params.t_init;
    while t >= params.t_min {
        for _ in 0..params.m {
            let kind = obj.rng().sample(&kern) + 1;
            let prop = propose(&cur, kind, &params.neigh, obj.rng());
            let crit = obj.crit(&prop);
            if crit > best_crit {
                best = prop.clone();
                best_crit = crit;
            }
            let delta = crit - cur_crit;
            if delta >= 0.0 || obj.rng().random::<f64>() < (delta / t).exp() {
                cur = prop;
                cur_crit = crit;
            }
        }
        t /= params.dt;
    }
    best
}

/// Greedy ascent: each step draws `tries` candidates and moves to the best
/// one iff it improves the criterion, stopping early otherwise.
pub fn greedy<O: Objective>(obj: &mut O, start: &ModelKey, params: &GreedyParams) -> ModelKey {
    if params.steps == 0 || params.tries == 0 {
        return start.clone();
    }
    let kern = WeightedIndex::new(&params.kern).expect("validated kernel weights");
    let mut cur = start.clone();
    let mut cur_crit = obj.crit(&cur);
    for _ in 0..params.steps {
        let mut best: Option<(ModelKey, f64)> = None;
        for _ in 0..params.tries {
            let kind = obj.rng().sample(&kern) + 1;
            let prop = propose(&cur, kind, &params.neigh, obj.rng());
            let crit = obj.crit(&prop);
            if best.as_ref().map_or(true, |(_, b)| crit > *b) {
                best = Some((prop, crit));
            }
        }
        let (key, crit) = best.expect("tries >= 1");
        if crit > cur_crit {
            cur = key;
            cur_crit = crit;
        } else {
            break;
        }
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{master_rng, Rng as ChainRng};

    struct Toy<F: FnMut(&ModelKey) -> f64> {
        f: F,
        rng: ChainRng,
        evals: usize,
    }

    impl<F: FnMut(&ModelKey) -> f64> Objective for Toy<F> {
        fn crit(&mut self, key: &ModelKey) -> f64 {
            self.evals += 1;
            (self.f)(key)
        }
        fn rng(&mut self) -> &mut ChainRng {
            &mut self.rng
        }
    }

    fn neg_distance_to(target: &ModelKey) -> impl FnMut(&ModelKey) -> f64 + '_ {
        move |k: &ModelKey| -(k.hamming(target) as f64)
    }

    #[test]
    fn annealing_finds_single_optimum_from_far_corner() {
        let target = ModelKey::from_bools(&[true, true, true]);
        let start = ModelKey::zeros(3);
        let mut hits = 0;
        for seed in 0..100 {
            let mut toy = Toy { f: neg_distance_to(&target), rng: master_rng(seed), evals: 0 };
            if simulated_annealing(&mut toy, &start, &SaParams::default()) == target {
                hits += 1;
            }
        }
        assert!(hits >= 99, "found optimum in {hits}/100 runs");
    }

    #[test]
    fn single_temperature_schedule_runs_m_steps() {
        let params = SaParams { t_init: 1.0, t_min: 1.0, m: 7, ..SaParams::default() };
        let mut toy = Toy { f: |_: &ModelKey| 0.0, rng: master_rng(3), evals: 0 };
        simulated_annealing(&mut toy, &ModelKey::zeros(4), &params);
        // one evaluation for the start plus one per proposal
        assert_eq!(toy.evals, 8);
    }

    #[test]
    fn constant_landscape_keeps_start_as_best_crit() {
        let start = ModelKey::from_bools(&[true, false, true]);
        let mut toy = Toy { f: |_: &ModelKey| 2.5, rng: master_rng(4), evals: 0 };
        let out = simulated_annealing(&mut toy, &start, &SaParams::default());
        assert_eq!(out, start, "ties never displace the incumbent best");
    }

    #[test]
    fn greedy_climbs_monotone_landscape_to_optimum() {
        // only-additions kernel makes every candidate improving until full
        let params = GreedyParams {
            steps: 20,
            tries: 2,
            kern: vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
            neigh: NeighSize::LOCAL,
        };
        let mut toy =
            Toy { f: |k: &ModelKey| k.count_ones() as f64, rng: master_rng(5), evals: 0 };
        let out = greedy(&mut toy, &ModelKey::zeros(6), &params);
        assert_eq!(out.count_ones(), 6);
    }

    #[test]
    fn greedy_stays_at_global_optimum() {
        let target = ModelKey::from_bools(&[true, false, true, false]);
        let mut toy = Toy { f: neg_distance_to(&target), rng: master_rng(6), evals: 0 };
        let out = greedy(&mut toy, &target, &GreedyParams::default());
        assert_eq!(out, target);
    }

    #[test]
    fn greedy_zero_tries_returns_start() {
        let start = ModelKey::from_bools(&[false, true]);
        let params = GreedyParams { tries: 0, ..GreedyParams::default() };
        let mut toy = Toy { f: |_: &ModelKey| 1.0, rng: master_rng(7), evals: 0 };
        assert_eq!(greedy(&mut toy, &start, &params), start);
        assert_eq!(toy.evals, 0);
    }

    #[test]
    fn optimizers_are_reproducible_for_a_seed() {
        let target = ModelKey::from_bools(&[true, true, false, true, false, true]);
        let start = ModelKey::zeros(6);
        let run = |seed: u64| {
            let mut toy = Toy { f: neg_distance_to(&target), rng: master_rng(seed), evals: 0 };
            simulated_annealing(&mut toy, &start, &SaParams::default())
        };
        assert_eq!(run(11), run(11));
    }
}
