//! Genetic outer loop: populations of nonlinear features evolve between
//! mode-jumping chain runs. Each generation runs one chain over the current
//! feature set, then low-inclusion features are filtered out and replaced by
//! freshly generated ones.

use std::collections::HashSet;

use rand::seq::SliceRandom as _;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::{Evaluator, EvaluatorParams, ModelContext};
use crate::feature::generate::pearson;
use crate::feature::{
    Complexity, FeatParams, Feature, FeatureGenerator, GenWeights, Operation, PopulationContext,
};
use crate::mjmcmc::{
    marginal_inclusions, run_mjmcmc, AcceptStats, MjmcmcConfig, MjmcmcResult, ParamsMj, ProbsMj,
};
use crate::quadrature::log_sum_exp;
use crate::rng::Rng;
use crate::transforms::TransformRegistry;

/// Move probabilities of the full search: chain moves plus the
/// between-generation filter threshold and operation weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbsGmj {
    pub mj: ProbsMj,
    /// Features with inclusion probability at or above this always survive
    /// the filter step.
    pub filter: f64,
    pub gen: GenWeights,
}

impl Default for ProbsGmj {
    fn default() -> Self {
        ProbsGmj { mj: ProbsMj::default(), filter: 0.6, gen: GenWeights::default() }
    }
}

impl ProbsGmj {
    pub fn validate(&self) -> Result<()> {
        self.mj.validate()?;
        if !(0.0..=1.0).contains(&self.filter) {
            return Err(Error::Config(format!("filter must be in [0,1], got {}", self.filter)));
        }
        let w = [self.gen.interaction, self.gen.modification, self.gen.projection, self.gen.mutation];
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) || w.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Config("generation weights must be nonnegative with a positive sum".to_string()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmjmcmcConfig {
    /// Number of population generations (the outer loop length).
    pub generations: usize,
    /// Chain steps per generation.
    pub n_iter: usize,
    /// Chain steps for the last generation; `None` means `n_iter`.
    pub n_final: Option<usize>,
    pub probs: ProbsGmj,
    pub params: ParamsMj,
    pub feat: FeatParams,
}

impl Default for GmjmcmcConfig {
    fn default() -> Self {
        GmjmcmcConfig {
            generations: 10,
            n_iter: 100,
            n_final: None,
            probs: ProbsGmj::default(),
            params: ParamsMj::default(),
            feat: FeatParams::default(),
        }
    }
}

impl GmjmcmcConfig {
    pub fn new(generations: usize, n_iter: usize) -> Self {
        GmjmcmcConfig { generations, n_iter, ..GmjmcmcConfig::default() }
    }

    pub fn n_final(&self) -> usize {
        self.n_final.unwrap_or(self.n_iter)
    }

    pub fn validate(&self) -> Result<()> {
        if self.generations == 0 {
            return Err(Error::Config("generations must be at least 1".to_string()));
        }
        if self.n_iter == 0 || self.n_final() == 0 {
            return Err(Error::Config("chain length must be at least 1".to_string()));
        }
        self.probs.validate()?;
        self.params.validate()?;
        self.feat.validate()
    }
}

/// How a population feature came to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Original,
    Interaction,
    Modification,
    Projection,
    Mutation,
}

impl From<Operation> for Provenance {
    fn from(op: Operation) -> Self {
        match op {
            Operation::Interaction => Provenance::Interaction,
            Operation::Modification => Provenance::Modification,
            Operation::Projection => Provenance::Projection,
            Operation::Mutation => Provenance::Mutation,
        }
    }
}

/// One generation's feature set plus the pool available to mutation.
#[derive(Debug, Clone)]
pub struct Population {
    /// 1-based generation index.
    pub t: usize,
    pub features: Vec<Feature>,
    /// Canonical strings aligned with `features`.
    pub rendered: Vec<String>,
    pub provenance: Vec<Provenance>,
    /// Features filtered out earlier plus originals not currently present;
    /// disjoint from the population by canonical string.
    pub discarded: Vec<Feature>,
}

impl Population {
    pub fn size(&self) -> usize {
        self.features.len()
    }
}

/// Generation-1 population: the selected covariates as leaf features, with
/// everything unselected seeding the mutation pool.
pub fn init_population(
    p: usize,
    feat: &FeatParams,
    labels: &[String],
    screen: Option<&[f64]>,
) -> Result<Population> {
    let selected: Vec<usize> = match &feat.prel_select {
        Some(idx) => {
            if let Some(&bad) = idx.iter().find(|&&j| j >= p) {
                return Err(Error::Config(format!(
                    "prel.select index {bad} out of range for {p} covariates"
                )));
            }
            let mut seen = HashSet::new();
            idx.iter().copied().filter(|j| seen.insert(*j)).collect()
        }
        None => (0..p).collect(),
    };
    let kept: Vec<usize> = if feat.prel_filter > 0.0 {
        let stats = screen.ok_or_else(|| {
            Error::Config("prel.filter requires screening statistics".to_string())
        })?;
        selected.into_iter().filter(|&j| stats[j].abs() >= feat.prel_filter).collect()
    } else {
        selected
    };
    if kept.is_empty() {
        return Err(Error::EmptyInitialPopulation);
    }

    let in_pop: HashSet<usize> = kept.iter().copied().collect();
    let discarded = (0..p).filter(|j| !in_pop.contains(j)).map(Feature::leaf).collect();
    Ok(Population {
        t: 1,
        rendered: kept.iter().map(|&j| labels[j].clone()).collect(),
        provenance: vec![Provenance::Original; kept.len()],
        features: kept.into_iter().map(Feature::leaf).collect(),
        discarded,
    })
}

/// Split the population into surviving and removed indices (both ascending).
///
/// Features at or above the filter threshold always survive, as do original
/// covariates when `keep_org`. The rest are visited in random order and each
/// removed with probability one minus its inclusion, stopping once survivors
/// would drop below ⌈keep_min·|pop|⌉.
pub fn filter_population(
    pop: &Population,
    incl: &[f64],
    filter: f64,
    keep_min: f64,
    keep_org: bool,
    rng: &mut Rng,
) -> (Vec<usize>, Vec<usize>) {
    let q = pop.features.len();
    debug_assert_eq!(incl.len(), q);
    let floor = (keep_min * q as f64).ceil() as usize;
    let max_removals = q.saturating_sub(floor);

    let mut removable: Vec<usize> = (0..q)
        .filter(|&j| {
            incl[j] < filter && !(keep_org && matches!(pop.features[j], Feature::Leaf { .. }))
        })
        .collect();
    removable.shuffle(rng);

    let mut removed = vec![false; q];
    let mut n_removed = 0;
    for &j in &removable {
        if n_removed >= max_removals {
            break;
        }
        if rng.random::<f64>() < 1.0 - incl[j] {
            removed[j] = true;
            n_removed += 1;
        }
    }
    let kept = (0..q).filter(|&j| !removed[j]).collect();
    let gone = (0..q).filter(|&j| removed[j]).collect();
    (kept, gone)
}

/// Filter, then refill with generated features up to the target size: the
/// population cap right after generation 1, the previous size afterwards.
/// When generation gives up before the target is reached the population stays
/// short rather than failing.
pub fn evolve_population(
    pop: &Population,
    incl: &[f64],
    weights: &GenWeights,
    filter: f64,
    generator: &FeatureGenerator<'_>,
    rng: &mut Rng,
) -> Result<Population> {
    let feat = generator.params;
    let p = generator.labels.len();
    let prev_size = pop.size();
    let pop_max = feat.effective_pop_max(p);
    let target = if pop.t == 1 { pop_max } else { prev_size.min(pop_max) };

    let (kept_idx, removed_idx) =
        filter_population(pop, incl, filter, feat.keep_min, feat.keep_org, rng);

    let n_kept = kept_idx.len();
    let mut features: Vec<Feature> = kept_idx.iter().map(|&j| pop.features[j].clone()).collect();
    let mut rendered: Vec<String> = kept_idx.iter().map(|&j| pop.rendered[j].clone()).collect();
    let mut provenance: Vec<Provenance> =
        kept_idx.iter().map(|&j| pop.provenance[j]).collect();
    // eps floor: every surviving feature keeps at least eps parent weight, so
    // covariates whose signal is invisible marginally (e.g. pure interaction
    // effects) can still be drawn as operands
    let kept_incl: Vec<f64> = kept_idx.iter().map(|&j| incl[j].max(feat.eps)).collect();

    let mut strings: HashSet<String> = rendered.iter().cloned().collect();
    let mut check_cols: Vec<Vec<f64>> = features
        .iter()
        .map(|f| generator.check_column(f))
        .collect::<Result<_>>()?;

    // mutation pool: previously discarded, newly removed, and absent originals
    let mut pool: Vec<Feature> = Vec::new();
    let mut pool_rendered: Vec<String> = Vec::new();
    {
        let mut seen: HashSet<String> = strings.clone();
        let removed_feats = removed_idx.iter().map(|&j| pop.features[j].clone());
        let absent_leaves = (0..p).map(Feature::leaf);
        for f in pop.discarded.iter().cloned().chain(removed_feats).chain(absent_leaves) {
            let s = f.render(generator.labels);
            if seen.insert(s.clone()) {
                pool.push(f);
                pool_rendered.push(s);
            }
        }
    }

    while features.len() < target {
        let cand = {
            let ctx = PopulationContext {
                features: &features[..n_kept],
                incl: &kept_incl,
                pool: &pool,
                existing_strings: &strings,
                existing_check_cols: &check_cols,
            };
            match generator.generate(rng, weights, &ctx) {
                Ok(c) => c,
                Err(Error::GenerationExhausted(_)) => break,
                Err(e) => return Err(e),
            }
        };
        if cand.op == Operation::Mutation {
            if let Some(i) = pool_rendered.iter().position(|s| *s == cand.rendered) {
                pool.remove(i);
                pool_rendered.remove(i);
            }
        }
        strings.insert(cand.rendered.clone());
        check_cols.push(cand.check_col);
        features.push(cand.feature);
        rendered.push(cand.rendered);
        provenance.push(cand.op.into());
    }

    Ok(Population { t: pop.t + 1, features, rendered, provenance, discarded: pool })
}

/// Archived feature: the canonical string plus the projection weights and
/// size measures, enough to rebuild its data column exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureInfo {
    pub feature: String,
    /// `[alpha0, w1, ..]` for top-level projections, empty otherwise.
    pub alphas: Vec<f64>,
    pub complexity: Complexity,
    pub provenance: Provenance,
}

/// Archived model: inclusion bitmask over the generation's features plus the
/// fitted criterion and coefficients (intercept, then fixed columns, then
/// included features in bit order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArchive {
    pub model: String,
    pub crit: f64,
    pub coefs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationArchive {
    pub features: Vec<FeatureInfo>,
    pub models: Vec<ModelArchive>,
    pub best_crit: f64,
    pub accept: AcceptStats,
}

impl GenerationArchive {
    /// Renormalized model probabilities in archive order.
    pub fn posteriors(&self) -> Vec<f64> {
        let crits: Vec<f64> = self.models.iter().map(|m| m.crit).collect();
        let lse = log_sum_exp(&crits);
        crits.into_iter().map(|c| (c - lse).exp()).collect()
    }

    /// Marginal inclusion probability per feature, renormalized within this
    /// generation.
    pub fn inclusions(&self) -> Vec<f64> {
        let mut incl = vec![0.0; self.features.len()];
        for (m, p) in self.models.iter().zip(self.posteriors()) {
            for (j, b) in m.model.bytes().enumerate() {
                if b == b'1' {
                    incl[j] += p;
                }
            }
        }
        incl
    }
}

/// Full run archive. Everything downstream — merging, summaries, prediction —
/// works from this alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmjResult {
    pub labels: Vec<String>,
    pub intercept: bool,
    pub fixed: usize,
    pub generations: Vec<GenerationArchive>,
    /// Best criterion per generation.
    pub best_crit: Vec<f64>,
    /// Index into `generations` with the overall best criterion.
    pub best_generation: usize,
    pub last_generation: usize,
}

/// Data and model assumptions shared by every generation of a run.
pub struct GmjProblem<'a> {
    pub y: &'a [f64],
    /// Original covariates, column-major, aligned with `labels`.
    pub cols: &'a [Vec<f64>],
    pub labels: &'a [String],
    /// Columns included in every model (besides the intercept).
    pub fixed_cols: &'a [Vec<f64>],
    pub intercept: bool,
    pub registry: &'a TransformRegistry,
    pub eval_params: &'a EvaluatorParams,
    pub evaluator: &'a Evaluator,
}

impl GmjProblem<'_> {
    fn screen_stats(&self) -> Vec<f64> {
        self.cols.iter().map(|c| pearson(c, self.y)).collect()
    }
}

fn archive_features(pop: &Population) -> Vec<FeatureInfo> {
    pop.features
        .iter()
        .zip(&pop.rendered)
        .zip(&pop.provenance)
        .map(|((f, s), &prov)| {
            let alphas = match f {
                Feature::Projection { alpha0, weights, .. } => {
                    let mut a = vec![*alpha0];
                    a.extend_from_slice(weights);
                    a
                }
                _ => Vec::new(),
            };
            FeatureInfo {
                feature: s.clone(),
                alphas,
                complexity: f.complexity(),
                provenance: prov,
            }
        })
        .collect()
}

fn archive_generation(pop: &Population, result: &MjmcmcResult) -> GenerationArchive {
    GenerationArchive {
        features: archive_features(pop),
        models: result
            .cache
            .iter()
            .map(|(key, rec)| ModelArchive {
                model: key.to_bitstring(),
                crit: rec.crit,
                coefs: rec.coefs.clone(),
            })
            .collect(),
        best_crit: result.best_crit,
        accept: result.accept,
    }
}

/// Run the full genetic search: one chain per generation, filtering and
/// regeneration in between, archiving every generation.
pub fn run_gmjmcmc(
    problem: &GmjProblem<'_>,
    config: &GmjmcmcConfig,
    rng: &mut Rng,
) -> Result<GmjResult> {
    config.validate()?;
    let p = problem.cols.len();
    let screen = if config.feat.prel_filter > 0.0 { Some(problem.screen_stats()) } else { None };
    let mut pop = init_population(p, &config.feat, problem.labels, screen.as_deref())?;
    let generator = FeatureGenerator::new(
        problem.registry,
        problem.labels,
        problem.cols,
        problem.y,
        &config.feat,
        rng,
    );

    let mut generations = Vec::with_capacity(config.generations);
    let mut best_series = Vec::with_capacity(config.generations);
    for t in 1..=config.generations {
        let feature_cols: Vec<Vec<f64>> = pop
            .features
            .iter()
            .map(|f| f.evaluate(problem.cols, problem.registry))
            .collect::<Result<_>>()?;
        let complexities: Vec<Complexity> =
            pop.features.iter().map(Feature::complexity).collect();
        let mut ctx = ModelContext {
            y: problem.y,
            intercept: problem.intercept,
            fixed_cols: problem.fixed_cols,
            feature_cols: &feature_cols,
            feature_complexities: &complexities,
            params: problem.eval_params,
            evaluator: problem.evaluator,
        };
        let n_iter = if t == config.generations { config.n_final() } else { config.n_iter };
        let mj_config =
            MjmcmcConfig { n_iter, probs: config.probs.mj.clone(), params: config.params.clone() };
        let result = run_mjmcmc(&mut ctx, pop.size(), &mj_config, rng)?;

        generations.push(archive_generation(&pop, &result));
        best_series.push(result.best_crit);

        if t < config.generations {
            let incl = marginal_inclusions(&result.cache, pop.size());
            pop = evolve_population(&pop, &incl, &config.probs.gen, config.probs.filter, &generator, rng)?;
        }
    }

    let best_generation = best_series
        .iter()
        .enumerate()
        .fold(0, |best, (i, &c)| if c > best_series[best] { i } else { best });
    Ok(GmjResult {
        labels: problem.labels.to_vec(),
        intercept: problem.intercept,
        fixed: problem.fixed_cols.len(),
        last_generation: generations.len() - 1,
        generations,
        best_crit: best_series,
        best_generation,
    })
}
