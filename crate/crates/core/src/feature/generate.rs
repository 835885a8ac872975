use std::collections::HashSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Feature;
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::transforms::TransformRegistry;

/// Correlations at or above this magnitude count as collinear.
const COLLINEAR_TOL: f64 = 1e-8;
/// Collinearity is checked on at most this many rows.
const CHECK_ROWS_MAX: usize = 1000;

/// Relative frequencies of the four feature-generating operations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenWeights {
    pub interaction: f64,
    pub modification: f64,
    pub projection: f64,
    pub mutation: f64,
}

impl Default for GenWeights {
    fn default() -> Self {
        GenWeights { interaction: 0.25, modification: 0.25, projection: 0.25, mutation: 0.25 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operation {
    Interaction,
    Modification,
    Projection,
    Mutation,
}

impl GenWeights {
    /// Probabilities in [interaction, modification, projection, mutation]
    /// order. Transform-based operations are disabled when no transforms are
    /// registered; the remainder is renormalized.
    pub fn normalized(&self, registry_empty: bool) -> [f64; 4] {
        let mut w = [
            self.interaction.max(0.0),
            if registry_empty { 0.0 } else { self.modification.max(0.0) },
            if registry_empty { 0.0 } else { self.projection.max(0.0) },
            self.mutation.max(0.0),
        ];
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            for v in w.iter_mut() {
                *v /= total;
            }
        }
        w
    }

    fn sample(&self, rng: &mut Rng, registry_empty: bool) -> Result<Operation> {
        let w = self.normalized(registry_empty);
        if w.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Config(
                "all feature generation weights are zero".to_string(),
            ));
        }
        let ops = [
            Operation::Interaction,
            Operation::Modification,
            Operation::Projection,
            Operation::Mutation,
        ];
        let idx = WeightedIndex::new(w).expect("positive total checked above");
        Ok(ops[idx.sample(rng)])
    }
}

/// How the affine weights of a projection are chosen when it is created.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaStrategy {
    /// Intercept and all weights set to 1.
    Unit,
    /// Weights minimizing the residual sum of squares of the response
    /// regressed on the projected column, found by Nelder–Mead.
    Deep,
    /// Weights drawn iid standard normal.
    Random,
}

/// Tuning knobs of the feature search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatParams {
    /// Maximum feature depth.
    pub d_max: usize,
    /// Maximum feature width (leaf occurrences per feature).
    pub l_max: usize,
    pub alpha: AlphaStrategy,
    /// Population size cap; `None` means `trunc(1.5·p)` capped at 100.
    pub pop_max: Option<usize>,
    /// Keep every original covariate in every population.
    pub keep_org: bool,
    /// Minimum |cor(x_j, y)| for a covariate to enter the first population
    /// (0 disables).
    pub prel_filter: f64,
    /// Explicit initial covariate selection; `None` selects all.
    pub prel_select: Option<Vec<usize>>,
    /// Minimum fraction of the population retained by the filter step.
    pub keep_min: f64,
    /// Features with inclusion probability below this are not used as parents.
    pub eps: f64,
    pub check_col: bool,
    /// Check collinearity on synthetic standard-normal data instead of a
    /// subsample of the real rows.
    pub col_check_mock_data: bool,
    /// Maximum number of children in one projection.
    pub max_proj_size: usize,
    /// Retries before feature generation gives up.
    pub max_gen_attempts: usize,
}

impl Default for FeatParams {
    fn default() -> Self {
        FeatParams {
            d_max: 5,
            l_max: 15,
            alpha: AlphaStrategy::Unit,
            pop_max: None,
            keep_org: false,
            prel_filter: 0.0,
            prel_select: None,
            keep_min: 0.8,
            eps: 0.05,
            check_col: true,
            col_check_mock_data: false,
            max_proj_size: 15,
            max_gen_attempts: 100,
        }
    }
}

impl FeatParams {
    pub fn effective_pop_max(&self, p: usize) -> usize {
        self.pop_max
            .unwrap_or_else(|| (((1.5 * p as f64) as usize).min(100)).max(1))
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.keep_min) {
            return Err(Error::Config(format!("keep.min must be in [0,1], got {}", self.keep_min)));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::Config(format!("eps must be in (0,1), got {}", self.eps)));
        }
        if self.pop_max == Some(0) {
            return Err(Error::Config("pop.max must be at least 1".to_string()));
        }
        if self.max_gen_attempts == 0 {
            return Err(Error::Config("max_gen_attempts must be at least 1".to_string()));
        }
        Ok(())
    }
}

/// Population state the generator draws from.
pub struct PopulationContext<'a> {
    pub features: &'a [Feature],
    /// Marginal inclusion probability per population feature.
    pub incl: &'a [f64],
    /// Mutation candidates: discarded features plus absent original covariates.
    pub pool: &'a [Feature],
    /// Canonical strings already present (population plus accepted candidates).
    pub existing_strings: &'a HashSet<String>,
    /// Check-row columns of the existing features, aligned with `features`
    /// followed by accepted candidates.
    pub existing_check_cols: &'a [Vec<f64>],
}

/// A freshly generated feature plus its column on the collinearity check rows.
#[derive(Debug)]
pub struct Candidate {
    pub feature: Feature,
    pub rendered: String,
    pub check_col: Vec<f64>,
    /// Operation that produced the feature.
    pub op: Operation,
}

pub struct FeatureGenerator<'a> {
    pub registry: &'a TransformRegistry,
    pub labels: &'a [String],
    cols: &'a [Vec<f64>],
    y: &'a [f64],
    pub params: &'a FeatParams,
    /// Original covariates restricted to the check rows (or mock data).
    check_base: Vec<Vec<f64>>,
}

impl<'a> FeatureGenerator<'a> {
    /// The check subsample (or mock data) is drawn once per run so every
    /// collinearity decision within the run sees the same rows.
    pub fn new(
        registry: &'a TransformRegistry,
        labels: &'a [String],
        cols: &'a [Vec<f64>],
        y: &'a [f64],
        params: &'a FeatParams,
        rng: &mut Rng,
    ) -> Self {
        let n = y.len();
        let check_base = if params.col_check_mock_data {
            let rows = n.min(CHECK_ROWS_MAX);
            cols.iter()
                .map(|_| (0..rows).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
                .collect()
        } else if n <= CHECK_ROWS_MAX {
            cols.to_vec()
        } else {
            let rows = sample_without_replacement(rng, n, CHECK_ROWS_MAX);
            cols.iter()
                .map(|c| rows.iter().map(|&r| c[r]).collect())
                .collect()
        };
        FeatureGenerator { registry, labels, cols, y, params, check_base }
    }

    /// Evaluate a feature on the collinearity check rows.
    pub fn check_column(&self, feature: &Feature) -> Result<Vec<f64>> {
        feature.evaluate(&self.check_base, self.registry)
    }

    /// Draw one acceptable new feature, retrying rejected candidates up to the
    /// configured limit.
    pub fn generate(
        &self,
        rng: &mut Rng,
        weights: &GenWeights,
        ctx: &PopulationContext<'_>,
    ) -> Result<Candidate> {
        for _ in 0..self.params.max_gen_attempts {
            let op = weights.sample(rng, self.registry.is_empty())?;
            let feature = match self.propose(rng, op, ctx) {
                Ok(f) => f,
                Err(Error::NoEligibleParent) => continue,
                Err(e) => return Err(e),
            };
            let cx = feature.complexity();
            if cx.depth > self.params.d_max || cx.width > self.params.l_max {
                continue;
            }
            let rendered = feature.render(self.labels);
            if ctx.existing_strings.contains(&rendered) {
                continue;
            }
            let check_col = self.check_column(&feature)?;
            if self.params.check_col
                && is_collinear(&check_col, ctx.existing_check_cols)
            {
                continue;
            }
            return Ok(Candidate { feature, rendered, check_col, op });
        }
        Err(Error::GenerationExhausted(self.params.max_gen_attempts))
    }

    fn propose(
        &self,
        rng: &mut Rng,
        op: Operation,
        ctx: &PopulationContext<'_>,
    ) -> Result<Feature> {
        match op {
            Operation::Interaction => {
                let a = self.pick_parent(rng, ctx)?;
                let b = self.pick_parent(rng, ctx)?;
                Ok(Feature::Interaction { left: Box::new(a), right: Box::new(b) })
            }
            Operation::Modification => {
                let child = self.pick_parent(rng, ctx)?;
                let name = self.pick_transform(rng)?;
                Ok(Feature::Modification { name, child: Box::new(child) })
            }
            Operation::Projection => self.propose_projection(rng, ctx),
            Operation::Mutation => {
                if ctx.pool.is_empty() {
                    return Err(Error::NoEligibleParent);
                }
                Ok(ctx.pool[rng.random_range(0..ctx.pool.len())].clone())
            }
        }
    }

    fn propose_projection(&self, rng: &mut Rng, ctx: &PopulationContext<'_>) -> Result<Feature> {
        let eligible = self.eligible_parents(ctx);
        if eligible.is_empty() {
            return Err(Error::NoEligibleParent);
        }
        let k_max = self.params.max_proj_size.min(eligible.len()).max(1);
        let k = rng.random_range(1..=k_max);
        // weighted sampling without replacement
        let mut weights: Vec<f64> = eligible.iter().map(|&(_, w)| w).collect();
        let mut children = Vec::with_capacity(k);
        for _ in 0..k {
            let idx = WeightedIndex::new(&weights)
                .map_err(|_| Error::NoEligibleParent)?
                .sample(rng);
            children.push(ctx.features[eligible[idx].0].clone());
            weights[idx] = 0.0;
        }
        let name = self.pick_transform(rng)?;
        let (alpha0, w) = self.alphas(rng, &name, &children)?;
        Ok(Feature::Projection { name, alpha0, weights: w, children })
    }

    fn pick_transform(&self, rng: &mut Rng) -> Result<String> {
        if self.registry.is_empty() {
            return Err(Error::NoEligibleParent);
        }
        let names = self.registry.names();
        Ok(names[rng.random_range(0..names.len())].clone())
    }

    fn eligible_parents(&self, ctx: &PopulationContext<'_>) -> Vec<(usize, f64)> {
        ctx.incl
            .iter()
            .enumerate()
            .filter(|&(_, &w)| w >= self.params.eps)
            .map(|(j, &w)| (j, w))
            .collect()
    }

    fn pick_parent(&self, rng: &mut Rng, ctx: &PopulationContext<'_>) -> Result<Feature> {
        let eligible = self.eligible_parents(ctx);
        if eligible.is_empty() {
            return Err(Error::NoEligibleParent);
        }
        let idx = WeightedIndex::new(eligible.iter().map(|&(_, w)| w))
            .map_err(|_| Error::NoEligibleParent)?
            .sample(rng);
        Ok(ctx.features[eligible[idx].0].clone())
    }

    fn alphas(
        &self,
        rng: &mut Rng,
        name: &str,
        children: &[Feature],
    ) -> Result<(f64, Vec<f64>)> {
        match self.params.alpha {
            AlphaStrategy::Unit => Ok((1.0, vec![1.0; children.len()])),
            AlphaStrategy::Random => {
                let a0 = rng.sample(StandardNormal);
                let w = (0..children.len())
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect();
                Ok((a0, w))
            }
            AlphaStrategy::Deep => {
                let child_cols: Vec<Vec<f64>> = children
                    .iter()
                    .map(|c| c.evaluate(self.cols, self.registry))
                    .collect::<Result<_>>()?;
                let transform = self.registry.get(name)?.clone();
                let y = self.y;
                let objective = move |theta: &[f64]| -> f64 {
                    let n = y.len();
                    let mut z = vec![theta[0]; n];
                    for (col, &w) in child_cols.iter().zip(&theta[1..]) {
                        for (zi, &v) in z.iter_mut().zip(col) {
                            *zi += w * v;
                        }
                    }
                    for zi in z.iter_mut() {
                        *zi = transform(*zi);
                    }
                    simple_rss(y, &z)
                };
                let start = vec![1.0; children.len() + 1];
                let best = nelder_mead(&objective, start, 200);
                if best.iter().all(|v| v.is_finite()) {
                    Ok((best[0], best[1..].to_vec()))
                } else {
                    Ok((1.0, vec![1.0; children.len()]))
                }
            }
        }
    }
}

/// Candidates collinear with (or constant against) any existing column are
/// rejected.
fn is_collinear(candidate: &[f64], existing: &[Vec<f64>]) -> bool {
    let n = candidate.len() as f64;
    let mean = candidate.iter().sum::<f64>() / n;
    let var = candidate.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    if var <= 0.0 || !var.is_finite() {
        return true;
    }
    existing
        .iter()
        .any(|col| pearson(candidate, col).abs() >= 1.0 - COLLINEAR_TOL)
}

pub(crate) fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

pub(crate) fn sample_without_replacement(rng: &mut Rng, n: usize, k: usize) -> Vec<usize> {
    // partial Fisher–Yates over an index vector
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}

/// Residual sum of squares of y regressed on [1, z].
fn simple_rss(y: &[f64], z: &[f64]) -> f64 {
    let n = y.len() as f64;
    let my = y.iter().sum::<f64>() / n;
    let mz = z.iter().sum::<f64>() / n;
    let mut szz = 0.0;
    let mut szy = 0.0;
    let mut syy = 0.0;
    for (&yi, &zi) in y.iter().zip(z) {
        if !zi.is_finite() {
            return f64::INFINITY;
        }
        szz += (zi - mz) * (zi - mz);
        szy += (zi - mz) * (yi - my);
        syy += (yi - my) * (yi - my);
    }
    if szz <= 0.0 {
        return syy;
    }
    let rss = syy - szy * szy / szz;
    if rss.is_finite() {
        rss.max(0.0)
    } else {
        f64::INFINITY
    }
}

/// Derivative-free minimizer (Nelder–Mead with standard coefficients).
pub(crate) fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    start: Vec<f64>,
    max_iter: usize,
) -> Vec<f64> {
    let d = start.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    simplex.push(start.clone());
    for i in 0..d {
        let mut v = start.clone();
        v[i] += 0.5;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| f(x)).collect();

    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[d];
        let second_worst = order[d - 1];

        let mut centroid = vec![0.0; d];
        for &i in order.iter().take(d) {
            for (c, v) in centroid.iter_mut().zip(&simplex[i]) {
                *c += v / d as f64;
            }
        }
        let point = |scale: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + scale * (c - w))
                .collect()
        };

        let reflected = point(1.0);
        let fr = f(&reflected);
        if fr < values[best] {
            let expanded = point(2.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = fr;
        } else {
            let contracted = point(-0.5);
            let fc = f(&contracted);
            if fc < values[worst] {
                simplex[worst] = contracted;
                values[worst] = fc;
            } else {
                let best_point = simplex[best].clone();
                for i in 0..=d {
                    if i == best {
                        continue;
                    }
                    for (v, b) in simplex[i].iter_mut().zip(&best_point) {
                        *v = b + 0.5 * (*v - b);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let argmin = (0..=d)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("non-empty simplex");
    simplex[argmin].clone()
}
