//! Post-processing of run archives: merging independent runs into one model
//! set, summary tables, best/median-probability model extraction,
//! model-averaged prediction, and diagnostics series.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::bits::ModelKey;
use crate::error::{Error, Result};
use crate::evaluator::{FitResult, ModelContext};
use crate::feature::parse::parse_feature;
use crate::feature::{Complexity, Feature};
use crate::gmjmcmc::{GmjProblem, GmjResult};
use crate::quadrature::log_sum_exp;

/// Which generations of each run enter the merged model set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PopSelector {
    /// The generation with the highest criterion, per run.
    Best,
    /// The final generation, per run.
    Last,
    /// Every generation of every run.
    All,
}

impl PopSelector {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "best" => Ok(PopSelector::Best),
            "last" => Ok(PopSelector::Last),
            "all" => Ok(PopSelector::All),
            other => Err(Error::Config(format!("unknown population selector '{other}'"))),
        }
    }
}

/// One deduplicated model. Identity across runs and generations is the sorted
/// set of included feature strings; `features` keeps the original column
/// order so it stays aligned with `coefs` (intercept, fixed columns, then
/// included features).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergedModel {
    /// Included features in coefficient order.
    pub features: Vec<String>,
    /// The same strings, sorted: the model's identity.
    pub signature: Vec<String>,
    pub crit: f64,
    pub coefs: Vec<f64>,
    /// Renormalized posterior probability over the merged set.
    pub weight: f64,
    /// Source run and generation of the retained record.
    pub run: usize,
    pub generation: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergedResult {
    pub labels: Vec<String>,
    pub intercept: bool,
    pub fixed: usize,
    /// Models in signature order with weights summing to one.
    pub models: Vec<MergedModel>,
    /// Feature inclusion probabilities, one entry per feature string seen in
    /// any merged model, in string order.
    pub features: Vec<(String, f64)>,
    /// Best criterion per generation, per source run.
    pub best_crit: Vec<Vec<f64>>,
}

impl MergedResult {
    pub fn inclusion(&self, feature: &str) -> f64 {
        self.features
            .binary_search_by(|(s, _)| s.as_str().cmp(feature))
            .map(|i| self.features[i].1)
            .unwrap_or(0.0)
    }
}

/// Pool the selected generations of every run into one renormalized model
/// set, deduplicating by signature and keeping the highest criterion.
pub fn merge_runs(runs: &[GmjResult], pop: PopSelector) -> Result<MergedResult> {
    let first = runs.first().ok_or_else(|| Error::Config("no runs to merge".to_string()))?;

    let mut dedup: BTreeMap<Vec<String>, MergedModel> = BTreeMap::new();
    for (run_idx, run) in runs.iter().enumerate() {
        let selected: Vec<usize> = match pop {
            PopSelector::Best => vec![run.best_generation],
            PopSelector::Last => vec![run.last_generation],
            PopSelector::All => (0..run.generations.len()).collect(),
        };
        for g in selected {
            let generation = &run.generations[g];
            for model in &generation.models {
                let features: Vec<String> = model
                    .model
                    .bytes()
                    .enumerate()
                    .filter(|&(_, b)| b == b'1')
                    .map(|(j, _)| generation.features[j].feature.clone())
                    .collect();
                let mut signature = features.clone();
                signature.sort();
                let candidate = MergedModel {
                    features,
                    signature: signature.clone(),
                    crit: model.crit,
                    coefs: model.coefs.clone(),
                    weight: 0.0,
                    run: run_idx,
                    generation: g,
                };
                match dedup.get_mut(&signature) {
                    Some(existing) if existing.crit >= candidate.crit => {}
                    Some(existing) => *existing = candidate,
                    None => {
                        dedup.insert(signature, candidate);
                    }
                }
            }
        }
    }

    let mut models: Vec<MergedModel> = dedup.into_values().collect();
    let crits: Vec<f64> = models.iter().map(|m| m.crit).collect();
    let lse = log_sum_exp(&crits);
    for m in models.iter_mut() {
        m.weight = (m.crit - lse).exp();
    }

    let mut incl: BTreeMap<String, f64> = BTreeMap::new();
    for m in &models {
        for f in &m.features {
            *incl.entry(f.clone()).or_insert(0.0) += m.weight;
        }
    }

    Ok(MergedResult {
        labels: first.labels.clone(),
        intercept: first.intercept,
        fixed: first.fixed,
        models,
        features: incl.into_iter().collect(),
        best_crit: runs.iter().map(|r| r.best_crit.clone()).collect(),
    })
}

/// Smallest value whose cumulative weight reaches `level` (left-continuous
/// inverse CDF). Weights are renormalized internally.
pub fn weighted_quantile(pairs: &[(f64, f64)], level: f64) -> f64 {
    debug_assert!(!pairs.is_empty());
    let total: f64 = pairs.iter().map(|&(_, w)| w).sum();
    let mut sorted: Vec<(f64, f64)> = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    if total <= 0.0 {
        return sorted[0].0;
    }
    let mut cum = 0.0;
    for &(v, w) in &sorted {
        cum += w / total;
        if cum >= level {
            return v;
        }
    }
    sorted.last().expect("nonempty").0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub feature: String,
    pub prob: f64,
    /// Weighted coefficient quantiles at the requested levels, zero standing
    /// in for models that exclude the feature.
    pub effects: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Rows above the probability cutoff, by descending probability; ties
    /// break lexicographically.
    pub rows: Vec<SummaryRow>,
    pub effect_levels: Option<Vec<f64>>,
    /// Intercept quantiles when effects were requested and the model has one.
    pub intercept_effects: Option<Vec<f64>>,
}

/// Feature table of a merged result: inclusion probabilities above `tol`,
/// optionally with weighted coefficient quantiles.
pub fn summarize(merged: &MergedResult, tol: f64, effect_levels: Option<&[f64]>) -> Summary {
    let mut rows: Vec<SummaryRow> = merged
        .features
        .iter()
        .filter(|(_, p)| *p > tol)
        .map(|(feature, prob)| SummaryRow { feature: feature.clone(), prob: *prob, effects: None })
        .collect();
    rows.sort_by(|a, b| b.prob.total_cmp(&a.prob).then_with(|| a.feature.cmp(&b.feature)));

    let mut intercept_effects = None;
    if let Some(levels) = effect_levels {
        let coef_offset = usize::from(merged.intercept) + merged.fixed;
        for row in rows.iter_mut() {
            let pairs: Vec<(f64, f64)> = merged
                .models
                .iter()
                .map(|m| {
                    let coef = m
                        .features
                        .iter()
                        .position(|f| *f == row.feature)
                        .map_or(0.0, |j| m.coefs[coef_offset + j]);
                    (coef, m.weight)
                })
                .collect();
            row.effects = Some(levels.iter().map(|&l| weighted_quantile(&pairs, l)).collect());
        }
        if merged.intercept {
            let pairs: Vec<(f64, f64)> =
                merged.models.iter().map(|m| (m.coefs[0], m.weight)).collect();
            intercept_effects =
                Some(levels.iter().map(|&l| weighted_quantile(&pairs, l)).collect());
        }
    }

    Summary {
        rows,
        effect_levels: effect_levels.map(<[f64]>::to_vec),
        intercept_effects,
    }
}

/// Highest-criterion model; ties go to the lexicographically smaller
/// signature.
pub fn best_model(merged: &MergedResult) -> Result<&MergedModel> {
    merged
        .models
        .iter()
        .fold(None::<&MergedModel>, |best, m| match best {
            Some(b) if b.crit >= m.crit => Some(b),
            _ => Some(m),
        })
        .ok_or_else(|| Error::Config("merged result holds no models".to_string()))
}

/// Median-probability model: features with inclusion above one half, refit on
/// the original data. Falls back to the intercept-only (plus fixed columns)
/// model when nothing passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpmModel {
    pub features: Vec<String>,
    pub coefs: Vec<f64>,
    pub crit: f64,
}

pub fn mpm_model(merged: &MergedResult, problem: &GmjProblem<'_>) -> Result<MpmModel> {
    let selected: Vec<&str> = merged
        .features
        .iter()
        .filter(|(_, p)| *p > 0.5)
        .map(|(f, _)| f.as_str())
        .collect();

    let features: Vec<Feature> = selected
        .iter()
        .map(|s| parse_feature(s, problem.labels, problem.registry))
        .collect::<Result<_>>()?;
    let feature_cols: Vec<Vec<f64>> = features
        .iter()
        .map(|f| f.evaluate(problem.cols, problem.registry))
        .collect::<Result<_>>()?;
    let complexities: Vec<Complexity> = features.iter().map(Feature::complexity).collect();

    let ctx = ModelContext {
        y: problem.y,
        intercept: problem.intercept,
        fixed_cols: problem.fixed_cols,
        feature_cols: &feature_cols,
        feature_complexities: &complexities,
        params: problem.eval_params,
        evaluator: problem.evaluator,
    };
    let key = ModelKey::from_bools(&vec![true; features.len()]);
    let fit: FitResult = ctx.evaluate(&key);
    Ok(MpmModel {
        features: selected.iter().map(|s| s.to_string()).collect(),
        coefs: fit.coefs,
        crit: fit.crit,
    })
}

/// Model-averaged predictions: weighted mean and weighted quantiles of the
/// per-model inverse-linked predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub mean: Vec<f64>,
    pub levels: Vec<f64>,
    /// One row per level, aligned with `mean`.
    pub quantiles: Vec<Vec<f64>>,
}

/// Predict on new data. `covariates` maps original covariate names to
/// columns; every label of the merged result must be present. Fixed columns
/// are positional and must match the fit. The population selection happened
/// at merge time.
pub fn predict_bma(
    merged: &MergedResult,
    covariates: &BTreeMap<String, Vec<f64>>,
    fixed_cols: &[Vec<f64>],
    registry: &crate::transforms::TransformRegistry,
    ilink: impl Fn(f64) -> f64,
    levels: &[f64],
) -> Result<PredictionSet> {
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("quantile levels must be strictly increasing".to_string()));
    }
    if fixed_cols.len() != merged.fixed {
        return Err(Error::Config(format!(
            "model was fit with {} fixed columns, got {}",
            merged.fixed,
            fixed_cols.len()
        )));
    }
    let cols: Vec<&[f64]> = merged
        .labels
        .iter()
        .map(|l| {
            covariates
                .get(l)
                .map(Vec::as_slice)
                .ok_or_else(|| Error::MissingCovariate(l.clone()))
        })
        .collect::<Result<_>>()?;
    let n = cols.first().map_or_else(|| fixed_cols.first().map_or(0, Vec::len), |c| c.len());
    let owned: Vec<Vec<f64>> = cols.iter().map(|c| c.to_vec()).collect();

    // feature columns are shared across models
    let mut feat_cols: HashMap<&str, Vec<f64>> = HashMap::new();
    for m in &merged.models {
        for f in &m.features {
            if !feat_cols.contains_key(f.as_str()) {
                let parsed = parse_feature(f, &merged.labels, registry)?;
                feat_cols.insert(f, parsed.evaluate(&owned, registry)?);
            }
        }
    }

    let mut per_model: Vec<Vec<f64>> = Vec::with_capacity(merged.models.len());
    for m in &merged.models {
        let expected = usize::from(merged.intercept) + merged.fixed + m.features.len();
        if m.coefs.len() != expected {
            return Err(Error::Config(format!(
                "model {:?} carries {} coefficients, expected {expected}",
                m.signature,
                m.coefs.len()
            )));
        }
        let mut eta = vec![if merged.intercept { m.coefs[0] } else { 0.0 }; n];
        let mut k = usize::from(merged.intercept);
        for col in fixed_cols {
            for (e, v) in eta.iter_mut().zip(col) {
                *e += m.coefs[k] * v;
            }
            k += 1;
        }
        for f in &m.features {
            let col = &feat_cols[f.as_str()];
            for (e, v) in eta.iter_mut().zip(col) {
                *e += m.coefs[k] * v;
            }
            k += 1;
        }
        per_model.push(eta.into_iter().map(&ilink).collect());
    }

    let mut mean = vec![0.0; n];
    for (m, pred) in merged.models.iter().zip(&per_model) {
        for (s, v) in mean.iter_mut().zip(pred) {
            *s += m.weight * v;
        }
    }
    let quantiles = levels
        .iter()
        .map(|&level| {
            (0..n)
                .map(|i| {
                    let pairs: Vec<(f64, f64)> = merged
                        .models
                        .iter()
                        .zip(&per_model)
                        .map(|(m, pred)| (pred[i], m.weight))
                        .collect();
                    weighted_quantile(&pairs, level)
                })
                .collect()
        })
        .collect();

    Ok(PredictionSet { mean, levels: levels.to_vec(), quantiles })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagStat {
    Median,
    Mean,
    Min,
    Max,
    Var,
}

impl DiagStat {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "median" => Ok(DiagStat::Median),
            "mean" => Ok(DiagStat::Mean),
            "min" => Ok(DiagStat::Min),
            "max" => Ok(DiagStat::Max),
            "var" => Ok(DiagStat::Var),
            other => Err(Error::Config(format!("unknown statistic '{other}'"))),
        }
    }

    fn apply(self, values: &[f64]) -> f64 {
        let n = values.len();
        match self {
            DiagStat::Mean => values.iter().sum::<f64>() / n as f64,
            DiagStat::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
            DiagStat::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            DiagStat::Median => {
                let mut v = values.to_vec();
                v.sort_by(f64::total_cmp);
                if n % 2 == 1 {
                    v[n / 2]
                } else {
                    0.5 * (v[n / 2 - 1] + v[n / 2])
                }
            }
            DiagStat::Var => {
                if n < 2 {
                    return 0.0;
                }
                let mean = values.iter().sum::<f64>() / n as f64;
                values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagPoint {
    pub generation: usize,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Per-generation statistic of the runs' best criteria, with ±2·sd bands
/// over a sliding window (truncated at the start of the series).
pub fn diagnostics_series(runs: &[GmjResult], stat: DiagStat, window: usize) -> Vec<DiagPoint> {
    let max_gens = runs.iter().map(|r| r.best_crit.len()).max().unwrap_or(0);
    let series: Vec<f64> = (0..max_gens)
        .map(|t| {
            let pooled: Vec<f64> =
                runs.iter().filter_map(|r| r.best_crit.get(t).copied()).collect();
            stat.apply(&pooled)
        })
        .collect();

    let w = window.max(1);
    series
        .iter()
        .enumerate()
        .map(|(t, &value)| {
            let start = (t + 1).saturating_sub(w);
            let win = &series[start..=t];
            let sd = if win.len() < 2 {
                0.0
            } else {
                let m = win.iter().sum::<f64>() / win.len() as f64;
                (win.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (win.len() - 1) as f64).sqrt()
            };
            DiagPoint { generation: t, value, lower: value - 2.0 * sd, upper: value + 2.0 * sd }
        })
        .collect()
}
