//! Run configuration. A single TOML document with blocks mirroring the
//! sampler's parameter groups (`probs`, `params`, `beta_prior`,
//! `model_prior`, `extra_params`); command-line flags override file values.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use bgnlm::feature::FeatParams;
use bgnlm::mjmcmc::ParamsMj;
use bgnlm::priors::ComplexityMeasure;
use bgnlm::{
    BetaPrior, Error, Family, GmjResult, GmjmcmcConfig, ModelPrior, ProbsGmj, Result, RunPlan,
    TransformRegistry,
};
use serde::{Deserialize, Serialize};

use crate::dataset::DataSchema;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Method {
    /// Population loop with feature generation (vs a single linear chain).
    pub genetic: bool,
    pub parallel: bool,
}

impl Method {
    pub fn parse(name: &str) -> Result<Method> {
        match name {
            "mjmcmc" => Ok(Method { genetic: false, parallel: false }),
            "gmjmcmc" => Ok(Method { genetic: true, parallel: false }),
            "mjmcmc.parallel" => Ok(Method { genetic: false, parallel: true }),
            "gmjmcmc.parallel" => Ok(Method { genetic: true, parallel: true }),
            other => Err(Error::Config(format!(
                "unknown method `{other}` (expected mjmcmc, gmjmcmc, mjmcmc.parallel or gmjmcmc.parallel)"
            ))),
        }
    }
}

pub fn parse_family(name: &str) -> Result<Family> {
    match name {
        "gaussian" => Ok(Family::Gaussian),
        "binomial" => Ok(Family::Binomial),
        "poisson" => Ok(Family::Poisson),
        "gamma" => Ok(Family::Gamma),
        other => Err(Error::Config(format!("unknown family `{other}`"))),
    }
}

/// Coefficient prior selection: a name plus free-form numeric parameters,
/// so `[beta_prior] name = "g-prior", g = 64` reads naturally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorBlock {
    pub name: String,
    #[serde(flatten)]
    pub params: BTreeMap<String, f64>,
}

impl Default for PriorBlock {
    fn default() -> Self {
        PriorBlock { name: "g-prior".into(), params: BTreeMap::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct ModelPriorBlock {
    pub name: Option<String>,
    pub r: Option<f64>,
    pub measure: Option<String>,
    pub p: Option<usize>,
}

/// Chain and feature-generation tuning, grouped as one `params` block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct ParamsBlock {
    pub mj: ParamsMj,
    pub feat: FeatParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub method: String,
    /// Number of population generations (genetic methods only).
    #[serde(rename = "P", skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    /// Chain steps per generation.
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Chain steps for the final generation; defaults to `N`.
    #[serde(rename = "N_final", skip_serializing_if = "Option::is_none")]
    pub n_final: Option<usize>,
    pub transforms: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cores: Option<usize>,
    pub family: String,
    pub intercept: bool,
    /// Leading expanded covariate columns included in every model.
    pub fixed: usize,
    /// Subsample fraction for the stochastic criterion; absent = exact fits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sub: Option<f64>,
    pub seed: u64,
    pub verbose: bool,
    /// Standardize the response and design columns before fitting.
    pub scale: bool,
    /// Which populations feed the report: best, last or all.
    pub pop: String,
    /// Features below this posterior probability are dropped from summaries.
    pub tol: f64,
    /// Quantile levels for coefficient effect summaries.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effects: Option<Vec<f64>>,
    pub probs: ProbsGmj,
    pub params: ParamsBlock,
    pub beta_prior: PriorBlock,
    pub model_prior: ModelPriorBlock,
    pub extra_params: BTreeMap<String, f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            method: "mjmcmc".into(),
            p: None,
            n: None,
            n_final: None,
            transforms: Vec::new(),
            runs: None,
            cores: None,
            family: "gaussian".into(),
            intercept: true,
            fixed: 0,
            sub: None,
            seed: 0,
            verbose: false,
            scale: false,
            pop: "best".into(),
            tol: 1e-4,
            effects: None,
            probs: ProbsGmj::default(),
            params: ParamsBlock::default(),
            beta_prior: PriorBlock::default(),
            model_prior: ModelPriorBlock::default(),
            extra_params: BTreeMap::new(),
        }
    }
}

/// Command-line values to lay over a file config. `None` leaves the file
/// value in place.
#[derive(Debug, Default)]
pub struct FlagOverrides {
    pub method: Option<String>,
    pub p: Option<usize>,
    pub n: Option<usize>,
    pub n_final: Option<usize>,
    pub transforms: Option<Vec<String>>,
    pub runs: Option<usize>,
    pub cores: Option<usize>,
    pub family: Option<String>,
    pub beta_prior: Option<String>,
    pub model_prior: Option<String>,
    pub intercept: Option<bool>,
    pub fixed: Option<usize>,
    pub sub: Option<f64>,
    pub verbose: bool,
    pub seed: Option<u64>,
    pub scale: Option<bool>,
    pub pop: Option<String>,
    pub tol: Option<f64>,
    pub effects: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("bad config: {e}")))
    }

    pub fn apply(&mut self, flags: FlagOverrides) {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = flags.$field { self.$field = v; })*
            };
        }
        set!(method, family, intercept, fixed, seed, scale, pop, tol);
        // Options stay Option-valued in the config
        macro_rules! set_opt {
            ($($field:ident),*) => {
                $(if flags.$field.is_some() { self.$field = flags.$field; })*
            };
        }
        set_opt!(p, n, n_final, runs, cores, sub, effects);
        if let Some(v) = flags.transforms {
            self.transforms = v;
        }
        if let Some(v) = flags.beta_prior {
            self.beta_prior.name = v;
        }
        if let Some(v) = flags.model_prior {
            self.model_prior.name = Some(v);
        }
        if flags.verbose {
            self.verbose = true;
        }
    }

    pub fn method(&self) -> Result<Method> {
        Method::parse(&self.method)
    }

    pub fn family(&self) -> Result<Family> {
        parse_family(&self.family)
    }

    pub fn beta_prior(&self) -> Result<BetaPrior> {
        BetaPrior::from_name(&self.beta_prior.name, &self.beta_prior.params)
    }

    pub fn model_prior(&self) -> Result<ModelPrior> {
        let block = &self.model_prior;
        let measure = match block.measure.as_deref() {
            None => None,
            Some("oc") => Some(ComplexityMeasure::Oc),
            Some("width") => Some(ComplexityMeasure::Width),
            Some(other) => {
                return Err(Error::Config(format!("unknown complexity measure `{other}`")))
            }
        };
        ModelPrior::from_name(block.name.as_deref().unwrap_or("complexity"), block.r, measure, block.p)
    }

    /// The transforms named in the config, as a registry. Linear chains run
    /// with an empty registry.
    pub fn registry(&self) -> Result<TransformRegistry> {
        TransformRegistry::builtin().subset(&self.transforms)
    }

    /// Resolve generations and chain length per method: a linear chain is a
    /// single generation with a longer default run.
    pub fn sampler_config(&self) -> Result<GmjmcmcConfig> {
        let method = self.method()?;
        let mut config = GmjmcmcConfig::default();
        if method.genetic {
            config.generations = self.p.unwrap_or(10);
            config.n_iter = self.n.unwrap_or(100);
        } else {
            config.generations = 1;
            config.n_iter = self.n.unwrap_or(1000);
        }
        config.n_final = self.n_final;
        config.probs = self.probs.clone();
        config.params = self.params.mj.clone();
        config.feat = self.params.feat.clone();
        config.validate()?;
        Ok(config)
    }

    pub fn resolved_runs(&self) -> usize {
        let parallel = self.method.ends_with(".parallel");
        self.runs.unwrap_or(if parallel { 4 } else { 1 })
    }

    pub fn resolved_cores(&self) -> usize {
        let available =
            std::thread::available_parallelism().map(usize::from).unwrap_or(1);
        self.cores.unwrap_or_else(|| available.min(self.resolved_runs()).max(1))
    }

    pub fn run_plan(&self) -> Result<RunPlan> {
        let mut plan = RunPlan::new(self.resolved_runs(), self.resolved_cores(), self.seed);
        plan.verbose = self.verbose;
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        let method = self.method()?;
        let family = self.family()?;
        self.beta_prior()?;
        self.model_prior()?;
        if method.genetic && self.transforms.is_empty() {
            return Err(Error::Config(
                "gmjmcmc searches nonlinear features and needs --transforms (e.g. sigmoid,sin_deg,exp_dbl,troot)".into(),
            ));
        }
        if !method.genetic && self.p.is_some_and(|p| p != 1) {
            return Err(Error::Config(
                "mjmcmc runs a single linear chain; use gmjmcmc for P > 1".into(),
            ));
        }
        if !method.parallel && self.runs.is_some_and(|r| r != 1) {
            return Err(Error::Config(format!(
                "runs > 1 needs the parallel orchestrator; use method {}.parallel",
                self.method
            )));
        }
        if self.sub.is_some_and(|f| f <= 0.0 || !f.is_finite()) {
            return Err(Error::Config("subsample fraction must be positive".into()));
        }
        if self.scale && family != Family::Gaussian {
            return Err(Error::Config(
                "response standardization only makes sense for the gaussian family".into(),
            ));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::Config("tol must be nonnegative".into()));
        }
        if let Some(levels) = &self.effects {
            if levels.is_empty() || levels.iter().any(|l| !(0.0..=1.0).contains(l)) {
                return Err(Error::Config("effect levels must lie in [0, 1]".into()));
            }
        }
        bgnlm::PopSelector::from_name(&self.pop)?;
        self.sampler_config()?;
        Ok(())
    }

    /// The form embedded in archives: execution details that must not
    /// affect archive bytes (worker count, logging) are normalized away.
    pub fn archived(&self) -> RunConfig {
        let mut c = self.clone();
        c.cores = None;
        c.verbose = false;
        c
    }
}

/// Self-describing fit artifact: the resolved configuration, the data
/// schema, and every run's full archive. Everything downstream (summaries,
/// prediction, diagnostics) reloads from this alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveDoc {
    pub config: RunConfig,
    pub schema: DataSchema,
    pub fixed_labels: Vec<String>,
    /// Searched covariate labels (expanded, fixed columns excluded).
    pub labels: Vec<String>,
    pub n_train: usize,
    pub failed: usize,
    pub runs: Vec<GmjResult>,
}

impl ArchiveDoc {
    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn read(path: &Path) -> anyhow::Result<ArchiveDoc> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips_through_toml() {
        let config = RunConfig::default();
        let text = toml::to_string(&config).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn fully_specified_config_round_trips_through_toml() {
        let mut config = RunConfig::default();
        config.method = "gmjmcmc.parallel".into();
        config.p = Some(7);
        config.n = Some(250);
        config.n_final = Some(500);
        config.transforms = vec!["sigmoid".into(), "troot".into()];
        config.runs = Some(8);
        config.cores = Some(2);
        config.family = "binomial".into();
        config.fixed = 2;
        config.sub = Some(0.05);
        config.seed = 99;
        config.scale = true;
        config.effects = Some(vec![0.5, 0.025, 0.975]);
        config.probs.filter = 0.5;
        config.params.feat.pop_max = Some(12);
        config.params.feat.prel_select = Some(vec![0, 3]);
        config.beta_prior =
            PriorBlock { name: "CH".into(), params: [("a".to_string(), 1.0), ("b".to_string(), 2.0)].into() };
        config.model_prior.r = Some(0.01);
        config.extra_params.insert("budget".into(), 3.0);

        let text = toml::to_string(&config).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn flags_override_file_values() {
        let mut config: RunConfig = toml::from_str(
            "method = \"gmjmcmc\"\nN = 400\ntransforms = [\"sigmoid\"]\nseed = 5\n",
        )
        .unwrap();
        config.apply(FlagOverrides {
            n: Some(50),
            seed: Some(9),
            beta_prior: Some("robust".into()),
            ..FlagOverrides::default()
        });
        assert_eq!(config.n, Some(50));
        assert_eq!(config.seed, 9);
        assert_eq!(config.beta_prior.name, "robust");
        assert_eq!(config.method, "gmjmcmc"); // untouched
        assert_eq!(config.transforms, vec!["sigmoid"]);
    }

    #[test]
    fn unknown_top_level_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("transfroms = [\"sigmoid\"]\n").is_err());
    }

    #[test]
    fn genetic_method_requires_transforms() {
        let mut config = RunConfig::default();
        config.method = "gmjmcmc".into();
        assert!(matches!(config.validate(), Err(Error::Config(_))));
        config.transforms = vec!["sigmoid".into()];
        config.validate().unwrap();
    }

    #[test]
    fn linear_method_rejects_populations_and_multiple_runs() {
        let mut config = RunConfig::default();
        config.p = Some(5);
        assert!(config.validate().is_err());
        config.p = None;
        config.runs = Some(3);
        assert!(config.validate().is_err());
        config.method = "mjmcmc.parallel".into();
        config.validate().unwrap();
    }

    #[test]
    fn sampler_config_resolves_method_defaults() {
        let mut config = RunConfig::default();
        let linear = config.sampler_config().unwrap();
        assert_eq!((linear.generations, linear.n_iter), (1, 1000));

        config.method = "gmjmcmc".into();
        config.transforms = vec!["sigmoid".into()];
        let genetic = config.sampler_config().unwrap();
        assert_eq!((genetic.generations, genetic.n_iter), (10, 100));

        config.p = Some(3);
        config.n = Some(42);
        let tuned = config.sampler_config().unwrap();
        assert_eq!((tuned.generations, tuned.n_iter), (3, 42));
    }

    #[test]
    fn named_priors_resolve_with_file_parameters() {
        let mut config = RunConfig::default();
        config.beta_prior =
            PriorBlock { name: "g-prior".into(), params: [("g".to_string(), 64.0)].into() };
        assert_eq!(config.beta_prior().unwrap(), BetaPrior::GPrior { g: Some(64.0) });

        config.beta_prior.name = "TG".into();
        assert!(config.beta_prior().is_err()); // needs a and s
    }

    #[test]
    fn archived_form_drops_execution_details() {
        let mut config = RunConfig::default();
        config.cores = Some(8);
        config.verbose = true;
        config.seed = 3;
        let archived = config.archived();
        assert_eq!(archived.cores, None);
        assert!(!archived.verbose);
        assert_eq!(archived.seed, 3);
    }
}
