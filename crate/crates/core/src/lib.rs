//! Bayesian model selection and averaging over generalized nonlinear models.
//!
//! The library fits ensembles of GLMs whose design columns are nonlinear
//! features built from the original covariates (transformations, interactions
//! and projections), explores the joint space of features and models with a
//! mode-jumping MCMC inside a genetic population loop, and aggregates the
//! visited models into renormalized posterior quantities: marginal inclusion
//! probabilities, model-averaged predictions and convergence diagnostics.

pub mod bits;
pub mod error;
pub mod evaluator;
pub mod feature;
pub mod glm;
pub mod gmjmcmc;
pub mod linalg;
pub mod mjmcmc;
pub mod parallel;
pub mod priors;
pub mod quadrature;
pub mod results;
pub mod rng;
pub mod simulate;
pub mod transforms;

pub use bits::ModelKey;
pub use error::{Error, Result};
pub use evaluator::{CustomEvaluator, Evaluator, EvaluatorParams};
pub use feature::{FeatParams, Feature, GenWeights};
pub use glm::Family;
pub use gmjmcmc::{run_gmjmcmc, GmjProblem, GmjResult, GmjmcmcConfig, ProbsGmj};
pub use mjmcmc::{run_mjmcmc, MjmcmcConfig, MjmcmcResult, ParamsMj, ProbsMj};
pub use parallel::{execute, execute_serial, ExecOutcome, RunPlan};
pub use priors::{BetaPrior, ModelPrior};
pub use results::{
    best_model, diagnostics_series, merge_runs, mpm_model, predict_bma, summarize, DiagStat,
    MergedResult, PopSelector, PredictionSet, Summary,
};
pub use simulate::{simulate, Scenario, SimData};
pub use transforms::TransformRegistry;
