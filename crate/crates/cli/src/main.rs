//! Command-line front end: fit, predict, summarize, diagnose, simulate.

mod config;
mod dataset;
mod report;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};

use bgnlm::{
    diagnostics_series, execute, merge_runs, predict_bma, summarize, DiagStat, Evaluator,
    EvaluatorParams, GmjProblem, PopSelector, Scenario, Summary,
};
use config::{ArchiveDoc, FlagOverrides, RunConfig};
use dataset::{RawTable, SplitSpec};

#[derive(Parser)]
#[command(
    name = "bgnlm",
    version,
    about = "Bayesian model selection and averaging over generalized nonlinear models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model-averaging run and write a reusable archive
    Fit(Box<FitArgs>),
    /// Model-averaged predictions on new data from a fit archive
    Predict(PredictArgs),
    /// Re-summarize a fit archive
    Summarize(SummarizeArgs),
    /// Per-generation statistics of the best criterion across runs
    Diagnose(DiagnoseArgs),
    /// Generate a synthetic benchmark dataset
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Training data: delimited text with a header row
    #[arg(long)]
    data: PathBuf,
    /// Response column name
    #[arg(long)]
    response: String,
    /// TOML config; command-line flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// mjmcmc, gmjmcmc, mjmcmc.parallel or gmjmcmc.parallel
    #[arg(long)]
    method: Option<String>,
    /// Number of population generations (genetic methods)
    #[arg(long = "P")]
    p: Option<usize>,
    /// Chain steps per generation
    #[arg(long = "N")]
    n: Option<usize>,
    /// Chain steps for the final generation (defaults to --N)
    #[arg(long = "N-final")]
    n_final: Option<usize>,
    /// Comma-separated transform names, e.g. sigmoid,sin_deg,exp_dbl,troot
    #[arg(long, value_delimiter = ',')]
    transforms: Option<Vec<String>>,
    /// Independent chains (parallel methods)
    #[arg(long)]
    runs: Option<usize>,
    /// Worker threads; never affects results, only scheduling
    #[arg(long)]
    cores: Option<usize>,
    /// gaussian, binomial, poisson or gamma
    #[arg(long)]
    family: Option<String>,
    /// Coefficient prior name, e.g. g-prior, BIC, robust, hyper-g-n
    #[arg(long = "beta-prior")]
    beta_prior: Option<String>,
    /// Model prior name: complexity or logic
    #[arg(long = "model-prior")]
    model_prior: Option<String>,
    /// Include an intercept (the default)
    #[arg(long, overrides_with = "no_intercept")]
    intercept: bool,
    #[arg(long, overrides_with = "intercept")]
    no_intercept: bool,
    /// Leading expanded covariate columns included in every model
    #[arg(long)]
    fixed: Option<usize>,
    /// Subsample fraction for the stochastic criterion
    #[arg(long)]
    sub: Option<f64>,
    /// Progress lines on standard error
    #[arg(long)]
    verbose: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Standardize the response and design columns
    #[arg(long, overrides_with = "no_scale")]
    scale: bool,
    #[arg(long, overrides_with = "scale")]
    no_scale: bool,
    /// Populations feeding the summary: best, last or all
    #[arg(long)]
    pop: Option<String>,
    /// Drop features below this posterior probability from the summary
    #[arg(long)]
    tol: Option<f64>,
    /// Quantile levels for effect summaries
    #[arg(
        long,
        value_delimiter = ',',
        num_args = 0..,
        default_missing_value = "0.5,0.025,0.975"
    )]
    effects: Option<Vec<f64>>,
    /// Held-out rows: `a..b` (1-based inclusive) or a fraction in (0, 1)
    #[arg(long = "test-rows")]
    test_rows: Option<SplitSpec>,
    /// Seed for fractional splits (defaults to --seed)
    #[arg(long = "split-seed")]
    split_seed: Option<u64>,
    /// Archive output path
    #[arg(long, default_value = "bgnlm_archive.json")]
    out: PathBuf,
    /// Held-out prediction output (requires --test-rows)
    #[arg(long = "predict-out")]
    predict_out: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    archive: PathBuf,
    /// New data with the same covariate columns; response optional
    #[arg(long)]
    data: PathBuf,
    /// Quantile levels, strictly increasing
    #[arg(long, value_delimiter = ',', default_value = "0.025,0.975")]
    levels: Vec<f64>,
    /// Output path; standard output when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SummarizeArgs {
    #[arg(long)]
    archive: PathBuf,
    /// best, last or all (defaults to the fit-time choice)
    #[arg(long)]
    pop: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(
        long,
        value_delimiter = ',',
        num_args = 0..,
        default_missing_value = "0.5,0.025,0.975"
    )]
    effects: Option<Vec<f64>>,
    /// text, csv or json
    #[arg(long, default_value = "text")]
    format: String,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(long)]
    archive: PathBuf,
    /// Comma-separated: median, mean, min, max, var
    #[arg(long, value_delimiter = ',', default_value = "median")]
    stats: Vec<String>,
    /// Sliding window for the ±2·sd bands
    #[arg(long, default_value_t = 5)]
    window: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// linear, interaction, logic or kepler-like
    #[arg(long)]
    scenario: String,
    /// Number of rows
    #[arg(long)]
    n: usize,
    /// Covariate count (scenarios with a free dimension)
    #[arg(long)]
    p: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; standard output when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the generating features and noise level to standard error
    #[arg(long)]
    verbose: bool,
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Fit(args) => fit(*args),
        Command::Predict(args) => predict(args),
        Command::Summarize(args) => summarize_archive(args),
        Command::Diagnose(args) => diagnose(args),
        Command::Simulate(args) => simulate(args),
    }
}

fn fit(args: FitArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let flag_pair = |yes: bool, no: bool| {
        if yes {
            Some(true)
        } else if no {
            Some(false)
        } else {
            None
        }
    };
    config.apply(FlagOverrides {
        method: args.method,
        p: args.p,
        n: args.n,
        n_final: args.n_final,
        transforms: args.transforms,
        runs: args.runs,
        cores: args.cores,
        family: args.family,
        beta_prior: args.beta_prior,
        model_prior: args.model_prior,
        intercept: flag_pair(args.intercept, args.no_intercept),
        fixed: args.fixed,
        sub: args.sub,
        verbose: args.verbose,
        seed: args.seed,
        scale: flag_pair(args.scale, args.no_scale),
        pop: args.pop,
        tol: args.tol,
        effects: args.effects,
    });
    config.validate()?;

    let table =
        RawTable::read(&args.data).with_context(|| format!("reading {}", args.data.display()))?;
    let (train_table, test_table) = match args.test_rows {
        Some(spec) => {
            let seed = args.split_seed.unwrap_or(config.seed);
            let (train, test) = dataset::split_rows(table.rows.len(), spec, seed)?;
            (table.subset(&train), Some(table.subset(&test)))
        }
        None => (table, None),
    };
    if args.predict_out.is_some() && test_table.is_none() {
        bail!("--predict-out needs --test-rows");
    }

    let data = dataset::load_dataset(&train_table, &args.response, config.scale)?;
    ensure!(
        config.fixed <= data.labels.len(),
        "--fixed {} exceeds the {} covariate columns",
        config.fixed,
        data.labels.len()
    );
    let fixed_labels = data.labels[..config.fixed].to_vec();
    let labels = data.labels[config.fixed..].to_vec();
    let fixed_cols = data.cols[..config.fixed].to_vec();
    let cols = data.cols[config.fixed..].to_vec();

    let registry = config.registry()?;
    let mut eval_params = EvaluatorParams::new(config.family()?, cols.len());
    eval_params.beta_prior = config.beta_prior()?;
    eval_params.model_prior = config.model_prior()?;
    eval_params.sub = config.sub;
    eval_params.extra = config.extra_params.clone();

    let problem = GmjProblem {
        y: &data.y,
        cols: &cols,
        labels: &labels,
        fixed_cols: &fixed_cols,
        intercept: config.intercept,
        registry: &registry,
        eval_params: &eval_params,
        evaluator: &Evaluator::Builtin,
    };
    let plan = config.run_plan()?;
    let sampler = config.sampler_config()?;
    let outcome = execute(&plan, &problem, &sampler)?;
    if outcome.failed > 0 {
        eprintln!("warning: {} of {} runs failed and were excluded", outcome.failed, plan.runs);
    }

    let doc = ArchiveDoc {
        config: config.archived(),
        schema: data.schema,
        fixed_labels,
        labels,
        n_train: data.y.len(),
        failed: outcome.failed,
        runs: outcome.archives,
    };
    doc.write(&args.out).with_context(|| format!("writing {}", args.out.display()))?;

    let selector = PopSelector::from_name(&config.pop)?;
    let (summary, header) = summarize_doc(&doc, selector, config.tol, config.effects.as_deref())?;
    print!("{}", report::render_summary(&header, &summary));

    if let Some(test) = test_table {
        let out_path =
            args.predict_out.unwrap_or_else(|| PathBuf::from("bgnlm_prediction.csv"));
        let (text, rmse) = predict_table(&doc, &test, &[0.025, 0.975])?;
        fs::write(&out_path, text).with_context(|| format!("writing {}", out_path.display()))?;
        if let Some(rmse) = rmse {
            eprintln!("held-out RMSE: {rmse:.6} over {} rows", test.rows.len());
        }
    }
    Ok(())
}

/// Merge, summarize and build the report header in one place so the fit
/// and summarize subcommands emit byte-identical text.
fn summarize_doc(
    doc: &ArchiveDoc,
    selector: PopSelector,
    tol: f64,
    effects: Option<&[f64]>,
) -> Result<(Summary, report::SummaryHeader)> {
    let merged = merge_runs(&doc.runs, selector)?;
    let summary = summarize(&merged, tol, effects);
    let populations = doc.runs.iter().any(|r| r.best_crit.len() > 1);
    let header = report::summary_header(&doc.runs, selector, &merged, populations);
    Ok((summary, header))
}

fn predict_table(
    doc: &ArchiveDoc,
    table: &RawTable,
    levels: &[f64],
) -> Result<(String, Option<f64>)> {
    let selector = PopSelector::from_name(&doc.config.pop)?;
    let merged = merge_runs(&doc.runs, selector)?;
    let (labels, mut cols) = dataset::apply_schema(table, &doc.schema)?;
    if let Some(scaling) = &doc.schema.scaling {
        dataset::apply_scaling(&mut cols, scaling);
    }
    let k = doc.fixed_labels.len();
    ensure!(
        labels[..k] == doc.fixed_labels[..] && labels[k..] == doc.labels[..],
        "data columns do not match the archive's training columns"
    );
    let fixed_cols = cols[..k].to_vec();
    let covariates: BTreeMap<String, Vec<f64>> =
        labels[k..].iter().cloned().zip(cols[k..].iter().cloned()).collect();

    let registry = doc.config.registry()?;
    let family = doc.config.family()?;
    let mut pred = predict_bma(
        &merged,
        &covariates,
        &fixed_cols,
        &registry,
        |eta| family.ilink(eta),
        levels,
    )?;
    if let Some(s) = &doc.schema.scaling {
        for v in pred.mean.iter_mut() {
            *v = *v * s.y_scale + s.y_mean;
        }
        for q in pred.quantiles.iter_mut() {
            for v in q.iter_mut() {
                *v = *v * s.y_scale + s.y_mean;
            }
        }
    }
    let rmse = dataset::response_column(table, &doc.schema)?.map(|y| {
        (y.iter().zip(&pred.mean).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / y.len() as f64)
            .sqrt()
    });
    Ok((report::render_prediction_csv(&pred), rmse))
}

fn predict(args: PredictArgs) -> Result<()> {
    let doc = ArchiveDoc::read(&args.archive)?;
    let table = RawTable::read(&args.data)?;
    let (text, rmse) = predict_table(&doc, &table, &args.levels)?;
    emit(args.out.as_deref(), &text)?;
    if let Some(rmse) = rmse {
        eprintln!("RMSE: {rmse:.6} over {} rows", table.rows.len());
    }
    Ok(())
}

fn summarize_archive(args: SummarizeArgs) -> Result<()> {
    let doc = ArchiveDoc::read(&args.archive)?;
    let pop = args.pop.as_deref().unwrap_or(&doc.config.pop);
    let selector = PopSelector::from_name(pop)?;
    let tol = args.tol.unwrap_or(doc.config.tol);
    let effects = args.effects.as_deref().or(doc.config.effects.as_deref());
    let (summary, header) = summarize_doc(&doc, selector, tol, effects)?;
    match args.format.as_str() {
        "text" => print!("{}", report::render_summary(&header, &summary)),
        "csv" => print!("{}", report::render_summary_csv(&summary)),
        "json" => println!("{}", serde_json::to_string_pretty(&summary)?),
        other => bail!("unknown format `{other}` (expected text, csv or json)"),
    }
    Ok(())
}

fn diagnose(args: DiagnoseArgs) -> Result<()> {
    let doc = ArchiveDoc::read(&args.archive)?;
    let series = args
        .stats
        .iter()
        .map(|name| {
            let stat = DiagStat::from_name(name)?;
            Ok((stat, diagnostics_series(&doc.runs, stat, args.window)))
        })
        .collect::<bgnlm::Result<Vec<_>>>()?;
    emit(args.out.as_deref(), &report::render_diagnostics_csv(&series))
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let scenario = Scenario::from_name(&args.scenario)?;
    let mut rng = bgnlm::rng::master_rng(args.seed);
    let sim = bgnlm::simulate(scenario, args.n, args.p, &mut rng);

    let mut text = String::from("y");
    for label in &sim.labels {
        text.push(',');
        text.push_str(label);
    }
    text.push('\n');
    // shortest round-trip floats: reloading the file reproduces the data bit
    // for bit
    for i in 0..sim.y.len() {
        text.push_str(&format!("{}", sim.y[i]));
        for col in &sim.cols {
            text.push_str(&format!(",{}", col[i]));
        }
        text.push('\n');
    }
    emit(args.out.as_deref(), &text)?;
    if args.verbose {
        eprintln!("signal: {}", sim.truth.join(" + "));
        eprintln!("noise sd: {}", sim.noise_sd);
    }
    Ok(())
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}
