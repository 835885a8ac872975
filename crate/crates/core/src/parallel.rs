//! Scheduling of independent runs. Every run draws its stream from the
//! master seed and its own index, so archives depend only on (seed, config,
//! data) — never on core count or completion order.

use std::panic::{catch_unwind, AssertUnwindSafe};
#[cfg(any(feature = "parallel", test))]
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmjmcmc::{run_gmjmcmc, GmjProblem, GmjResult, GmjmcmcConfig};
use crate::rng::chain_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunPlan {
    pub runs: usize,
    /// Upper bound on concurrently executing runs.
    pub cores: usize,
    pub master_seed: u64,
    /// Print one line per finished run to standard error.
    #[serde(default)]
    pub verbose: bool,
}

impl RunPlan {
    pub fn new(runs: usize, cores: usize, master_seed: u64) -> Self {
        RunPlan { runs, cores, master_seed, verbose: false }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".to_string()));
        }
        if self.cores == 0 {
            return Err(Error::Config("cores must be at least 1".to_string()));
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct ExecOutcome {
    /// Surviving archives in run-index order.
    pub archives: Vec<GmjResult>,
    /// Runs dropped because they panicked or returned an error.
    pub failed: usize,
    /// Highest number of runs observed in flight.
    pub peak_concurrency: usize,
}

fn one_run(
    plan: &RunPlan,
    problem: &GmjProblem<'_>,
    config: &GmjmcmcConfig,
    index: usize,
) -> Option<GmjResult> {
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        let mut rng = chain_rng(plan.master_seed, index as u64);
        run_gmjmcmc(problem, config, &mut rng)
    }));
    match outcome {
        Ok(Ok(archive)) => {
            if plan.verbose {
                eprintln!(
                    "run {index}: best crit {:.6} in generation {}",
                    archive.best_crit[archive.best_generation],
                    archive.best_generation + 1
                );
            }
            Some(archive)
        }
        Ok(Err(e)) => {
            eprintln!("run {index} failed: {e}");
            None
        }
        Err(_) => {
            eprintln!("run {index} panicked and was skipped");
            None
        }
    }
}

fn collect(results: Vec<Option<GmjResult>>, runs: usize) -> Result<ExecOutcome> {
    let archives: Vec<GmjResult> = results.into_iter().flatten().collect();
    if archives.is_empty() {
        return Err(Error::AllRunsFailed(runs));
    }
    let failed = runs - archives.len();
    Ok(ExecOutcome { archives, failed, peak_concurrency: 0 })
}

/// Run every chain on the calling thread, in index order.
pub fn execute_serial(
    plan: &RunPlan,
    problem: &GmjProblem<'_>,
    config: &GmjmcmcConfig,
) -> Result<ExecOutcome> {
    plan.validate()?;
    config.validate()?;
    let results = (0..plan.runs).map(|i| one_run(plan, problem, config, i)).collect();
    let mut outcome = collect(results, plan.runs)?;
    outcome.peak_concurrency = 1;
    Ok(outcome)
}

/// Run chains on a pool of at most `plan.cores` workers. Without the
/// `parallel` feature this is the sequential scheduler under another name.
#[cfg(feature = "parallel")]
pub fn execute(
    plan: &RunPlan,
    problem: &GmjProblem<'_>,
    config: &GmjmcmcConfig,
) -> Result<ExecOutcome> {
    use rayon::prelude::*;

    plan.validate()?;
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.cores)
        .build()
        .map_err(|e| Error::Config(format!("could not build thread pool: {e}")))?;

    let in_flight = AtomicUsize::new(0);
    let peak = AtomicUsize::new(0);
    let results: Vec<Option<GmjResult>> = pool.install(|| {
        (0..plan.runs)
            .into_par_iter()
            .map(|i| {
                let now = in_flight.fetch_add(1, Ordering::SeqCst) + 1;
                peak.fetch_max(now, Ordering::SeqCst);
                let out = one_run(plan, problem, config, i);
                in_flight.fetch_sub(1, Ordering::SeqCst);
                out
            })
            .collect()
    });
    let mut outcome = collect(results, plan.runs)?;
    outcome.peak_concurrency = peak.load(Ordering::SeqCst);
    Ok(outcome)
}

#[cfg(not(feature = "parallel"))]
pub fn execute(
    plan: &RunPlan,
    problem: &GmjProblem<'_>,
    config: &GmjmcmcConfig,
) -> Result<ExecOutcome> {
    execute_serial(plan, problem, config)
}
