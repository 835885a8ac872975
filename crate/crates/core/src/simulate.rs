//! Synthetic datasets with known generating truth, used by tests, benches,
//! and the CLI's `simulate` subcommand.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::rng::Rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Y = Σ_{j=1..5} (j/5)·x_j + ε with p i.i.d. standard normal covariates.
    Linear,
    /// Y = 1.2·x1 + 1.5·x2·x3 − x4 + x5 − 1.3·x4·x5 + ε.
    Interaction,
    /// Y = 1 + 1.5·x37 + 3.5·x2x9 + 9·x7x12x20 + 7·x4x10x17x30 + ε over
    /// 50 Bernoulli(1/2) covariates; the products are and-trees on 0/1 data.
    Logic,
    /// Y = (x3²·x5)^(1/3) + ε with 9 positive (log-normal) covariates and a
    /// small noise level, echoing a power-law recovery problem.
    KeplerLike,
}

impl Scenario {
    pub fn from_name(name: &str) -> Result<Scenario> {
        match name {
            "linear" => Ok(Scenario::Linear),
            "interaction" => Ok(Scenario::Interaction),
            "logic" => Ok(Scenario::Logic),
            "kepler-like" => Ok(Scenario::KeplerLike),
            other => Err(Error::Config(format!(
                "unknown scenario `{other}` (expected linear, interaction, logic, kepler-like)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Linear => "linear",
            Scenario::Interaction => "interaction",
            Scenario::Logic => "logic",
            Scenario::KeplerLike => "kepler-like",
        }
    }
}

/// A simulated dataset together with its generating truth.
#[derive(Debug, Clone)]
pub struct SimData {
    pub labels: Vec<String>,
    /// Covariate columns, column-major.
    pub cols: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    /// Noiseless response.
    pub signal: Vec<f64>,
    /// Realized noise, y = signal + noise.
    pub noise: Vec<f64>,
    pub noise_sd: f64,
    /// Rendered generating features (informative; tree shapes of products
    /// are one canonical choice among mathematically equal forms).
    pub truth: Vec<String>,
}

impl SimData {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.cols.len()
    }
}

/// Generate scenario data; `p` overrides the covariate count where the
/// scenario allows it (`Linear` and `Interaction`; others are fixed).
pub fn simulate(scenario: Scenario, n: usize, p: Option<usize>, rng: &mut Rng) -> SimData {
    match scenario {
        Scenario::Linear => linear(n, p.unwrap_or(20), rng),
        Scenario::Interaction => interaction(n, p.unwrap_or(20), rng),
        Scenario::Logic => logic(n, rng),
        Scenario::KeplerLike => kepler_like(n, rng),
    }
}

fn labels(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("x{j}")).collect()
}

fn normal_cols(n: usize, p: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    (0..p).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect()
}

fn assemble(
    labels: Vec<String>,
    cols: Vec<Vec<f64>>,
    signal: Vec<f64>,
    noise_sd: f64,
    truth: Vec<String>,
    rng: &mut Rng,
) -> SimData {
    let noise: Vec<f64> =
        signal.iter().map(|_| noise_sd * rng.sample::<f64, _>(StandardNormal)).collect();
    let y: Vec<f64> = signal.iter().zip(&noise).map(|(s, e)| s + e).collect();
    SimData { labels, cols, y, signal, noise, noise_sd, truth }
}

fn linear(n: usize, p: usize, rng: &mut Rng) -> SimData {
    let p = p.max(5);
    let cols = normal_cols(n, p, rng);
    let signal: Vec<f64> = (0..n)
        .map(|i| (1..=5).map(|j| (j as f64 / 5.0) * cols[j - 1][i]).sum())
        .collect();
    let truth = (1..=5).map(|j| format!("x{j}")).collect();
    assemble(labels(p), cols, signal, 1.0, truth, rng)
}

fn interaction(n: usize, p: usize, rng: &mut Rng) -> SimData {
    let p = p.max(5);
    let cols = normal_cols(n, p, rng);
    let signal: Vec<f64> = (0..n)
        .map(|i| {
            let x = |j: usize| cols[j - 1][i];
            1.2 * x(1) + 1.5 * x(2) * x(3) - x(4) + x(5) - 1.3 * x(4) * x(5)
        })
        .collect();
    let truth =
        vec!["x1".into(), "(x2*x3)".into(), "x4".into(), "x5".into(), "(x4*x5)".into()];
    assemble(labels(p), cols, signal, 1.0, truth, rng)
}

fn logic(n: usize, rng: &mut Rng) -> SimData {
    let p = 50;
    let cols: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| (rng.random::<f64>() < 0.5) as u8 as f64).collect())
        .collect();
    let signal: Vec<f64> = (0..n)
        .map(|i| {
            let x = |j: usize| cols[j - 1][i];
            1.0 + 1.5 * x(37)
                + 3.5 * x(2) * x(9)
                + 9.0 * x(7) * x(12) * x(20)
                + 7.0 * x(4) * x(10) * x(17) * x(30)
        })
        .collect();
    let truth = vec![
        "x37".into(),
        "(x2*x9)".into(),
        "((x12*x7)*x20)".into(),
        "(((x10*x4)*x17)*x30)".into(),
    ];
    assemble(labels(p), cols, signal, 1.0, truth, rng)
}

fn kepler_like(n: usize, rng: &mut Rng) -> SimData {
    let p = 9;
    let cols: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal).exp()).collect())
        .collect();
    let signal: Vec<f64> =
        (0..n).map(|i| (cols[2][i] * cols[2][i] * cols[4][i]).cbrt()).collect();
    let truth = vec!["troot((x3*(x3*x5)))".into()];
    assemble(labels(p), cols, signal, 0.05, truth, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::master_rng;

    #[test]
    fn linear_signal_uses_first_five_covariates() {
        let mut rng = master_rng(1);
        let d = simulate(Scenario::Linear, 50, Some(8), &mut rng);
        assert_eq!(d.p(), 8);
        assert_eq!(d.n(), 50);
        for i in 0..d.n() {
            let expect: f64 = (1..=5).map(|j| (j as f64 / 5.0) * d.cols[j - 1][i]).sum();
            assert!((d.signal[i] - expect).abs() < 1e-12);
            assert!((d.y[i] - d.signal[i] - d.noise[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn interaction_signal_matches_formula() {
        let mut rng = master_rng(2);
        let d = simulate(Scenario::Interaction, 30, None, &mut rng);
        assert_eq!(d.p(), 20);
        for i in 0..d.n() {
            let x = |j: usize| d.cols[j - 1][i];
            let expect = 1.2 * x(1) + 1.5 * x(2) * x(3) - x(4) + x(5) - 1.3 * x(4) * x(5);
            assert!((d.signal[i] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn logic_covariates_are_binary_and_signal_is_shifted_sums() {
        let mut rng = master_rng(3);
        let d = simulate(Scenario::Logic, 200, None, &mut rng);
        assert_eq!(d.p(), 50);
        assert!(d.cols.iter().flatten().all(|&v| v == 0.0 || v == 1.0));
        // signal takes values 1 + subset sums of {1.5, 3.5, 9, 7}
        for &s in &d.signal {
            assert!(s >= 1.0 - 1e-12 && s <= 1.0 + 1.5 + 3.5 + 9.0 + 7.0 + 1e-12);
        }
    }

    #[test]
    fn kepler_like_covariates_positive_and_noise_small() {
        let mut rng = master_rng(4);
        let d = simulate(Scenario::KeplerLike, 100, None, &mut rng);
        assert_eq!(d.p(), 9);
        assert!(d.cols.iter().flatten().all(|&v| v > 0.0));
        assert_eq!(d.noise_sd, 0.05);
        for i in 0..d.n() {
            let expect = (d.cols[2][i].powi(2) * d.cols[4][i]).cbrt();
            assert!((d.signal[i] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn simulation_is_reproducible_per_seed() {
        let a = simulate(Scenario::Linear, 40, None, &mut master_rng(9));
        let b = simulate(Scenario::Linear, 40, None, &mut master_rng(9));
        assert_eq!(a.y, b.y);
        assert_eq!(a.cols, b.cols);
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in
            [Scenario::Linear, Scenario::Interaction, Scenario::Logic, Scenario::KeplerLike]
        {
            assert_eq!(Scenario::from_name(s.name()).unwrap(), s);
        }
        assert!(Scenario::from_name("cubic").is_err());
    }
}
