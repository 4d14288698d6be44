//! Simulation studies: condition numbers of the random Gram matrix,
//! regression and classification accuracy on a synthetic bivariate target,
//! empirical convergence rates and the `L²`-risk bound.
//!
//! Every study is a pure function of its configuration and seed. Trial `t`
//! draws everything from `trial_seed(seed, t)`; trials run in parallel and
//! are collected in trial order.

use std::io::Write;
use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::beta_sampling::{
    add_noise, sample_design, stream_rng, trial_seed, Design, SampleSet, SamplerConfig, SPLIT_STREAM,
};
use crate::csv_io::fmt_f64;
use crate::error::{Error, Result};
use crate::estimator::{fit, FittedModel, TruncationBound};
use crate::gram::{build_design, build_gram, condition_number, lambda_min_failure_bound, EIGEN_REL_TOL};
use crate::jacobi_poly::{eta, weight_mass, JacobiParams};
use crate::quadrature::{tensor_integrate, QuadratureRule};
use crate::tensor_basis::BasisSpec;

/// Fraction of the data used for training in the hold-out studies.
pub const TRAIN_FRACTION: f64 = 0.8;

/// Decision threshold on `f̂` for the classification study.
pub const CLASS_THRESHOLD: f64 = 0.5;

/// `1 + 2u - 4v + 3v² - 2uv + 3uv² - v³ + u⁴ + 2u⁵ + sin(2πu) - cos(3πv)`.
pub fn example2_f(u: f64, v: f64) -> f64 {
    use std::f64::consts::PI;
    1.0 + 2.0 * u - 4.0 * v + 3.0 * v * v - 2.0 * u * v + 3.0 * u * v * v - v.powi(3)
        + u.powi(4)
        + 2.0 * u.powi(5)
        + (2.0 * PI * u).sin()
        - (3.0 * PI * v).cos()
}

/// `(∂f/∂u, ∂f/∂v)` of [`example2_f`].
pub fn example2_gradient(u: f64, v: f64) -> (f64, f64) {
    use std::f64::consts::PI;
    let du = 2.0 - 2.0 * v + 3.0 * v * v + 4.0 * u.powi(3) + 10.0 * u.powi(4)
        + 2.0 * PI * (2.0 * PI * u).cos();
    let dv = -4.0 + 6.0 * v - 2.0 * u + 6.0 * u * v - 3.0 * v * v + 3.0 * PI * (3.0 * PI * v).sin();
    (du, dv)
}

fn example2(x: &[f64]) -> f64 {
    example2_f(x[0], x[1])
}

/// Mean and sample standard deviation.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn mse(pred: &[f64], truth: &[f64]) -> f64 {
    pred.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / pred.len() as f64
}

pub fn mae(pred: &[f64], truth: &[f64]) -> f64 {
    pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum::<f64>() / pred.len() as f64
}

/// `1 - SSE/SST`.
pub fn r_squared(pred: &[f64], truth: &[f64]) -> f64 {
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let sst: f64 = truth.iter().map(|t| (t - mean).powi(2)).sum();
    let sse: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum();
    1.0 - sse / sst
}

/// Metrics of one fitted trial. Errors are against the observed (noisy)
/// responses; `mse_clean` compares with the noise-free target instead.
#[derive(Debug, Clone, Serialize)]
pub struct TrialReport {
    pub alpha: f64,
    pub degree: usize,
    pub d: usize,
    pub n: usize,
    pub sigma: f64,
    pub seed: u64,
    pub kappa2: f64,
    pub mse: f64,
    pub mse_clean: f64,
    pub mae: f64,
    pub r2: f64,
    pub wall_time_ms: u64,
}

/// Precision, recall and F1 for one class.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassReport {
    pub seed: u64,
    pub n_test: usize,
    /// `confusion[actual][predicted]`.
    pub confusion: [[usize; 2]; 2],
    pub ccr: f64,
    pub classes: [ClassMetrics; 2],
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ClassReport {
    pub fn from_labels(seed: u64, actual: &[bool], predicted: &[bool]) -> Self {
        let mut confusion = [[0usize; 2]; 2];
        for (&a, &p) in actual.iter().zip(predicted) {
            confusion[a as usize][p as usize] += 1;
        }
        let total = actual.len();
        let classes = [0, 1].map(|c| {
            let tp = confusion[c][c];
            let predicted_c = confusion[0][c] + confusion[1][c];
            let actual_c = confusion[c][0] + confusion[c][1];
            let precision = ratio(tp, predicted_c);
            let recall = ratio(tp, actual_c);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassMetrics {
                precision,
                recall,
                f1,
            }
        });
        Self {
            seed,
            n_test: total,
            confusion,
            ccr: ratio(confusion[0][0] + confusion[1][1], total),
            classes,
        }
    }
}

/// One configuration of the bivariate regression studies.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegressionConfig {
    pub alpha: f64,
    pub degree: usize,
    pub sigma: f64,
    /// `n_1` for a grid design (`n = n_1²`), `n` for i.i.d.
    pub size: usize,
    pub design: Design,
}

impl RegressionConfig {
    /// `α = -1/2` on an `n_1 × n_1` grid design.
    pub fn grid(degree: usize, sigma: f64, n1: usize) -> Self {
        Self {
            alpha: -0.5,
            degree,
            sigma,
            size: n1,
            design: Design::Grid,
        }
    }

    fn spec(&self) -> Result<BasisSpec> {
        BasisSpec::new(2, self.degree, self.alpha)
    }

    fn draw(&self, seed: u64) -> Result<SampleSet> {
        sample_design(&SamplerConfig::new(self.alpha, 2, seed)?, self.design, self.size)
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::invalid("number of trials must be >= 1"));
    }
    Ok(())
}

fn elapsed_ms(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

/// `κ₂(G)` of the Gram matrix built from `design`.
pub fn gram_kappa(spec: &BasisSpec, design: &SampleSet) -> Result<f64> {
    let f = build_design(spec, design)?;
    Ok(condition_number(&build_gram(&f), EIGEN_REL_TOL)?.kappa2)
}

/// Mean condition number for one `(α, N, n_1)` cell.
#[derive(Debug, Clone, Serialize)]
pub struct KappaRow {
    pub alpha: f64,
    pub degree: usize,
    pub size: usize,
    pub n: usize,
    pub trials: usize,
    pub mean_kappa2: f64,
    pub sd_kappa2: f64,
}

/// `κ₂(G)` at `d = 2` over `trials` seeded designs for every combination of
/// `alphas × degrees × sizes`. Rows come out in that nesting order.
///
/// Trial `t` uses the same seed in every cell, so grid designs of increasing
/// `n_1` share their first rows and columns.
pub fn table1_experiment(
    alphas: &[f64],
    degrees: &[usize],
    sizes: &[usize],
    trials: usize,
    seed: u64,
    design: Design,
) -> Result<Vec<KappaRow>> {
    check_trials(trials)?;
    let mut rows = Vec::new();
    for &alpha in alphas {
        JacobiParams::new(alpha)?;
        for &degree in degrees {
            let spec = BasisSpec::new(2, degree, alpha)?;
            for &size in sizes {
                let kappas = (0..trials as u64)
                    .into_par_iter()
                    .map(|t| {
                        let cfg = SamplerConfig::new(alpha, 2, trial_seed(seed, t))?;
                        gram_kappa(&spec, &sample_design(&cfg, design, size)?)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let (mean_kappa2, sd_kappa2) = mean_sd(&kappas);
                let n = match design {
                    Design::Grid => size * size,
                    Design::Iid => size,
                };
                rows.push(KappaRow {
                    alpha,
                    degree,
                    size,
                    n,
                    trials,
                    mean_kappa2,
                    sd_kappa2,
                });
            }
        }
    }
    Ok(rows)
}

fn fit_report(
    cfg: &RegressionConfig,
    seed: u64,
    train: &SampleSet,
    eval: &SampleSet,
    clean_eval: &[f64],
    start: Instant,
) -> Result<(FittedModel, TrialReport)> {
    let spec = cfg.spec()?;
    let model = fit(&spec, train)?;
    let pred = model.predict_many(eval)?;
    let y = eval.y().expect("evaluation responses");
    let report = TrialReport {
        alpha: cfg.alpha,
        degree: cfg.degree,
        d: 2,
        n: train.n(),
        sigma: cfg.sigma,
        seed,
        kappa2: model.kappa2().unwrap_or(f64::NAN),
        mse: mse(&pred, y),
        mse_clean: mse(&pred, clean_eval),
        mae: mae(&pred, y),
        r2: r_squared(&pred, y),
        wall_time_ms: elapsed_ms(start),
    };
    Ok((model, report))
}

/// Fit on noisy samples of the bivariate target; metrics at the training
/// points.
pub fn table2_trial(cfg: &RegressionConfig, seed: u64) -> Result<TrialReport> {
    let start = Instant::now();
    let x = cfg.draw(seed)?;
    let clean = x.map_points(example2);
    let y = add_noise(&clean, cfg.sigma, seed)?;
    let data = x.with_y(y)?;
    fit_report(cfg, seed, &data, &data, &clean, start).map(|r| r.1)
}

pub fn table2_experiment(cfg: &RegressionConfig, trials: usize, seed: u64) -> Result<Vec<TrialReport>> {
    check_trials(trials)?;
    (0..trials as u64)
        .into_par_iter()
        .map(|t| table2_trial(cfg, trial_seed(seed, t)))
        .collect()
}

/// Random train/test index split drawn from the split stream.
pub fn split_indices(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut stream_rng(seed, SPLIT_STREAM));
    let n_train = (train_fraction * n as f64).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::invalid(format!("cannot split {n} samples at {train_fraction}")));
    }
    let test = idx.split_off(n_train);
    Ok((idx, test))
}

/// Fit on a random `split` share of the data, metrics on the rest.
pub fn holdout_experiment(cfg: &RegressionConfig, split: f64, seed: u64) -> Result<TrialReport> {
    let start = Instant::now();
    let x = cfg.draw(seed)?;
    let clean = x.map_points(example2);
    let y = add_noise(&clean, cfg.sigma, seed)?;
    let data = x.with_y(y)?;
    let (train_idx, test_idx) = split_indices(data.n(), split, seed)?;
    let train = data.select(&train_idx);
    let test = data.select(&test_idx);
    let clean_test: Vec<f64> = test_idx.iter().map(|&i| clean[i]).collect();
    fit_report(cfg, seed, &train, &test, &clean_test, start).map(|r| r.1)
}

pub fn holdout_trials(cfg: &RegressionConfig, split: f64, trials: usize, seed: u64) -> Result<Vec<TrialReport>> {
    check_trials(trials)?;
    (0..trials as u64)
        .into_par_iter()
        .map(|t| holdout_experiment(cfg, split, trial_seed(seed, t)))
        .collect()
}

/// Labels `f(X_i) > c` with `c` the mean of the clean values; the regression
/// targets are the labels plus noise. Classifies the held-out share with
/// `f̂ > 0.5`.
pub fn classification_experiment(cfg: &RegressionConfig, split: f64, seed: u64) -> Result<ClassReport> {
    let x = cfg.draw(seed)?;
    let clean = x.map_points(example2);
    let c = clean.iter().sum::<f64>() / clean.len() as f64;
    let labels: Vec<bool> = clean.iter().map(|&v| v > c).collect();
    let targets: Vec<f64> = labels.iter().map(|&l| f64::from(u8::from(l))).collect();
    let y = add_noise(&targets, cfg.sigma, seed)?;
    let data = x.with_y(y)?;
    let (train_idx, test_idx) = split_indices(data.n(), split, seed)?;
    let model = fit(&cfg.spec()?, &data.select(&train_idx))?;
    let test = data.select(&test_idx);
    let predicted: Vec<bool> = model
        .predict_many(&test)?
        .into_iter()
        .map(|v| v > CLASS_THRESHOLD)
        .collect();
    let actual: Vec<bool> = test_idx.iter().map(|&i| labels[i]).collect();
    Ok(ClassReport::from_labels(seed, &actual, &predicted))
}

pub fn classification_trials(cfg: &RegressionConfig, split: f64, trials: usize, seed: u64) -> Result<Vec<ClassReport>> {
    check_trials(trials)?;
    (0..trials as u64)
        .into_par_iter()
        .map(|t| classification_experiment(cfg, split, trial_seed(seed, t)))
        .collect()
}

/// A `(N, n)` pair of a rate schedule.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RatePoint {
    pub degree: usize,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateFit {
    /// `(N, n, mean MSE)` per schedule point.
    pub points: Vec<(usize, usize, f64)>,
    /// Least-squares slope of `log MSE` against `log n`.
    pub slope: f64,
    pub intercept: f64,
}

/// Ordinary least-squares line `y = a + b x`; returns `(b, a)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let b = sxy / sxx;
    (b, my - b * mx)
}

/// Mean squared error against the clean target at i.i.d. training points,
/// averaged over `trials`, for each schedule point; then the log-log slope.
pub fn rate_fit<F>(
    alpha: f64,
    d: usize,
    schedule: &[RatePoint],
    f: &F,
    sigma: f64,
    trials: usize,
    seed: u64,
) -> Result<RateFit>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if schedule.len() < 3 {
        return Err(Error::invalid("a rate fit needs at least 3 schedule points"));
    }
    check_trials(trials)?;
    let mut points = Vec::with_capacity(schedule.len());
    for p in schedule {
        let spec = BasisSpec::new(d, p.degree, alpha)?;
        let errs = (0..trials as u64)
            .into_par_iter()
            .map(|t| {
                let s = trial_seed(seed, t);
                let x = sample_design(&SamplerConfig::new(alpha, d, s)?, Design::Iid, p.n)?;
                let clean = x.map_points(f);
                let y = add_noise(&clean, sigma, s)?;
                let model = fit(&spec, &x.clone().with_y(y)?)?;
                Ok(mse(&model.predict_many(&x)?, &clean))
            })
            .collect::<Result<Vec<_>>>()?;
        points.push((p.degree, p.n, mean_sd(&errs).0));
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.1 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.2.ln()).collect();
    let (slope, intercept) = linear_fit(&xs, &ys);
    Ok(RateFit {
        points,
        slope,
        intercept,
    })
}

/// Inputs of the expected `L²`-risk bound for the truncated estimator.
#[derive(Debug, Clone, Copy)]
pub struct L2RiskInputs {
    pub degree: usize,
    pub d: usize,
    pub n: usize,
    pub alpha: f64,
    pub sigma: f64,
    pub delta: f64,
    /// `‖f - π_N f‖_α`.
    pub proj_error: f64,
    /// `M_f ≥ ‖f‖_∞`.
    pub m_f: f64,
}

/// `(N+1)^d/(n(1-δ)²) (σ² + (η_α²(N+1)^{2α+1})^d ‖f-π_N f‖²) + ‖f-π_N f‖²
///  + 4 M_f² (N+1)^d β(α+1,α+1)^d exp(-nδ² / (2 (B_α (N+1)^{2α+2})^d))`.
pub fn l2risk_bound(inputs: L2RiskInputs) -> Result<f64> {
    let L2RiskInputs {
        degree,
        d,
        n,
        alpha,
        sigma,
        delta,
        proj_error,
        m_f,
    } = inputs;
    if n == 0 {
        return Err(Error::invalid("sample size n must be >= 1"));
    }
    // Validates α, d, N and δ ∈ (0, 1).
    let tail = lambda_min_failure_bound(alpha, degree, d, n, delta)?;
    let dim = ((degree + 1) as f64).powi(d as i32);
    let e = eta(alpha);
    let amplification = (e * e * ((degree + 1) as f64).powf(2.0 * alpha + 1.0)).powi(d as i32);
    let p2 = proj_error * proj_error;
    Ok(dim / (n as f64 * (1.0 - delta).powi(2)) * (sigma * sigma + amplification * p2)
        + p2
        + 4.0 * m_f * m_f * weight_mass(alpha).powi(d as i32) * tail)
}

/// `‖f - F̂_N‖²_α` by tensor quadrature, where `F̂_N` is `model` truncated at `bound`.
pub fn truncated_l2_error<F>(
    model: &FittedModel,
    f: &F,
    bound: TruncationBound,
    rule: &QuadratureRule,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let d = model.spec().d();
    tensor_integrate(
        |x| {
            let v = model.predict_truncated(x, bound).expect("quadrature nodes are interior");
            (f(x) - v).powi(2)
        },
        rule,
        d,
    )
}

/// `max |f|` over a uniform `res × res` grid of `[0,1]²`, inflated by 1%.
pub fn grid_sup_bound<F: Fn(&[f64]) -> f64>(f: &F, res: usize) -> f64 {
    let step = 1.0 / (res - 1) as f64;
    let mut m: f64 = 0.0;
    for i in 0..res {
        for j in 0..res {
            m = m.max(f(&[i as f64 * step, j as f64 * step]).abs());
        }
    }
    1.01 * m
}

/// The four reproduction studies written by the `bench` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchTable {
    Table1,
    Table2,
    Table3,
    Table4,
}

impl std::str::FromStr for BenchTable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table1" => Ok(Self::Table1),
            "table2" => Ok(Self::Table2),
            "table3" => Ok(Self::Table3),
            "table4" => Ok(Self::Table4),
            other => Err(Error::invalid(format!("unknown table '{other}'"))),
        }
    }
}

impl BenchTable {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Table1 => "table1",
            Self::Table2 => "table2",
            Self::Table3 => "table3",
            Self::Table4 => "table4",
        }
    }
}

pub const BENCH_DEGREES: [usize; 2] = [5, 10];
pub const BENCH_SIGMAS: [f64; 2] = [0.05, 0.15];
pub const BENCH_SIZES: [usize; 3] = [60, 80, 100];
pub const BENCH_ALPHAS: [f64; 2] = [-0.5, 0.0];

/// Runs one reproduction study and writes its CSV. Wall-clock times are
/// left out so that reruns produce identical files.
pub fn write_bench_table<W: Write>(table: BenchTable, trials: usize, seed: u64, mut w: W) -> Result<()> {
    let g = |v: f64| fmt_f64(v);
    match table {
        BenchTable::Table1 => {
            writeln!(w, "alpha,N,n1,n,trials,mean_kappa2,sd_kappa2")?;
            let rows = table1_experiment(&BENCH_ALPHAS, &BENCH_DEGREES, &BENCH_SIZES, trials, seed, Design::Grid)?;
            for r in rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    r.alpha, r.degree, r.size, r.n, r.trials, g(r.mean_kappa2), g(r.sd_kappa2)
                )?;
            }
        }
        BenchTable::Table2 => {
            writeln!(w, "alpha,N,sigma,n1,n,trials,mean_mse,sd_mse,mean_mse_clean,mean_kappa2")?;
            for degree in BENCH_DEGREES.iter().rev() {
                for sigma in BENCH_SIGMAS {
                    for n1 in BENCH_SIZES {
                        let cfg = RegressionConfig::grid(*degree, sigma, n1);
                        let reps = table2_experiment(&cfg, trials, seed)?;
                        let col = |f: fn(&TrialReport) -> f64| reps.iter().map(f).collect::<Vec<_>>();
                        let (m, sd) = mean_sd(&col(|r| r.mse));
                        writeln!(
                            w,
                            "{},{},{},{},{},{},{},{},{},{}",
                            cfg.alpha,
                            degree,
                            sigma,
                            n1,
                            n1 * n1,
                            trials,
                            g(m),
                            g(sd),
                            g(mean_sd(&col(|r| r.mse_clean)).0),
                            g(mean_sd(&col(|r| r.kappa2)).0)
                        )?;
                    }
                }
            }
        }
        BenchTable::Table3 => {
            writeln!(w, "alpha,N,sigma,n1,n_train,trials,mse,r2,mae,mse_clean")?;
            for sigma in BENCH_SIGMAS {
                for degree in BENCH_DEGREES {
                    for n1 in BENCH_SIZES {
                        let cfg = RegressionConfig::grid(degree, sigma, n1);
                        let reps = holdout_trials(&cfg, TRAIN_FRACTION, trials, seed)?;
                        let avg = |f: fn(&TrialReport) -> f64| mean_sd(&reps.iter().map(f).collect::<Vec<_>>()).0;
                        writeln!(
                            w,
                            "{},{},{},{},{},{},{},{},{},{}",
                            cfg.alpha,
                            degree,
                            sigma,
                            n1,
                            reps[0].n,
                            trials,
                            g(avg(|r| r.mse)),
                            g(avg(|r| r.r2)),
                            g(avg(|r| r.mae)),
                            g(avg(|r| r.mse_clean))
                        )?;
                    }
                }
            }
        }
        BenchTable::Table4 => {
            writeln!(
                w,
                "alpha,N,sigma,n1,n_test,trials,ccr,precision0,recall0,f1_0,precision1,recall1,f1_1"
            )?;
            for sigma in BENCH_SIGMAS {
                for degree in BENCH_DEGREES {
                    for n1 in BENCH_SIZES {
                        let cfg = RegressionConfig::grid(degree, sigma, n1);
                        let reps = classification_trials(&cfg, TRAIN_FRACTION, trials, seed)?;
                        let avg = |f: &dyn Fn(&ClassReport) -> f64| {
                            mean_sd(&reps.iter().map(f).collect::<Vec<_>>()).0
                        };
                        write!(
                            w,
                            "{},{},{},{},{},{},{}",
                            cfg.alpha,
                            degree,
                            sigma,
                            n1,
                            reps[0].n_test,
                            trials,
                            g(avg(&|r| r.ccr))
                        )?;
                        for c in 0..2 {
                            write!(
                                w,
                                ",{},{},{}",
                                g(avg(&|r| r.classes[c].precision)),
                                g(avg(&|r| r.classes[c].recall)),
                                g(avg(&|r| r.classes[c].f1))
                            )?;
                        }
                        writeln!(w)?;
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{gauss_jacobi, project};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn example2_values() {
        assert_relative_eq!(example2_f(0.0, 0.0), 0.0, epsilon = 1e-15);
        assert_relative_eq!(example2_f(1.0, 0.0), 5.0, epsilon = 1e-14);
        // 1+2-4+3-2+3-1+1+2+0-cos(3π) = 5 + 1
        assert_relative_eq!(example2_f(1.0, 1.0), 6.0, epsilon = 1e-14);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = 1e-6;
        for _ in 0..100 {
            let u = rng.random_range(0.01..0.99);
            let v = rng.random_range(0.01..0.99);
            let (du, dv) = example2_gradient(u, v);
            let fu = (example2_f(u + h, v) - example2_f(u - h, v)) / (2.0 * h);
            let fv = (example2_f(u, v + h) - example2_f(u, v - h)) / (2.0 * h);
            assert!((du - fu).abs() < 1e-6 * du.abs().max(1.0));
            assert!((dv - fv).abs() < 1e-6 * dv.abs().max(1.0));
        }
    }

    #[test]
    fn metric_identities() {
        let truth = [1.0, 2.0, 3.0, 4.0];
        let pred = [1.5, 2.0, 2.0, 4.0];
        assert_relative_eq!(mse(&pred, &truth), 1.25 / 4.0);
        assert_relative_eq!(mae(&pred, &truth), 1.5 / 4.0);
        assert_relative_eq!(r_squared(&pred, &truth), 1.0 - 1.25 / 5.0);
        assert_eq!(r_squared(&truth, &truth), 1.0);
    }

    #[test]
    fn class_report_identities() {
        let actual = [true, true, false, false, true, false];
        let predicted = [true, false, false, true, true, false];
        let r = ClassReport::from_labels(0, &actual, &predicted);
        assert_eq!(r.confusion, [[2, 1], [1, 2]]);
        assert_relative_eq!(r.ccr, 4.0 / 6.0);
        for c in r.classes {
            assert_relative_eq!(c.f1, 2.0 * c.precision * c.recall / (c.precision + c.recall));
            assert!((0.0..=1.0).contains(&c.precision));
        }
        let perfect = ClassReport::from_labels(0, &actual, &actual);
        assert_eq!(perfect.ccr, 1.0);
    }

    #[test]
    fn split_is_a_partition() {
        let (train, test) = split_indices(100, 0.8, 5).unwrap();
        assert_eq!((train.len(), test.len()), (80, 20));
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert!(split_indices(100, 1.0, 5).is_err());
    }

    #[test]
    fn kappa_table_is_deterministic_and_shaped() {
        let a = table1_experiment(&[-0.5], &[3], &[20, 30], 3, 7, Design::Grid).unwrap();
        let b = table1_experiment(&[-0.5], &[3], &[20, 30], 3, 7, Design::Grid).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a[1].n, 900);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.mean_kappa2, y.mean_kappa2);
            assert!(x.mean_kappa2 >= 1.0);
        }
    }

    #[test]
    fn noiseless_fit_is_accurate() {
        let cfg = RegressionConfig::grid(10, 0.0, 40);
        let r = table2_trial(&cfg, 1).unwrap();
        assert!(r.mse < 1e-4, "mse {}", r.mse);
        assert_eq!(r.mse, r.mse_clean);
        assert!(r.r2 > 0.9999 && r.r2 <= 1.0);
    }

    #[test]
    fn noiseless_classification_is_perfect_away_from_threshold() {
        let cfg = RegressionConfig::grid(10, 0.0, 40);
        let r = classification_experiment(&cfg, 0.8, 3).unwrap();
        assert!(r.ccr > 0.95, "ccr {}", r.ccr);
    }

    #[test]
    fn risk_bound_shape() {
        let base = L2RiskInputs {
            degree: 5,
            d: 2,
            n: 3600,
            alpha: -0.5,
            sigma: 0.05,
            delta: 0.5,
            proj_error: 0.01,
            m_f: 7.0,
        };
        let b = l2risk_bound(base).unwrap();
        assert!(l2risk_bound(L2RiskInputs { n: 7200, ..base }).unwrap() < b);
        let ideal = L2RiskInputs {
            sigma: 0.0,
            proj_error: 0.0,
            n: 100_000_000,
            ..base
        };
        assert!(l2risk_bound(ideal).unwrap() < 1e-12);
        assert!(l2risk_bound(L2RiskInputs { delta: 1.0, ..base }).is_err());
    }

    #[test]
    fn truncated_error_of_projection_matches_quadrature() {
        let spec = BasisSpec::new(2, 4, -0.5).unwrap();
        let rule = gauss_jacobi(-0.5, 24).unwrap();
        let p = project(&example2, &spec, &rule).unwrap();
        let model = FittedModel::from_coeffs(spec, p.coeffs.clone()).unwrap();
        let big = TruncationBound::new(1e6).unwrap();
        let e = truncated_l2_error(&model, &example2, big, &rule).unwrap();
        assert_relative_eq!(e.sqrt(), p.proj_error_l2, max_relative = 1e-8);
    }

    #[test]
    fn rate_fit_needs_three_points() {
        let s = [RatePoint { degree: 2, n: 100 }, RatePoint { degree: 2, n: 200 }];
        assert!(rate_fit(-0.5, 1, &s, &|_: &[f64]| 0.0, 0.1, 2, 0).is_err());
    }

    #[test]
    fn pure_noise_rate_is_minus_one() {
        let schedule: Vec<RatePoint> = [200, 400, 800, 1600, 3200]
            .iter()
            .map(|&n| RatePoint { degree: 4, n })
            .collect();
        let r = rate_fit(-0.5, 1, &schedule, &|_: &[f64]| 0.0, 0.2, 40, 11).unwrap();
        assert!((r.slope + 1.0).abs() < 0.15, "slope {}", r.slope);
    }

    #[test]
    fn bench_output_is_reproducible() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_bench_table(BenchTable::Table1, 1, 4, &mut a).unwrap();
        write_bench_table(BenchTable::Table1, 1, 4, &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert_eq!(text.lines().count(), 13);
    }
}
