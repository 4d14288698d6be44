//! The `jr` command-line interface.
//!
//! Exit codes: 0 on success, 1 for invalid input or usage, 2 when a valid
//! request fails numerically (for example an ill-conditioned Gram matrix).

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::beta_sampling::{add_noise, sample_design, Design, SampleSet, SamplerConfig};
use crate::csv_io::{fmt_f64, read_samples_file, write_atomic, write_samples};
use crate::error::{Error, Result};
use crate::estimator::{fit_with, FitOptions, FittedModel, TruncationBound, DEFAULT_KAPPA_CAP};
use crate::experiments::{example2_f, write_bench_table, BenchTable};
use crate::gram::{build_design, build_gram, condition_number, stability_threshold, EIGEN_REL_TOL};
use crate::quadrature::{gauss_jacobi, project};
use crate::shepard::{affine_to_unit_cube, resample_to_beta, ScatterSet, ShepardConfig, DEFAULT_MU};
use crate::tensor_basis::BasisSpec;

/// `δ` used for the sample-size hint printed after numerical failures.
const HINT_DELTA: f64 = 0.5;

#[derive(Debug, Parser)]
#[command(name = "jr", version, about = "Least-squares regression in tensor Jacobi polynomial bases")]
struct Cli {
    /// Worker threads (default: JR_THREADS, else all cores).
    #[arg(long, global = true, env = "JR_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit coefficients to a CSV of samples (columns x1..xd,y).
    Fit(FitArgs),
    /// Evaluate a saved model at the points of a CSV (columns x1..xd).
    Predict(PredictArgs),
    /// Draw Beta design points and noisy responses of a built-in function.
    Simulate(SimulateArgs),
    /// Condition numbers of random Gram matrices.
    Condnum(CondnumArgs),
    /// Project a built-in function onto the basis by Gauss-Jacobi quadrature.
    Project(ProjectArgs),
    /// Interpolate scattered data onto Beta design points (modified Shepard).
    Resample(ResampleArgs),
    /// Run a reproduction study and write its CSV plus a JSON manifest.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct BasisArgs {
    /// Jacobi weight parameter alpha (>= -0.5).
    #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
    alpha: f64,
    /// Maximum degree N per coordinate.
    #[arg(long)]
    degree: usize,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    basis: BasisArgs,
    /// Expected dimension d; must match the input columns when given.
    #[arg(long)]
    dim: Option<usize>,
    /// Input CSV with header x1,...,xd,y.
    #[arg(long)]
    input: PathBuf,
    /// Output model file.
    #[arg(long)]
    output: PathBuf,
    /// Largest accepted condition number of the Gram matrix.
    #[arg(long, default_value_t = DEFAULT_KAPPA_CAP)]
    kappa_cap: f64,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Model file written by `fit` or `project`.
    #[arg(long)]
    model: PathBuf,
    /// Query CSV with header x1,...,xd (a y column is ignored).
    #[arg(long)]
    input: PathBuf,
    /// Output CSV with header x1,...,xd,y.
    #[arg(long)]
    output: PathBuf,
    /// Clamp predictions to [-M, M].
    #[arg(long, value_name = "M")]
    truncate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Builtin {
    Example2,
    Zero,
    One,
    Sum,
}

impl Builtin {
    fn eval(self, x: &[f64]) -> f64 {
        match self {
            Builtin::Example2 => example2_f(x[0], x[1]),
            Builtin::Zero => 0.0,
            Builtin::One => 1.0,
            Builtin::Sum => x.iter().sum(),
        }
    }

    fn check_dim(self, d: usize) -> Result<()> {
        if self == Builtin::Example2 && d != 2 {
            return Err(Error::invalid(format!("builtin:example2 needs --dim 2, got {d}")));
        }
        Ok(())
    }
}

fn parse_builtin(s: &str) -> std::result::Result<Builtin, String> {
    match s {
        "builtin:example2" => Ok(Builtin::Example2),
        "builtin:zero" => Ok(Builtin::Zero),
        "builtin:one" => Ok(Builtin::One),
        "builtin:sum" => Ok(Builtin::Sum),
        other => Err(format!(
            "unknown function '{other}' (expected builtin:example2, builtin:zero, builtin:one or builtin:sum)"
        )),
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long)]
    dim: usize,
    /// Number of points (iid) or points per axis n1 (grid, n = n1^d).
    #[arg(long)]
    n: usize,
    /// Point layout: iid or grid.
    #[arg(long, default_value = "iid")]
    design: Design,
    /// Target function.
    #[arg(long, default_value = "builtin:example2", value_parser = parse_builtin)]
    function: Builtin,
    /// Standard deviation of the Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV with header x1,...,xd,y.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct CondnumArgs {
    #[command(flatten)]
    basis: BasisArgs,
    #[arg(long)]
    dim: usize,
    /// Number of points (iid) or points per axis n1 (grid).
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "iid")]
    design: Design,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-trial CSV; written to stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProjectArgs {
    #[command(flatten)]
    basis: BasisArgs,
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value = "builtin:example2", value_parser = parse_builtin)]
    function: Builtin,
    /// Gauss-Jacobi nodes per axis (default 2N + 2).
    #[arg(long)]
    quad: Option<usize>,
    /// Coefficient file in the model format.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct ResampleArgs {
    /// Scattered data CSV with header x1,...,xd,y (any bounded domain).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long)]
    dim: usize,
    /// Number of output points (iid) or points per axis (grid).
    #[arg(long)]
    n_out: usize,
    #[arg(long, default_value = "iid")]
    design: Design,
    /// Shepard power mu.
    #[arg(long, default_value_t = DEFAULT_MU)]
    mu: f64,
    /// Radius of influence R in normalized coordinates (default: data driven).
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV in unit-cube coordinates.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Studies to run: table1, table2, table3, table4.
    #[arg(required = true, value_parser = |s: &str| s.parse::<BenchTable>().map_err(|e| e.to_string()))]
    tables: Vec<BenchTable>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be >= 1");
            return 1;
        }
        pool = pool.num_threads(t);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return 1;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Fit(a) => cmd_fit(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Condnum(a) => cmd_condnum(a),
        Command::Project(a) => cmd_project(a),
        Command::Resample(a) => cmd_resample(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable summary"));
}

fn hint(alpha: f64, degree: usize, d: usize) {
    if let Ok(n) = stability_threshold(alpha, degree, d, HINT_DELTA) {
        eprintln!(
            "hint: the stability threshold for alpha = {alpha}, N = {degree}, d = {d} at delta = {HINT_DELTA} is n >= {n}"
        );
    }
}

fn cmd_fit(a: FitArgs) -> Result<()> {
    if !(a.kappa_cap >= 1.0) {
        return Err(Error::invalid("--kappa-cap must be >= 1"));
    }
    let data = read_samples_file(&a.input)?;
    if let Some(d) = a.dim {
        if d != data.d() {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: data.d(),
            });
        }
    }
    let spec = BasisSpec::new(data.d(), a.basis.degree, a.basis.alpha)?;
    let model = fit_with(&spec, &data, FitOptions { kappa_cap: a.kappa_cap }).inspect_err(|e| {
        if e.is_numerical() {
            hint(spec.alpha(), spec.degree(), spec.d());
        }
    })?;
    write_atomic(&a.output, |w| model.save(w))?;
    let s = model.spectrum().expect("fitted model carries its spectrum");
    print_json(&json!({
        "alpha": spec.alpha(),
        "N": spec.degree(),
        "d": spec.d(),
        "n": data.n(),
        "lambda_min": s.lambda_min,
        "lambda_max": s.lambda_max,
        "kappa2": s.kappa2,
    }));
    Ok(())
}

fn load_model(path: &Path) -> Result<FittedModel> {
    FittedModel::load(BufReader::new(File::open(path)?))
}

fn cmd_predict(a: PredictArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let bound = a.truncate.map(TruncationBound::new).transpose()?;
    let points = read_samples_file(&a.input)?;
    let mut pred = model.predict_many(&points)?;
    if let Some(b) = bound {
        pred.iter_mut().for_each(|v| *v = b.clamp(*v));
    }
    let out = SampleSet::new(points.d(), points.coords().to_vec(), Some(pred))?;
    write_atomic(&a.output, |w| write_samples(w, &out))
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    a.function.check_dim(a.dim)?;
    if !(a.sigma >= 0.0) {
        return Err(Error::invalid("--sigma must be >= 0"));
    }
    let cfg = SamplerConfig::new(a.alpha, a.dim, a.seed)?;
    let x = sample_design(&cfg, a.design, a.n)?;
    let clean = x.map_points(|p| a.function.eval(p));
    let y = add_noise(&clean, a.sigma, a.seed)?;
    let data = x.with_y(y)?;
    write_atomic(&a.output, |w| write_samples(w, &data))
}

fn cmd_condnum(a: CondnumArgs) -> Result<()> {
    if a.trials == 0 {
        return Err(Error::invalid("--trials must be >= 1"));
    }
    let spec = BasisSpec::new(a.dim, a.basis.degree, a.basis.alpha)?;
    let mut rows = Vec::with_capacity(a.trials);
    for t in 0..a.trials as u64 {
        let seed = crate::beta_sampling::trial_seed(a.seed, t);
        let x = sample_design(&SamplerConfig::new(spec.alpha(), a.dim, seed)?, a.design, a.n)?;
        let g = build_gram(&build_design(&spec, &x)?);
        rows.push((seed, x.n(), condition_number(&g, EIGEN_REL_TOL)?));
    }
    let body = |w: &mut dyn Write| -> Result<()> {
        writeln!(w, "alpha,N,d,n,seed,lambda_min,lambda_max,kappa2")?;
        for (seed, n, s) in &rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                spec.alpha(),
                spec.degree(),
                spec.d(),
                n,
                seed,
                fmt_f64(s.lambda_min),
                fmt_f64(s.lambda_max),
                fmt_f64(s.kappa2)
            )?;
        }
        Ok(())
    };
    match &a.output {
        Some(path) => {
            write_atomic(path, body)?;
            let kappas: Vec<f64> = rows.iter().map(|r| r.2.kappa2).collect();
            let (mean, sd) = crate::experiments::mean_sd(&kappas);
            print_json(&json!({
                "alpha": spec.alpha(),
                "N": spec.degree(),
                "d": spec.d(),
                "n": rows[0].1,
                "trials": a.trials,
                "mean_kappa2": mean,
                "sd_kappa2": sd,
                "stability_threshold": stability_threshold(spec.alpha(), spec.degree(), spec.d(), HINT_DELTA)?,
            }));
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)
        }
    }
}

fn cmd_project(a: ProjectArgs) -> Result<()> {
    a.function.check_dim(a.dim)?;
    let spec = BasisSpec::new(a.dim, a.basis.degree, a.basis.alpha)?;
    let q = a.quad.unwrap_or(2 * spec.degree() + 2);
    let rule = gauss_jacobi(spec.alpha(), q)?;
    let f = |x: &[f64]| a.function.eval(x);
    let p = project(&f, &spec, &rule)?;
    let model = FittedModel::from_coeffs(spec.clone(), p.coeffs.clone())?;
    write_atomic(&a.output, |w| model.save(w))?;
    print_json(&json!({
        "alpha": spec.alpha(),
        "N": spec.degree(),
        "d": spec.d(),
        "quad": q,
        "l2_norm_f": p.l2_norm_f,
        "proj_norm": p.proj_norm(),
        "proj_error_l2": p.proj_error_l2,
        "proj_error_sup": p.proj_error_sup,
    }));
    Ok(())
}

fn cmd_resample(a: ResampleArgs) -> Result<()> {
    let raw = read_samples_file(&a.input)?;
    if raw.d() != a.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            found: raw.d(),
        });
    }
    let values = raw
        .y()
        .ok_or_else(|| Error::invalid("scattered data needs a y column"))?
        .to_vec();
    let config = ShepardConfig::new(a.mu, a.radius)?;
    let (unit, transform) = affine_to_unit_cube(raw.d(), raw.coords())?;
    let scatter = ScatterSet::new(raw.d(), unit, values)?;
    let sampler = SamplerConfig::new(a.alpha, a.dim, a.seed)?;
    let out = resample_to_beta(&scatter, &sampler, a.design, a.n_out, config)?;
    write_atomic(&a.output, |w| write_samples(w, &out))?;
    print_json(&json!({
        "n_in": raw.n(),
        "n_distinct": scatter.n(),
        "n_out": out.n(),
        "transform": transform,
    }));
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    if a.trials == 0 {
        return Err(Error::invalid("--trials must be >= 1"));
    }
    std::fs::create_dir_all(&a.out)?;
    let mut runs = Vec::new();
    for table in &a.tables {
        let start = Instant::now();
        let file = format!("{}.csv", table.name());
        write_atomic(&a.out.join(&file), |w| write_bench_table(*table, a.trials, a.seed, w))?;
        runs.push(json!({
            "table": table,
            "file": file,
            "wall_time_ms": start.elapsed().as_millis() as u64,
        }));
    }
    let manifest = json!({
        "tool": "jr",
        "version": env!("CARGO_PKG_VERSION"),
        "trials": a.trials,
        "seed": a.seed,
        "threads": rayon::current_num_threads(),
        "runs": runs,
    });
    write_atomic(&a.out.join("manifest.json"), |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest).map_err(std::io::Error::from)?;
        writeln!(w)?;
        Ok(())
    })?;
    print_json(&manifest);
    Ok(())
}
