//! The least-squares estimator `f̂(x) = Σ_m Ĉ_m Φ_m(x)` and its truncation.
//!
//! Coefficients solve `G Ĉ = Fᵀ (sqrt(γ_{α,d}/n) y)` by Cholesky. There is no
//! regularization: a Gram matrix that is not positive definite, or whose
//! `κ₂` exceeds the cap, is reported as [`Error::IllConditioned`] together
//! with the sample size suggested by the stability threshold.

use std::io::{BufRead, Write};

use crate::beta_sampling::SampleSet;
use crate::error::{Error, Result};
use crate::gram::{
    build_design, build_gram, condition_number, stability_threshold, Cholesky, SpectrumSummary,
    EIGEN_REL_TOL,
};
use crate::tensor_basis::{BasisSpec, MultiIndex};

/// Default upper limit on `κ₂(G)` accepted by [`fit`].
pub const DEFAULT_KAPPA_CAP: f64 = 1e6;

/// Model-file format tag written and accepted by this version.
pub const MODEL_FORMAT: u32 = 1;

/// `δ` used when suggesting a sample size after a failed fit.
const ADVICE_DELTA: f64 = 0.5;

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub kappa_cap: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            kappa_cap: DEFAULT_KAPPA_CAP,
        }
    }
}

/// Fitted coefficients over a [`BasisSpec`].
#[derive(Debug, Clone)]
pub struct FittedModel {
    spec: BasisSpec,
    coeffs: Vec<f64>,
    /// Gram spectrum at fit time; `None` for models read from a file.
    spectrum: Option<SpectrumSummary>,
    n_used: Option<usize>,
}

/// Known essential bound `|f| ≤ M_f` used for truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationBound(f64);

impl TruncationBound {
    pub fn new(m_f: f64) -> Result<Self> {
        if !(m_f > 0.0) || !m_f.is_finite() {
            return Err(Error::invalid(format!(
                "truncation bound must be a positive finite value, got {m_f}"
            )));
        }
        Ok(Self(m_f))
    }

    /// `max |y_i|`, the fallback when `M_f` is unknown.
    pub fn from_responses(y: &[f64]) -> Result<Self> {
        Self::new(y.iter().fold(0.0, |m: f64, v| m.max(v.abs())))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// `sign(v) · min(M_f, |v|)`.
    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(-self.0, self.0)
    }
}

fn ill_conditioned(spec: &BasisSpec, reason: String) -> Error {
    let suggested_n = stability_threshold(spec.alpha(), spec.degree(), spec.d(), ADVICE_DELTA)
        .unwrap_or(u64::MAX);
    Error::IllConditioned {
        reason,
        suggested_n,
        delta: ADVICE_DELTA,
    }
}

/// Fits with default options.
pub fn fit(spec: &BasisSpec, data: &SampleSet) -> Result<FittedModel> {
    fit_with(spec, data, FitOptions::default())
}

pub fn fit_with(spec: &BasisSpec, data: &SampleSet, options: FitOptions) -> Result<FittedModel> {
    let y = data
        .y()
        .ok_or_else(|| Error::invalid("sample set has no responses to fit"))?;
    let n = data.n();
    if n < spec.dim() {
        return Err(Error::Underdetermined {
            n,
            required: spec.dim(),
        });
    }
    let design = build_design(spec, data)?;
    let gram = build_gram(&design);
    let spectrum = condition_number(&gram, EIGEN_REL_TOL)?;
    if !spectrum.is_pd {
        return Err(ill_conditioned(
            spec,
            format!("lambda_min = {:e} is not positive", spectrum.lambda_min),
        ));
    }
    if spectrum.kappa2 > options.kappa_cap {
        return Err(ill_conditioned(
            spec,
            format!(
                "kappa2 = {:e} exceeds the cap {:e}",
                spectrum.kappa2, options.kappa_cap
            ),
        ));
    }
    let scale = (spec.gamma_alpha_d() / n as f64).sqrt();
    let mut rhs = design.transpose_mul(y);
    for v in &mut rhs {
        *v *= scale;
    }
    let chol = Cholesky::factor(&gram).map_err(|e| ill_conditioned(spec, e.to_string()))?;
    let coeffs = chol.solve(&rhs);
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(ill_conditioned(spec, "non-finite coefficients".into()));
    }
    Ok(FittedModel {
        spec: spec.clone(),
        coeffs,
        spectrum: Some(spectrum),
        n_used: Some(n),
    })
}

impl FittedModel {
    /// Model with given coefficients (storage order of `spec`).
    pub fn from_coeffs(spec: BasisSpec, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != spec.dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                found: coeffs.len(),
            });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("coefficients must be finite"));
        }
        Ok(Self {
            spec,
            coeffs,
            spectrum: None,
            n_used: None,
        })
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, m: &MultiIndex) -> Result<f64> {
        Ok(self.coeffs[self.spec.index_of(m)?])
    }

    pub fn spectrum(&self) -> Option<&SpectrumSummary> {
        self.spectrum.as_ref()
    }

    pub fn kappa2(&self) -> Option<f64> {
        self.spectrum.map(|s| s.kappa2)
    }

    pub fn n_used(&self) -> Option<usize> {
        self.n_used
    }

    /// `f̂(x)`; `x` must lie in `[0,1]^d`.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let row = self.spec.eval_row(x)?;
        Ok(row.iter().zip(&self.coeffs).map(|(r, c)| r * c).sum())
    }

    /// `f̂` at every point of `points` (row-major, `d` columns).
    pub fn predict_many(&self, points: &SampleSet) -> Result<Vec<f64>> {
        if points.d() != self.spec.d() {
            return Err(Error::DimensionMismatch {
                expected: self.spec.d(),
                found: points.d(),
            });
        }
        points.points().map(|p| self.predict(p)).collect()
    }

    /// Truncated estimator `sign(f̂) · min(M_f, |f̂|)`.
    pub fn predict_truncated(&self, x: &[f64], bound: TruncationBound) -> Result<f64> {
        self.predict(x).map(|v| bound.clamp(v))
    }

    /// Writes the text model format: `alpha=`, `N=`, `d=`, `format=` header
    /// lines, a column header, then one `m1,…,md,coefficient` row per basis
    /// function in storage order.
    pub fn save<W: Write>(&self, mut w: W) -> Result<()> {
        let d = self.spec.d();
        writeln!(w, "alpha={}", self.spec.alpha())?;
        writeln!(w, "N={}", self.spec.degree())?;
        writeln!(w, "d={d}")?;
        writeln!(w, "format={MODEL_FORMAT}")?;
        let header: Vec<String> = (1..=d).map(|j| format!("m{j}")).collect();
        writeln!(w, "{},coefficient", header.join(","))?;
        for (idx, c) in self.coeffs.iter().enumerate() {
            let m = self.spec.multi_index(idx);
            for k in m.components() {
                write!(w, "{k},")?;
            }
            writeln!(w, "{c:.16e}")?;
        }
        Ok(())
    }

    /// Reads a model written by [`FittedModel::save`].
    pub fn load<R: BufRead>(r: R) -> Result<Self> {
        let mut alpha = None;
        let mut degree = None;
        let mut d = None;
        let mut format = None;
        let mut spec: Option<BasisSpec> = None;
        let mut coeffs: Vec<Option<f64>> = Vec::new();
        let mut saw_columns = false;

        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let perr = |message: String| Error::Parse {
                line: lineno,
                message,
            };
            if spec.is_none() {
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| perr(format!("expected key=value header, got '{line}'")))?;
                match key.trim() {
                    "alpha" => {
                        alpha = Some(value.trim().parse::<f64>().map_err(|e| perr(e.to_string()))?)
                    }
                    "N" => {
                        degree = Some(value.trim().parse::<usize>().map_err(|e| perr(e.to_string()))?)
                    }
                    "d" => d = Some(value.trim().parse::<usize>().map_err(|e| perr(e.to_string()))?),
                    "format" => {
                        let f = value.trim().parse::<u32>().map_err(|e| perr(e.to_string()))?;
                        if f != MODEL_FORMAT {
                            return Err(perr(format!(
                                "unsupported model format {f} (expected {MODEL_FORMAT})"
                            )));
                        }
                        format = Some(f);
                    }
                    other => return Err(perr(format!("unknown header key '{other}'"))),
                }
                if let (Some(a), Some(n), Some(dd), Some(_)) = (alpha, degree, d, format) {
                    let s = BasisSpec::with_degree_zero_allowed(dd, n, a)?;
                    coeffs = vec![None; s.dim()];
                    spec = Some(s);
                }
                continue;
            }
            let s = spec.as_ref().expect("spec parsed");
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != s.d() + 1 {
                return Err(perr(format!(
                    "expected {} fields, found {}",
                    s.d() + 1,
                    fields.len()
                )));
            }
            if !saw_columns {
                saw_columns = true;
                if fields[0] == "m1" {
                    continue;
                }
            }
            let comps = fields[..s.d()]
                .iter()
                .map(|f| f.parse::<usize>().map_err(|e| perr(format!("bad index '{f}': {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let value: f64 = fields[s.d()]
                .parse()
                .map_err(|e| perr(format!("bad coefficient: {e}")))?;
            let idx = s
                .index_of(&MultiIndex::new(comps))
                .map_err(|e| perr(e.to_string()))?;
            if coeffs[idx].replace(value).is_some() {
                return Err(perr("duplicate multi-index".into()));
            }
        }

        let spec = spec.ok_or_else(|| Error::Parse {
            line: 0,
            message: "incomplete header (need alpha, N, d, format)".into(),
        })?;
        let coeffs = coeffs
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                c.ok_or_else(|| Error::Parse {
                    line: 0,
                    message: format!("missing coefficient for {:?}", spec.multi_index(i).components()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        FittedModel::from_coeffs(spec, coeffs)
    }
}

/// `(1/n) Σ (f̂(X_i) - r_i)²` against the reference values stored as `y`.
pub fn residual_mse(model: &FittedModel, data: &SampleSet) -> Result<f64> {
    let reference = data
        .y()
        .ok_or_else(|| Error::invalid("reference values are required"))?;
    if data.n() == 0 {
        return Err(Error::Empty("no evaluation points".into()));
    }
    let pred = model.predict_many(data)?;
    Ok(pred
        .iter()
        .zip(reference)
        .map(|(p, r)| (p - r).powi(2))
        .sum::<f64>()
        / data.n() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beta_sampling::{add_noise, sample, SamplerConfig};
    use crate::quadrature::{gauss_jacobi, project};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn design(alpha: f64, d: usize, n: usize, seed: u64) -> SampleSet {
        sample(&SamplerConfig::new(alpha, d, seed).unwrap(), n).unwrap()
    }

    #[test]
    fn recovers_single_basis_function() {
        let spec = BasisSpec::new(2, 4, -0.5).unwrap();
        let m0 = MultiIndex::new(vec![3, 1]);
        let x = design(-0.5, 2, 400, 1);
        let y = x.map_points(|p| spec.eval_basis(&m0, p).unwrap());
        let model = fit(&spec, &x.with_y(y).unwrap()).unwrap();
        let target = spec.index_of(&m0).unwrap();
        for (i, c) in model.coeffs().iter().enumerate() {
            let expected = if i == target { 1.0 } else { 0.0 };
            assert!((c - expected).abs() < 1e-8);
        }
    }

    #[test]
    fn constant_data_matches_projection() {
        let spec = BasisSpec::new(2, 3, 0.0).unwrap();
        let x = design(0.0, 2, 300, 2);
        let y = vec![2.5; 300];
        let model = fit(&spec, &x.with_y(y).unwrap()).unwrap();
        let rule = gauss_jacobi(0.0, 8).unwrap();
        let proj = project(&|_: &[f64]| 2.5, &spec, &rule).unwrap();
        assert_relative_eq!(proj.coeffs[0], 2.5, epsilon = 1e-12);
        assert_relative_eq!(model.coeffs()[0], proj.coeffs[0], epsilon = 1e-8);
        assert!(model.coeffs()[1..].iter().all(|c| c.abs() <= 1e-8));
    }

    #[test]
    fn underdetermined_is_rejected() {
        let spec = BasisSpec::new(2, 10, -0.5).unwrap();
        let x = design(-0.5, 2, 50, 3);
        let data = x.with_y(vec![0.0; 50]).unwrap();
        match fit(&spec, &data) {
            Err(Error::Underdetermined { n, required }) => {
                assert_eq!((n, required), (50, 121));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ill_conditioning_carries_advice() {
        let spec = BasisSpec::new(1, 3, 0.0).unwrap();
        let x = SampleSet::new(1, vec![0.5, 0.5, 0.5, 0.5, 0.5], Some(vec![1.0; 5])).unwrap();
        match fit(&spec, &x) {
            Err(Error::IllConditioned { suggested_n, .. }) => assert!(suggested_n > 5),
            other => panic!("unexpected {other:?}"),
        }
        let x = design(0.0, 1, 20, 4).with_y(vec![1.0; 20]).unwrap();
        let tight = FitOptions { kappa_cap: 1.0 };
        assert!(matches!(
            fit_with(&spec, &x, tight),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn predict_examples() {
        let spec = BasisSpec::new(2, 3, 0.5).unwrap();
        let zero = FittedModel::from_coeffs(spec.clone(), vec![0.0; 16]).unwrap();
        assert_eq!(zero.predict(&[0.3, 0.4]).unwrap(), 0.0);
        let mut unit = vec![0.0; 16];
        let m = MultiIndex::new(vec![2, 1]);
        unit[spec.index_of(&m).unwrap()] = 1.0;
        let model = FittedModel::from_coeffs(spec.clone(), unit).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let x = [rng.random::<f64>(), rng.random::<f64>()];
            assert_relative_eq!(
                model.predict(&x).unwrap(),
                spec.eval_basis(&m, &x).unwrap(),
                epsilon = 1e-14
            );
        }
        assert!(matches!(
            model.predict(&[1.5, 0.0]),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn truncation_semantics() {
        let spec = BasisSpec::with_degree_zero_allowed(1, 0, 0.0).unwrap();
        let five = FittedModel::from_coeffs(spec.clone(), vec![5.0]).unwrap();
        let neg = FittedModel::from_coeffs(spec.clone(), vec![-5.0]).unwrap();
        let small = FittedModel::from_coeffs(spec, vec![1.5]).unwrap();
        let b = TruncationBound::new(2.0).unwrap();
        assert_eq!(five.predict_truncated(&[0.2], b).unwrap(), 2.0);
        assert_eq!(neg.predict_truncated(&[0.2], b).unwrap(), -2.0);
        assert_eq!(small.predict_truncated(&[0.2], b).unwrap(), 1.5);
        assert!(TruncationBound::new(0.0).is_err());
        assert_eq!(TruncationBound::from_responses(&[1.0, -3.0]).unwrap().value(), 3.0);
    }

    #[test]
    fn truncation_never_hurts() {
        let f = |p: &[f64]| (3.0 * p[0]).sin() * p[1];
        let spec = BasisSpec::new(2, 3, -0.5).unwrap();
        let x = design(-0.5, 2, 100, 6);
        let y = add_noise(&x.map_points(f), 0.3, 6).unwrap();
        let model = fit(&spec, &x.with_y(y).unwrap()).unwrap();
        let b = TruncationBound::new(1.0).unwrap();
        for i in 0..=30 {
            for j in 0..=30 {
                let p = [i as f64 / 30.0, j as f64 / 30.0];
                let raw = model.predict(&p).unwrap();
                let cut = model.predict_truncated(&p, b).unwrap();
                assert!(cut.abs() <= 1.0);
                assert!((cut - f(&p)).abs() <= (raw - f(&p)).abs() + 1e-15);
                if raw.abs() <= 1.0 {
                    assert_eq!(cut, raw);
                }
            }
        }
    }

    #[test]
    fn residual_mse_examples() {
        let spec = BasisSpec::new(1, 2, 0.0).unwrap();
        let c = FittedModel::from_coeffs(spec, vec![3.0, 0.0, 0.0]).unwrap();
        let data = SampleSet::new(1, vec![0.1, 0.5, 0.9], Some(vec![1.0; 3])).unwrap();
        assert_relative_eq!(residual_mse(&c, &data).unwrap(), 4.0, epsilon = 1e-14);
        let no_ref = SampleSet::new(1, vec![0.1], None).unwrap();
        assert!(residual_mse(&c, &no_ref).is_err());
    }

    #[test]
    fn normal_equations_and_minimizer() {
        let spec = BasisSpec::new(2, 3, 0.0).unwrap();
        let x = design(0.0, 2, 200, 8);
        let y = add_noise(&x.map_points(|p| (p[0] * 4.0).exp() - p[1]), 0.1, 8).unwrap();
        let data = x.clone().with_y(y.clone()).unwrap();
        let model = fit(&spec, &data).unwrap();

        let f = build_design(&spec, &data).unwrap();
        let g = build_gram(&f);
        let scale = (spec.gamma_alpha_d() / 200.0).sqrt();
        let rhs: Vec<f64> = f.transpose_mul(&y).iter().map(|v| v * scale).collect();
        let gc = g.mul_vec(model.coeffs());
        let res: f64 = gc.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let ynorm: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(res <= 1e-9 * ynorm);

        let sse = |coeffs: &[f64]| -> f64 {
            let m = FittedModel::from_coeffs(spec.clone(), coeffs.to_vec()).unwrap();
            x.points()
                .zip(&y)
                .map(|(p, yi)| (m.predict(p).unwrap() - yi).powi(2))
                .sum()
        };
        let best = sse(model.coeffs());
        for i in 0..spec.dim() {
            for delta in [1e-3, -1e-3] {
                let mut c = model.coeffs().to_vec();
                c[i] += delta;
                assert!(sse(&c) >= best);
            }
        }
    }

    #[test]
    fn fit_is_linear_in_responses() {
        let spec = BasisSpec::new(2, 4, -0.5).unwrap();
        let x = design(-0.5, 2, 300, 9);
        let y1 = x.map_points(|p| p[0].sin());
        let y2 = x.map_points(|p| (p[1] * 2.0).cos() * p[0]);
        let sum: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| a + b).collect();
        let c1 = fit(&spec, &x.clone().with_y(y1).unwrap()).unwrap();
        let c2 = fit(&spec, &x.clone().with_y(y2).unwrap()).unwrap();
        let c12 = fit(&spec, &x.with_y(sum).unwrap()).unwrap();
        for i in 0..spec.dim() {
            assert!((c12.coeffs()[i] - c1.coeffs()[i] - c2.coeffs()[i]).abs() <= 1e-10);
        }
    }

    #[test]
    fn model_file_round_trip() {
        let spec = BasisSpec::new(2, 3, -0.5).unwrap();
        let x = design(-0.5, 2, 100, 10);
        let y = x.map_points(|p| (p[0] - p[1]).tanh());
        let model = fit(&spec, &x.with_y(y).unwrap()).unwrap();
        let mut buf = Vec::new();
        model.save(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("alpha=-0.5\nN=3\nd=2\nformat=1\nm1,m2,coefficient\n"));
        let loaded = FittedModel::load(&buf[..]).unwrap();
        assert_eq!(loaded.coeffs(), model.coeffs());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let p = [rng.random::<f64>(), rng.random::<f64>()];
            assert_eq!(loaded.predict(&p).unwrap(), model.predict(&p).unwrap());
        }
    }

    #[test]
    fn model_file_rejects_bad_input() {
        let bad_version = "alpha=0\nN=1\nd=1\nformat=2\nm1,coefficient\n0,1\n1,2\n";
        assert!(FittedModel::load(bad_version.as_bytes()).is_err());
        let missing = "alpha=0\nN=1\nd=1\nformat=1\nm1,coefficient\n0,1\n";
        assert!(FittedModel::load(missing.as_bytes()).is_err());
        let wrong_d = "alpha=0\nN=1\nd=2\nformat=1\nm1,coefficient\n0,1\n1,2\n";
        assert!(FittedModel::load(wrong_d.as_bytes()).is_err());
        let ok = "alpha=0\nN=1\nd=1\nformat=1\nm1,coefficient\n1,2\n0,1\n";
        let m = FittedModel::load(ok.as_bytes()).unwrap();
        assert_eq!(m.coeffs(), &[1.0, 2.0]);
    }
}
