//! Gauss–Jacobi quadrature and the reference projections built on it.
//!
//! Rules integrate against `ω_α(x) = x^α (1-x)^α` on `[0,1]`. Nodes are
//! interior, so the endpoint singularity of `ω_α` for `α < 0` is never
//! evaluated.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gram::eigen::symmetric_eigen;
use crate::jacobi_poly::{build_table, weight_mass, JacobiParams};
use crate::tensor_basis::BasisSpec;

/// Largest tensor rule or grid (`q^d` points) evaluated.
pub const MAX_TENSOR_POINTS: u128 = 100_000_000;

const EIGEN_TOL: f64 = 1e-15;
const EIGEN_SWEEPS: usize = 100;
const CHUNK: usize = 4096;

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    alpha: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn q(&self) -> usize {
        self.nodes.len()
    }

    /// Strictly increasing, inside `(0, 1)`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Positive; they sum to `β(α+1, α+1)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ w_i g(x_i) ≈ ∫₀¹ g ω_α`.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * g(x))
            .sum()
    }
}

/// `q`-point Gauss–Jacobi rule via Golub–Welsch.
///
/// The symmetric tridiagonal has zero diagonal and off-diagonal
/// `sqrt(c_{k+1} / (a_k a_{k+1}))` from the symmetric Jacobi recurrence.
pub fn gauss_jacobi(alpha: f64, q: usize) -> Result<QuadratureRule> {
    let params = JacobiParams::new(alpha)?;
    if q == 0 {
        return Err(Error::invalid("quadrature needs q >= 1 nodes"));
    }
    let table = build_table(params, q);
    let (a, c) = (table.a(), table.c());
    let mut jm = vec![0.0; q * q];
    for k in 0..q - 1 {
        let e = (c[k + 1] / (a[k] * a[k + 1])).sqrt();
        jm[k * q + k + 1] = e;
        jm[(k + 1) * q + k] = e;
    }
    let eig = symmetric_eigen(&jm, q, EIGEN_TOL, EIGEN_SWEEPS)?;
    let mass = weight_mass(alpha);
    let nodes = eig.values.iter().map(|t| 0.5 * (t + 1.0)).collect();
    let weights = (0..q)
        .map(|j| mass * eig.vectors[j] * eig.vectors[j])
        .collect();
    Ok(QuadratureRule {
        alpha,
        nodes,
        weights,
    })
}

fn tensor_size(q: usize, d: usize) -> Result<usize> {
    let total = (q as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if total > MAX_TENSOR_POINTS {
        return Err(Error::BudgetExceeded {
            requested: total,
            limit: MAX_TENSOR_POINTS,
        });
    }
    Ok(total as usize)
}

/// Node and weight of tensor point `i` (axis 0 fastest).
fn tensor_point(rule: &QuadratureRule, d: usize, mut i: usize, x: &mut [f64]) -> f64 {
    let q = rule.q();
    let mut w = 1.0;
    for xj in x.iter_mut().take(d) {
        let k = i % q;
        i /= q;
        *xj = rule.nodes[k];
        w *= rule.weights[k];
    }
    w
}

/// Sums `term(i)` over `0..total` in fixed-size chunks, in parallel, then
/// combines the chunk totals in index order.
fn chunked_sum<T, F>(total: usize, init: impl Fn() -> T + Sync, fold: F, merge: impl Fn(&mut T, T)) -> T
where
    T: Send,
    F: Fn(&mut T, usize) + Sync,
{
    let chunks = total.div_ceil(CHUNK);
    let partials: Vec<T> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            for i in c * CHUNK..((c + 1) * CHUNK).min(total) {
                fold(&mut acc, i);
            }
            acc
        })
        .collect();
    let mut out = init();
    for p in partials {
        merge(&mut out, p);
    }
    out
}

/// Tensor-rule approximation of `∫_{[0,1]^d} g ω_α`.
pub fn tensor_integrate<G>(g: G, rule: &QuadratureRule, d: usize) -> Result<f64>
where
    G: Fn(&[f64]) -> f64 + Sync,
{
    if d == 0 {
        return Err(Error::invalid("dimension d must be >= 1"));
    }
    let total = tensor_size(rule.q(), d)?;
    Ok(chunked_sum(
        total,
        || (0.0, vec![0.0; d]),
        |acc, i| {
            let w = tensor_point(rule, d, i, &mut acc.1);
            acc.0 += w * g(&acc.1);
        },
        |a, b| a.0 += b.0,
    )
    .0)
}

/// `‖f‖_α = sqrt(∫ f² ω_α)` on `[0,1]^d`.
pub fn weighted_norm<F>(f: F, rule: &QuadratureRule, d: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    tensor_integrate(|x| f(x).powi(2), rule, d).map(|v| v.max(0.0).sqrt())
}

/// Projection coefficients and error norms of `f` onto the span of a basis.
#[derive(Debug, Clone)]
pub struct ProjectionResult {
    /// `C_m = ⟨f, Φ_m⟩_α` in the storage order of the basis.
    pub coeffs: Vec<f64>,
    pub l2_norm_f: f64,
    /// `‖f - π_N f‖_α`, integrated directly rather than through Parseval.
    pub proj_error_l2: f64,
    /// Grid estimate of `‖f - π_N f‖_∞` (a lower bound); `None` when `d > 3`.
    pub proj_error_sup: Option<f64>,
}

impl ProjectionResult {
    /// `‖π_N f‖_α = sqrt(Σ C_m²)`.
    pub fn proj_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// Grid resolution used for `proj_error_sup`.
pub fn default_sup_resolution(d: usize) -> Option<usize> {
    match d {
        1 | 2 => Some(64),
        3 => Some(32),
        _ => None,
    }
}

fn expansion(spec: &BasisSpec, coeffs: &[f64], x: &[f64], row: &mut [f64], scratch: &mut [f64]) -> f64 {
    spec.eval_row_into(x, row, scratch);
    row.iter().zip(coeffs).map(|(r, c)| r * c).sum()
}

/// Orthogonal projection of `f` by tensor quadrature.
///
/// Requires `q ≥ 2N + 2` so that every product `Φ_m Φ_k` is integrated
/// exactly, and `q^d ≤ 10⁸`.
pub fn project<F>(f: &F, spec: &BasisSpec, rule: &QuadratureRule) -> Result<ProjectionResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if rule.alpha() != spec.alpha() {
        return Err(Error::invalid(format!(
            "rule alpha {} differs from basis alpha {}",
            rule.alpha(),
            spec.alpha()
        )));
    }
    let need = 2 * spec.degree() + 2;
    if rule.q() < need {
        return Err(Error::invalid(format!(
            "quadrature with q = {} nodes is too small for degree {} (need q >= {need})",
            rule.q(),
            spec.degree()
        )));
    }
    let d = spec.d();
    let dim = spec.dim();
    let n1 = spec.degree() + 1;
    let total = tensor_size(rule.q(), d)?;

    let (coeffs, norm_sq, ..) = chunked_sum(
        total,
        || (vec![0.0; dim], 0.0, vec![0.0; dim], vec![0.0; d * n1], vec![0.0; d]),
        |acc, i| {
            let (c, nsq, row, scratch, x) = acc;
            let w = tensor_point(rule, d, i, x);
            let fx = f(x);
            spec.eval_row_into(x, row, scratch);
            let wf = w * fx;
            for (ck, rk) in c.iter_mut().zip(row.iter()) {
                *ck += wf * rk;
            }
            *nsq += wf * fx;
        },
        |a, b| {
            for (x, y) in a.0.iter_mut().zip(&b.0) {
                *x += y;
            }
            a.1 += b.1;
        },
    );

    let err_sq = chunked_sum(
        total,
        || (0.0, vec![0.0; dim], vec![0.0; d * n1], vec![0.0; d]),
        |acc, i| {
            let (s, row, scratch, x) = acc;
            let w = tensor_point(rule, d, i, x);
            let r = f(x) - expansion(spec, &coeffs, x, row, scratch);
            *s += w * r * r;
        },
        |a, b| a.0 += b.0,
    )
    .0;

    let proj_error_sup = match default_sup_resolution(d) {
        Some(res) => Some(sup_error(f, spec, &coeffs, res)?),
        None => None,
    };
    Ok(ProjectionResult {
        coeffs,
        l2_norm_f: norm_sq.max(0.0).sqrt(),
        proj_error_l2: err_sq.max(0.0).sqrt(),
        proj_error_sup,
    })
}

/// `max |f - Σ C_m Φ_m|` over the tensor grid `{i/(res-1)}^d`, endpoints
/// included. A lower estimate of the true sup norm.
pub fn sup_error<F>(f: &F, spec: &BasisSpec, coeffs: &[f64], resolution: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if resolution < 32 {
        return Err(Error::invalid(format!(
            "grid resolution must be >= 32 per axis, got {resolution}"
        )));
    }
    let d = spec.d();
    if d > 3 {
        return Err(Error::invalid(format!(
            "sup-norm grid estimate supports d <= 3, got d = {d}"
        )));
    }
    if coeffs.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: coeffs.len(),
        });
    }
    let total = tensor_size(resolution, d)?;
    let step = 1.0 / (resolution - 1) as f64;
    let n1 = spec.degree() + 1;
    Ok(chunked_sum(
        total,
        || (0.0f64, vec![0.0; spec.dim()], vec![0.0; d * n1], vec![0.0; d]),
        |acc, i| {
            let (m, row, scratch, x) = acc;
            let mut rest = i;
            for xj in x.iter_mut() {
                *xj = (rest % resolution) as f64 * step;
                rest /= resolution;
            }
            let r = (f(x) - expansion(spec, coeffs, x, row, scratch)).abs();
            *m = m.max(r);
        },
        |a, b| a.0 = a.0.max(b.0),
    )
    .0)
}

/// Inputs of the deterministic `‖f - f̂‖_α` bound.
#[derive(Debug, Clone, Copy)]
pub struct L2BoundInputs {
    pub proj_error_l2: f64,
    pub proj_error_sup: f64,
    pub sigma: f64,
    pub delta: f64,
    pub proj_norm: f64,
    pub kappa2: f64,
}

/// `‖f-π_N f‖_α + sqrt(κ₂) · sqrt(‖f-π_N f‖_∞² + σ² + δ) / sqrt(1 - δ/‖π_N f‖_α)`.
pub fn l2_error_bound(inputs: L2BoundInputs) -> Result<f64> {
    let L2BoundInputs {
        proj_error_l2,
        proj_error_sup,
        sigma,
        delta,
        proj_norm,
        kappa2,
    } = inputs;
    if !(delta > 0.0 && delta < proj_norm) {
        return Err(Error::invalid(format!(
            "delta must lie in (0, ||pi_N f||) = (0, {proj_norm}), got {delta}"
        )));
    }
    if kappa2 < 1.0 || sigma < 0.0 || proj_error_l2 < 0.0 || proj_error_sup < 0.0 {
        return Err(Error::invalid("bound inputs out of range"));
    }
    Ok(proj_error_l2
        + kappa2.sqrt() * (proj_error_sup.powi(2) + sigma * sigma + delta).sqrt()
            / (1.0 - delta / proj_norm).sqrt())
}
