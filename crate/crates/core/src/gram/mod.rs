//! Scaled random design matrix `F`, Gram matrix `G = FᵀF`, SPD solves, the
//! spectral condition number, and the matrix-Chernoff stability bounds.
//!
//! Rows of `F` are `sqrt(γ_{α,d}/n) · (Φ_m(X_i))_m`, which makes `E[G] = I`
//! under the Beta(α+1, α+1) design.

pub(crate) mod eigen;

pub use eigen::{symmetric_eigen, SymmetricEigen};

use rayon::prelude::*;

use crate::beta_sampling::SampleSet;
use crate::error::{Error, Result};
use crate::jacobi_poly::{eta, weight_mass, JacobiParams};
use crate::tensor_basis::{basis_dim, BasisSpec};

/// Rows per block when accumulating `FᵀF`.
const GRAM_BLOCK_ROWS: usize = 256;

/// Relative off-diagonal tolerance of the condition-number eigensolver.
pub const EIGEN_REL_TOL: f64 = 1e-12;
pub const EIGEN_MAX_SWEEPS: usize = 30;

/// Relative pivot threshold of [`cholesky_solve`].
pub const PIVOT_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct DesignMatrix {
    n: usize,
    dim: usize,
    entries: Vec<f64>,
}

impl DesignMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// `Fᵀ v`.
    pub fn transpose_mul(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        let mut out = vec![0.0; self.dim];
        for (row, &vi) in self.entries.chunks_exact(self.dim).zip(v) {
            for (o, r) in out.iter_mut().zip(row) {
                *o += r * vi;
            }
        }
        out
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum()
    }
}

/// Builds `F` for the points of `samples`.
pub fn build_design(spec: &BasisSpec, samples: &SampleSet) -> Result<DesignMatrix> {
    if samples.d() != spec.d() {
        return Err(Error::DimensionMismatch {
            expected: spec.d(),
            found: samples.d(),
        });
    }
    let n = samples.n();
    if n == 0 {
        return Err(Error::Empty("design has no points".into()));
    }
    if let Some(bad) = samples
        .points()
        .find(|p| p.iter().any(|v| !(0.0..=1.0).contains(v)))
    {
        return Err(Error::OutsideDomain { point: bad.to_vec() });
    }
    let dim = spec.dim();
    let scale = (spec.gamma_alpha_d() / n as f64).sqrt();
    let mut entries = vec![0.0; n * dim];
    entries
        .par_chunks_mut(dim)
        .zip(samples.coords().par_chunks(spec.d()))
        .for_each_init(
            || vec![0.0; spec.d() * (spec.degree() + 1)],
            |scratch, (row, x)| {
                spec.eval_row_into(x, row, scratch);
                for v in row.iter_mut() {
                    *v *= scale;
                }
            },
        );
    Ok(DesignMatrix { n, dim, entries })
}

/// Dense symmetric `dim × dim` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl GramMatrix {
    pub fn from_row_major(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(Self { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.entries
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest absolute row sum (Gershgorin bound on `|λ|`).
    pub fn max_abs_row_sum(&self) -> f64 {
        self.entries
            .chunks_exact(self.dim)
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max_{ij} |G_ij - δ_ij|`.
    pub fn max_deviation_from_identity(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.get(i, j) - target).abs());
            }
        }
        worst
    }

    /// `‖G - I‖_F`.
    pub fn frobenius_deviation_from_identity(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let target = if i == j { 1.0 } else { 0.0 };
                s += (self.get(i, j) - target).powi(2);
            }
        }
        s.sqrt()
    }
}

/// Upper triangle of `Σ_{i ∈ block} f_i f_iᵀ`.
fn block_gram(rows: &[f64], dim: usize) -> Vec<f64> {
    let mut acc = vec![0.0; dim * dim];
    for row in rows.chunks_exact(dim) {
        for (j, &rj) in row.iter().enumerate() {
            if rj == 0.0 {
                continue;
            }
            let dst = &mut acc[j * dim + j..(j + 1) * dim];
            for (a, &rk) in dst.iter_mut().zip(&row[j..]) {
                *a += rj * rk;
            }
        }
    }
    acc
}

/// Sums partial matrices pairwise in a fixed tree order.
fn pairwise_sum(mut parts: Vec<Vec<f64>>) -> Vec<f64> {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut left) = it.next() {
            if let Some(right) = it.next() {
                for (l, r) in left.iter_mut().zip(&right) {
                    *l += r;
                }
            }
            next.push(left);
        }
        parts = next;
    }
    parts.pop().unwrap_or_default()
}

/// `G = FᵀF`, accumulated over row blocks with pairwise block summation.
///
/// The result does not depend on the number of worker threads.
pub fn build_gram(design: &DesignMatrix) -> GramMatrix {
    let dim = design.dim;
    let parts: Vec<Vec<f64>> = design
        .entries
        .par_chunks(GRAM_BLOCK_ROWS * dim)
        .map(|block| block_gram(block, dim))
        .collect();
    let mut entries = pairwise_sum(parts);
    if entries.is_empty() {
        entries = vec![0.0; dim * dim];
    }
    for i in 0..dim {
        for j in 0..i {
            entries[i * dim + j] = entries[j * dim + i];
        }
    }
    GramMatrix { dim, entries }
}

/// Lower-triangular Cholesky factor, row-major.
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors `G`; a pivot `≤ 1e-12 · max diag` is reported as not positive definite.
    pub fn factor(g: &GramMatrix) -> Result<Self> {
        let n = g.dim;
        let max_diag = (0..n).map(|i| g.get(i, i)).fold(0.0, f64::max);
        let tol = PIVOT_REL_TOL * max_diag;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = g.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > tol) {
                return Err(Error::NotPositiveDefinite { column: j, pivot: d });
            }
            let ljj = d.sqrt();
            l[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut s = g.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(Self { dim: n, l })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.dim;
        assert_eq!(rhs.len(), n);
        let mut z = rhs.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for k in 0..i {
                s -= self.l[i * n + k] * z[k];
            }
            z[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * z[k];
            }
            z[i] = s / self.l[i * n + i];
        }
        z
    }
}

/// Solves `G z = rhs` for symmetric positive definite `G`.
pub fn cholesky_solve(g: &GramMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != g.dim {
        return Err(Error::DimensionMismatch {
            expected: g.dim,
            found: rhs.len(),
        });
    }
    Ok(Cholesky::factor(g)?.solve(rhs))
}

/// Extreme eigenvalues and `κ₂ = λ_max / λ_min`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpectrumSummary {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `+∞` when the matrix is not positive definite.
    pub kappa2: f64,
    pub is_pd: bool,
}

/// Spectrum of `G` from cyclic Jacobi with relative tolerance `tol`.
pub fn condition_number(g: &GramMatrix, tol: f64) -> Result<SpectrumSummary> {
    let eig = symmetric_eigen(&g.entries, g.dim, tol, EIGEN_MAX_SWEEPS)?;
    let lambda_min = eig.values.first().copied().unwrap_or(0.0);
    let lambda_max = eig.values.last().copied().unwrap_or(0.0);
    let is_pd = lambda_min > 0.0;
    Ok(SpectrumSummary {
        lambda_min,
        lambda_max,
        kappa2: if is_pd {
            lambda_max / lambda_min
        } else {
            f64::INFINITY
        },
        is_pd,
    })
}

/// `B_α = β(α+1, α+1) · η_α²`, the per-dimension factor of the summand bound.
pub fn b_alpha(alpha: f64) -> f64 {
    let e = eta(alpha);
    weight_mass(alpha) * e * e
}

/// `(B_α (N+1)^{2α+2})^d`.
fn growth(alpha: f64, degree: usize, d: usize) -> f64 {
    (b_alpha(alpha) * ((degree + 1) as f64).powf(2.0 * alpha + 2.0)).powi(d as i32)
}

fn check_bound_inputs(alpha: f64, degree: usize, d: usize, delta: f64) -> Result<()> {
    JacobiParams::new(alpha)?;
    if d == 0 {
        return Err(Error::invalid("dimension d must be >= 1"));
    }
    basis_dim(degree, d)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// Bound `B` on `λ_max` of each rank-one summand `H_i` of `G`:
/// `γ_{α,d}/n · (η_α² (N+1)^{2α+2})^d`.
pub fn chernoff_summand_bound(alpha: f64, degree: usize, d: usize, n: usize) -> f64 {
    let e = eta(alpha);
    weight_mass(alpha).powi(d as i32) / n as f64
        * (e * e * ((degree + 1) as f64).powf(2.0 * alpha + 2.0)).powi(d as i32)
}

/// Smallest `n` with `n ≥ 3/δ² · log(2(N+1)^d) · (B_α (N+1)^{2α+2})^d`.
pub fn stability_threshold(alpha: f64, degree: usize, d: usize, delta: f64) -> Result<u64> {
    check_bound_inputs(alpha, degree, d, delta)?;
    let dim = ((degree + 1) as f64).powi(d as i32);
    let n = 3.0 / (delta * delta) * (2.0 * dim).ln() * growth(alpha, degree, d);
    Ok(n.ceil() as u64)
}

/// `1 - 2(N+1)^d exp(-δ² n / (3 (B_α (N+1)^{2α+2})^d))`, lower bound on
/// `P(κ₂(G) ≤ (1+δ)/(1-δ))`. May be negative.
pub fn stability_probability_bound(
    alpha: f64,
    degree: usize,
    d: usize,
    n: usize,
    delta: f64,
) -> Result<f64> {
    check_bound_inputs(alpha, degree, d, delta)?;
    let dim = ((degree + 1) as f64).powi(d as i32);
    Ok(1.0 - 2.0 * dim * (-delta * delta * n as f64 / (3.0 * growth(alpha, degree, d))).exp())
}

/// `(N+1)^d exp(-δ² n / (2 (B_α (N+1)^{2α+2})^d))`, upper bound on
/// `P(λ_min(G) < 1 - δ)`.
pub fn lambda_min_failure_bound(
    alpha: f64,
    degree: usize,
    d: usize,
    n: usize,
    delta: f64,
) -> Result<f64> {
    check_bound_inputs(alpha, degree, d, delta)?;
    let dim = ((degree + 1) as f64).powi(d as i32);
    Ok(dim * (-delta * delta * n as f64 / (2.0 * growth(alpha, degree, d))).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beta_sampling::{sample, trial_seed, SamplerConfig};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gram_for(alpha: f64, degree: usize, d: usize, n: usize, seed: u64) -> GramMatrix {
        let spec = BasisSpec::new(d, degree, alpha).unwrap();
        let samples = sample(&SamplerConfig::new(alpha, d, seed).unwrap(), n).unwrap();
        build_gram(&build_design(&spec, &samples).unwrap())
    }

    #[test]
    fn constant_basis_design() {
        let spec = BasisSpec::with_degree_zero_allowed(1, 0, 0.0).unwrap();
        let samples = sample(&SamplerConfig::new(0.0, 1, 1).unwrap(), 9).unwrap();
        let f = build_design(&spec, &samples).unwrap();
        assert!(f.entries().iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn design_rows_match_basis() {
        let spec = BasisSpec::new(2, 4, -0.5).unwrap();
        let samples = sample(&SamplerConfig::new(-0.5, 2, 2).unwrap(), 50).unwrap();
        let f = build_design(&spec, &samples).unwrap();
        let scale = (spec.gamma_alpha_d() / 50.0).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            let i = rng.random_range(0..50);
            let idx = rng.random_range(0..spec.dim());
            let m = spec.multi_index(idx);
            let expected = scale * spec.eval_basis(&m, samples.point(i)).unwrap();
            assert!((f.row(i)[idx] - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn design_rejects_mismatched_dimension() {
        let spec = BasisSpec::new(2, 2, 0.0).unwrap();
        let samples = sample(&SamplerConfig::new(0.0, 3, 2).unwrap(), 10).unwrap();
        assert!(matches!(
            build_design(&spec, &samples),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn frobenius_norm_tracks_dimension() {
        let spec = BasisSpec::new(1, 3, 0.0).unwrap();
        let samples = sample(&SamplerConfig::new(0.0, 1, 5).unwrap(), 10_000).unwrap();
        let f = build_design(&spec, &samples).unwrap();
        assert!((f.frobenius_norm_sq() - 4.0).abs() < 0.05 * 4.0);
    }

    #[test]
    fn gram_concentrates_at_identity() {
        let g = gram_for(0.0, 3, 1, 100_000, 17);
        assert!(g.max_deviation_from_identity() <= 0.05);
    }

    #[test]
    fn gram_is_psd_and_symmetric() {
        let g = gram_for(-0.5, 4, 2, 60, 1);
        for i in 0..g.dim() {
            assert!(g.get(i, i) > 0.0);
            for j in 0..g.dim() {
                assert_eq!(g.get(i, j), g.get(j, i));
            }
        }
        let e = symmetric_eigen(g.entries(), g.dim(), 1e-14, 50).unwrap();
        assert!(e.values[0] >= -1e-12);
    }

    #[test]
    fn single_sample_gram_has_rank_one() {
        let g = gram_for(0.0, 3, 2, 1, 4);
        let e = symmetric_eigen(g.entries(), g.dim(), 1e-15, 50).unwrap();
        let big = e.values.iter().filter(|&&v| v > 1e-10).count();
        assert_eq!(big, 1);
    }

    #[test]
    fn gram_is_thread_count_invariant() {
        let spec = BasisSpec::new(2, 5, -0.5).unwrap();
        let samples = sample(&SamplerConfig::new(-0.5, 2, 9).unwrap(), 3000).unwrap();
        let f = build_design(&spec, &samples).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let g1 = one.install(|| build_gram(&f));
        let g4 = four.install(|| build_gram(&f));
        assert_eq!(g1, g4);
    }

    #[test]
    fn cholesky_examples() {
        let id = GramMatrix::identity(3);
        assert_eq!(cholesky_solve(&id, &[1.0, -2.0, 3.0]).unwrap(), vec![1.0, -2.0, 3.0]);
        let g = GramMatrix::from_row_major(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let z = cholesky_solve(&g, &[1.0, 1.0]).unwrap();
        assert_relative_eq!(z[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(z[1], 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn cholesky_residual_on_random_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 20;
        let a: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                g[i * n + j] = (0..n).map(|k| a[k * n + i] * a[k * n + j]).sum::<f64>()
                    + if i == j { 1.0 } else { 0.0 };
            }
        }
        let g = GramMatrix::from_row_major(n, g).unwrap();
        let rhs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let z = cholesky_solve(&g, &rhs).unwrap();
        let r = g.mul_vec(&z);
        let res: f64 = r.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(res / norm <= 1e-10);
    }

    #[test]
    fn cholesky_rejects_singular() {
        let g = GramMatrix::from_row_major(2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            cholesky_solve(&g, &[1.0, 0.0]),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn condition_number_examples() {
        let s = condition_number(&GramMatrix::identity(5), EIGEN_REL_TOL).unwrap();
        assert_eq!(s.kappa2, 1.0);
        let g = GramMatrix::from_row_major(2, vec![4.0, 0.0, 0.0, 1.0]).unwrap();
        let s = condition_number(&g, EIGEN_REL_TOL).unwrap();
        assert_eq!(s.kappa2, 4.0);
        let singular = GramMatrix::from_row_major(2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let s = condition_number(&singular, EIGEN_REL_TOL).unwrap();
        assert!(!s.is_pd);
        assert!(s.kappa2.is_infinite());
    }

    #[test]
    fn gershgorin_dominates_lambda_max() {
        for seed in 0..5 {
            let g = gram_for(-0.5, 4, 2, 200, seed);
            let s = condition_number(&g, EIGEN_REL_TOL).unwrap();
            assert!(s.lambda_max <= g.max_abs_row_sum() + 1e-12);
        }
    }

    #[test]
    fn solve_round_trip_on_gram() {
        let g = gram_for(0.0, 3, 2, 500, 3);
        let b: Vec<f64> = (0..g.dim()).map(|i| (i as f64).sin()).collect();
        let z = cholesky_solve(&g, &b).unwrap();
        let r = g.mul_vec(&z);
        let res: f64 = r.iter().zip(&b).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(res / norm <= 1e-9);
    }

    #[test]
    fn b_alpha_values() {
        // α = 0: β(1,1) η_0² = 2.
        assert_relative_eq!(b_alpha(0.0), 2.0, max_relative = 1e-14);
        // α = -1/2: π · (2/π) e^{1/8} = 2 e^{1/8} ≈ 2.27.
        assert_relative_eq!(b_alpha(-0.5), 2.0 * (0.125f64).exp(), max_relative = 1e-13);
        assert!(b_alpha(-0.5) > 1.0);
    }

    #[test]
    fn threshold_shape() {
        let base = stability_threshold(-0.5, 3, 2, 0.5).unwrap();
        assert!(stability_threshold(-0.5, 4, 2, 0.5).unwrap() > base);
        assert!(stability_threshold(-0.5, 3, 2, 0.25).unwrap() > base);
        let near_one = stability_threshold(0.0, 3, 1, 1.0 - 1e-12).unwrap();
        let limit = 3.0 * (8.0f64).ln() * 2.0 * 16.0;
        assert_eq!(near_one, limit.ceil() as u64);
        assert!(stability_threshold(0.0, 3, 1, 1.0).is_err());
        assert!(stability_threshold(0.0, 3, 1, 0.0).is_err());
    }

    #[test]
    fn minus_half_minimizes_threshold() {
        for (degree, d) in [(3, 1), (5, 2), (10, 2)] {
            let best = stability_threshold(-0.5, degree, d, 0.5).unwrap();
            for i in 1..=60 {
                let alpha = -0.5 + 0.05 * i as f64;
                assert!(stability_threshold(alpha, degree, d, 0.5).unwrap() >= best);
            }
        }
    }

    #[test]
    fn probability_bound_shape() {
        let p = |n| stability_probability_bound(-0.5, 3, 2, n, 0.5).unwrap();
        assert!(p(1000) < p(5000));
        assert!(p(5000) < p(20_000));
        assert!((p(10_000_000) - 1.0).abs() < 1e-12);
        let q = stability_probability_bound(-0.5, 4, 2, 20_000, 0.5).unwrap();
        assert!(q < p(20_000));
    }

    #[test]
    fn summand_bound_dominates_rank_one_terms() {
        for alpha in [-0.5, 0.0, 1.0] {
            let (degree, d, n) = (4, 2, 1000);
            let spec = BasisSpec::new(d, degree, alpha).unwrap();
            let samples = sample(&SamplerConfig::new(alpha, d, 12).unwrap(), n).unwrap();
            let f = build_design(&spec, &samples).unwrap();
            let bound = chernoff_summand_bound(alpha, degree, d, n);
            for i in 0..n {
                let lam: f64 = f.row(i).iter().map(|v| v * v).sum();
                assert!(lam <= bound);
            }
        }
    }

    #[test]
    fn threshold_guarantees_stability() {
        let (alpha, degree, d, delta) = (-0.5, 2, 1, 0.9);
        let n = stability_threshold(alpha, degree, d, delta).unwrap() as usize;
        let spec = BasisSpec::new(d, degree, alpha).unwrap();
        let good = (0..200u64)
            .filter(|&t| {
                let cfg = SamplerConfig::new(alpha, d, trial_seed(5, t)).unwrap();
                let g = build_gram(&build_design(&spec, &sample(&cfg, n).unwrap()).unwrap());
                condition_number(&g, EIGEN_REL_TOL).unwrap().kappa2 <= 19.0
            })
            .count();
        assert!(good >= 190, "{good} of 200");
    }
}
