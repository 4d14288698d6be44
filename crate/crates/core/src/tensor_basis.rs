//! Tensor-product basis `Φ_m(x) = Π_j P̃_{m_j}(x_j)` over `[0, 1]^d`.
//!
//! Multi-indices range over `{0, …, N}^d`. The flat index follows
//! `g(m) = 1 + Σ_k m_k (N+1)^{k-1}` (first coordinate fastest); internally the
//! zero-based `g(m) - 1` is used for storage.

use crate::error::{Error, Result};
use crate::jacobi_poly::{build_table, weight_mass, JacobiParams, JacobiTable};

/// Largest admissible basis dimension `(N+1)^d`.
pub const MAX_BASIS_DIM: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(components: Vec<usize>) -> Self {
        Self(components)
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![0; d])
    }

    pub fn components(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn max_component(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

/// Checked `(N+1)^d`.
pub fn basis_dim(degree: usize, d: usize) -> Result<usize> {
    let requested = (degree as u128 + 1)
        .checked_pow(d as u32)
        .unwrap_or(u128::MAX);
    if requested > MAX_BASIS_DIM as u128 {
        return Err(Error::BasisTooLarge {
            requested,
            limit: MAX_BASIS_DIM,
        });
    }
    Ok(requested as usize)
}

/// One-based flat index `g(m)`.
pub fn flatten(m: &MultiIndex, degree: usize, d: usize) -> Result<usize> {
    if m.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: m.dim(),
        });
    }
    let mut j = 0usize;
    let mut stride = 1usize;
    for &mk in m.components() {
        if mk > degree {
            return Err(Error::invalid(format!(
                "multi-index component {mk} exceeds degree {degree}"
            )));
        }
        j += mk * stride;
        stride *= degree + 1;
    }
    Ok(j + 1)
}

/// Inverse of [`flatten`].
pub fn unflatten(j: usize, degree: usize, d: usize) -> Result<MultiIndex> {
    let total = basis_dim(degree, d)?;
    if j == 0 || j > total {
        return Err(Error::invalid(format!(
            "flat index {j} outside [1, {total}]"
        )));
    }
    let mut rest = j - 1;
    let base = degree + 1;
    let comps = (0..d)
        .map(|_| {
            let c = rest % base;
            rest /= base;
            c
        })
        .collect();
    Ok(MultiIndex(comps))
}

/// The basis `{Φ_m : m ∈ [[0,N]]^d}` for a fixed `α`.
#[derive(Debug, Clone)]
pub struct BasisSpec {
    d: usize,
    degree: usize,
    alpha: f64,
    table: JacobiTable,
    dim: usize,
    gamma_alpha_d: f64,
}

impl BasisSpec {
    pub fn new(d: usize, degree: usize, alpha: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimension d must be >= 1"));
        }
        if degree == 0 {
            return Err(Error::invalid("degree N must be >= 1"));
        }
        Self::with_degree_zero_allowed(d, degree, alpha)
    }

    /// As [`BasisSpec::new`] but also accepts `N = 0` (the constant basis).
    pub fn with_degree_zero_allowed(d: usize, degree: usize, alpha: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimension d must be >= 1"));
        }
        let params = JacobiParams::new(alpha)?;
        let dim = basis_dim(degree, d)?;
        Ok(Self {
            d,
            degree,
            alpha,
            table: build_table(params, degree),
            dim,
            gamma_alpha_d: weight_mass(alpha).powi(d as i32),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn table(&self) -> &JacobiTable {
        &self.table
    }

    /// `(N+1)^d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `γ_{α,d} = β(α+1, α+1)^d`.
    pub fn gamma_alpha_d(&self) -> f64 {
        self.gamma_alpha_d
    }

    /// Zero-based storage position of `m`.
    pub fn index_of(&self, m: &MultiIndex) -> Result<usize> {
        flatten(m, self.degree, self.d).map(|j| j - 1)
    }

    /// Multi-index stored at zero-based position `idx`.
    pub fn multi_index(&self, idx: usize) -> MultiIndex {
        unflatten(idx + 1, self.degree, self.d).expect("index within basis")
    }

    /// All multi-indices in storage order.
    pub fn multi_indices(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        (0..self.dim).map(|i| self.multi_index(i))
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: x.len(),
            });
        }
        if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::OutsideDomain { point: x.to_vec() });
        }
        Ok(())
    }

    /// `Φ_m(x)`.
    pub fn eval_basis(&self, m: &MultiIndex, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.index_of(m)?;
        Ok(m
            .components()
            .iter()
            .zip(x)
            .map(|(&k, &xj)| self.table.eval_normalized(k, xj))
            .product())
    }

    /// The full vector `(Φ_m(x))_m` in storage order.
    pub fn eval_row(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let mut row = vec![0.0; self.dim];
        let mut scratch = vec![0.0; self.d * (self.degree + 1)];
        self.eval_row_into(x, &mut row, &mut scratch);
        Ok(row)
    }

    /// Unchecked row evaluation into caller buffers.
    ///
    /// `row.len() == dim`, `scratch.len() >= d * (N + 1)`.
    pub fn eval_row_into(&self, x: &[f64], row: &mut [f64], scratch: &mut [f64]) {
        let n1 = self.degree + 1;
        for (j, &xj) in x.iter().enumerate() {
            self.table.eval_all_into(xj, &mut scratch[j * n1..(j + 1) * n1]);
        }
        // Outer product built from the last axis inward so that axis 0 ends
        // up fastest-varying.
        row[0] = 1.0;
        let mut len = 1;
        for j in (0..self.d).rev() {
            let vals = &scratch[j * n1..(j + 1) * n1];
            for block in (0..len).rev() {
                let base = row[block];
                let dst = block * n1;
                for (k, v) in vals.iter().enumerate() {
                    row[dst + k] = base * v;
                }
            }
            len *= n1;
        }
    }

    /// `(η_α² (N+1)^{2α+2})^d`, the pointwise bound on `Σ_m Φ_m(x)²`.
    pub fn row_norm_bound(&self) -> f64 {
        let eta = self.table.eta_alpha();
        (eta * eta * ((self.degree + 1) as f64).powf(2.0 * self.alpha + 2.0)).powi(self.d as i32)
    }
}
