//! Stable least-squares regression over tensor-product Jacobi polynomials.
//!
//! Given responses `Y_i = f(X_i) + ε_i` at random design points `X_i` drawn
//! from the product Beta(α+1, α+1) law on `[0,1]^d`, the estimator
//! `f̂(x) = Σ_m Ĉ_m Φ_m(x)` is fitted over the orthonormal tensor basis
//! `Φ_m(x) = Π_j P̃_{m_j}(x_j)`, `m ∈ {0..N}^d`, by solving the normal
//! equations `G Ĉ = Fᵀ y'` with the scaled Gram matrix `G` concentrating at
//! the identity.
//!
//! Modules:
//! - [`jacobi_poly`]: univariate normalized Jacobi polynomials
//! - [`tensor_basis`]: multi-indices and tensor-product rows
//! - [`beta_sampling`]: seeded Beta designs and Gaussian noise
//! - [`gram`]: design/Gram matrices, Cholesky, κ₂, stability bounds
//! - [`estimator`]: fitting, prediction, truncation, model files
//! - [`quadrature`]: Gauss–Jacobi rules and exact projections
//! - [`shepard`]: inverse-distance resampling of scattered data
//! - [`experiments`]: table reproductions, metrics, rate fits
//! - [`cli`]: the `jr` command-line front end

pub mod beta_sampling;
pub mod cli;
pub mod csv_io;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod gram;
pub mod jacobi_poly;
pub mod quadrature;
pub mod shepard;
pub mod tensor_basis;

pub use error::{Error, Result};
