//! Symmetric Jacobi polynomials `P_k^{(α,α)}` on `[-1, 1]` and their
//! orthonormal shifted versions on `[0, 1]`.
//!
//! The shifted polynomials `P̃_k(x) = 2^{α+1/2} / sqrt(h_k) · P_k(2x - 1)` are
//! orthonormal for the weight `ω_α(x) = x^α (1 - x)^α` on `[0, 1]`. All
//! evaluation goes through the three-term recurrence
//!
//! ```text
//! P_{k+1}(t) = (a_k t + b_k) P_k(t) - c_k P_{k-1}(t)
//! ```
//!
//! with `P_0 = 1` and `P_1(t) = (α + 1) t`.

use crate::error::{Error, Result};

/// Smallest admissible Jacobi parameter.
pub const ALPHA_MIN: f64 = -0.5;

/// Natural log of the gamma function.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Euler beta function `B(a, b)` for positive arguments.
pub fn beta_function(a: f64, b: f64) -> f64 {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

/// `β(α+1, α+1)`: the total mass of `ω_α` on `[0, 1]`.
pub fn weight_mass(alpha: f64) -> f64 {
    beta_function(alpha + 1.0, alpha + 1.0)
}

/// Constant `η_α = sqrt(2)/Γ(α+1) · exp(max(0, α)/6 + α²/4)` of the sup-norm bound.
pub fn eta(alpha: f64) -> f64 {
    std::f64::consts::SQRT_2 / libm::tgamma(alpha + 1.0)
        * (alpha.max(0.0) / 6.0 + alpha * alpha / 4.0).exp()
}

/// Validated Jacobi parameter `α ≥ -1/2` (with `β = α`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiParams {
    alpha: f64,
}

impl JacobiParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < ALPHA_MIN {
            return Err(Error::invalid(format!(
                "alpha must be a finite value >= -0.5, got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Recurrence coefficients and squared norms for degrees `0..=N`.
#[derive(Debug, Clone)]
pub struct JacobiTable {
    alpha: f64,
    max_degree: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    h: Vec<f64>,
    /// `2^{α+1/2} / sqrt(h_k)`, the factor turning `P_k(2x-1)` into `P̃_k(x)`.
    scale: Vec<f64>,
    eta_alpha: f64,
}

impl JacobiTable {
    /// Precomputes the recurrence for degrees up to `max_degree`.
    pub fn new(params: JacobiParams, max_degree: usize) -> Self {
        let alpha = params.alpha;
        let ab = 2.0 * alpha; // α + β

        let mut a = Vec::with_capacity(max_degree);
        let mut b = Vec::with_capacity(max_degree);
        let mut c = Vec::with_capacity(max_degree);
        for k in 0..max_degree {
            if k == 0 {
                // The generic formulas are 0/0 at k = 0 when α + β ∈ {0, -1}.
                a.push(alpha + 1.0);
                b.push(0.0);
                c.push(0.0);
                continue;
            }
            let kf = k as f64;
            let s = 2.0 * kf + ab;
            let denom = 2.0 * (kf + 1.0) * (kf + ab + 1.0);
            a.push((s + 1.0) * (s + 2.0) / denom);
            // b_k carries a factor α² - β², identically zero here.
            b.push(0.0);
            c.push(
                (kf + alpha) * (kf + alpha) * (s + 2.0) / ((kf + 1.0) * (kf + ab + 1.0) * s),
            );
        }

        let ln2 = std::f64::consts::LN_2;
        let h: Vec<f64> = (0..=max_degree)
            .map(|k| {
                let ln_h = if k == 0 {
                    (ab + 1.0) * ln2 + 2.0 * ln_gamma(alpha + 1.0) - ln_gamma(ab + 2.0)
                } else {
                    let kf = k as f64;
                    (ab + 1.0) * ln2 + 2.0 * ln_gamma(kf + alpha + 1.0)
                        - ln_gamma(kf + 1.0)
                        - (2.0 * kf + ab + 1.0).ln()
                        - ln_gamma(kf + ab + 1.0)
                };
                ln_h.exp()
            })
            .collect();
        let scale = h
            .iter()
            .map(|hk| 2f64.powf(alpha + 0.5) / hk.sqrt())
            .collect();

        Self {
            alpha,
            max_degree,
            a,
            b,
            c,
            h,
            scale,
            eta_alpha: eta(alpha),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Recurrence coefficients `a_k`, `k = 0..N-1`.
    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// Squared norms `h_k` of the classical polynomials on `[-1, 1]`.
    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn eta_alpha(&self) -> f64 {
        self.eta_alpha
    }

    /// Classical `P_k^{(α,α)}(t)` for `t ∈ [-1, 1]`.
    pub fn eval_classical(&self, k: usize, t: f64) -> f64 {
        assert!(
            k <= self.max_degree,
            "degree {k} exceeds table degree {}",
            self.max_degree
        );
        if k == 0 {
            return 1.0;
        }
        let mut prev = 1.0;
        let mut cur = (self.alpha + 1.0) * t;
        for j in 1..k {
            let next = (self.a[j] * t + self.b[j]) * cur - self.c[j] * prev;
            prev = cur;
            cur = next;
        }
        cur
    }

    /// Orthonormal shifted polynomial `P̃_k(x)` for `x ∈ [0, 1]`.
    pub fn eval_normalized(&self, k: usize, x: f64) -> f64 {
        self.scale[k] * self.eval_classical(k, 2.0 * x - 1.0)
    }

    /// All of `P̃_0(x), …, P̃_N(x)` from a single recurrence sweep.
    pub fn eval_all(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.max_degree + 1];
        self.eval_all_into(x, &mut out);
        out
    }

    /// Writes `P̃_0(x), …, P̃_{len-1}(x)` into `out`; `out.len()` may be at most `N + 1`.
    pub fn eval_all_into(&self, x: f64, out: &mut [f64]) {
        let len = out.len();
        assert!(len <= self.max_degree + 1, "output longer than table");
        if len == 0 {
            return;
        }
        let t = 2.0 * x - 1.0;
        let mut prev = 1.0;
        out[0] = self.scale[0];
        if len == 1 {
            return;
        }
        let mut cur = (self.alpha + 1.0) * t;
        out[1] = self.scale[1] * cur;
        for j in 1..len - 1 {
            let next = (self.a[j] * t + self.b[j]) * cur - self.c[j] * prev;
            prev = cur;
            cur = next;
            out[j + 1] = self.scale[j + 1] * cur;
        }
    }
}

/// Builds the recurrence table for degrees `0..=max_degree`.
pub fn build_table(params: JacobiParams, max_degree: usize) -> JacobiTable {
    JacobiTable::new(params, max_degree)
}

/// `η_α k^α sqrt(k + α + 1/2)` for `k ≥ 2`.
///
/// This bounds `max |P_k / sqrt(h_k)|` on `[-1, 1]`. The shifted `P̃_k` is
/// `2^{α+1/2}` times that polynomial, so the value bounds `max |P̃_k|` only at
/// `α = -1/2`; at `α = 0` the two agree at the endpoints and for larger `α`
/// the bound is exceeded.
pub fn sup_bound(params: JacobiParams, k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::invalid(format!(
            "sup bound holds only for degree k >= 2, got {k}"
        )));
    }
    let alpha = params.alpha;
    let kf = k as f64;
    Ok(eta(alpha) * kf.powf(alpha) * (kf + alpha + 0.5).sqrt())
}
