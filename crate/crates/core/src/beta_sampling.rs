//! Seeded Beta(α+1, α+1) random designs and Gaussian noise.
//!
//! Randomness comes from ChaCha8 generators. A single user seed feeds several
//! independent sub-streams selected with [`ChaCha8Rng::set_stream`]:
//!
//! | stream | use |
//! |--------|-----|
//! | `0` | i.i.d. design points, drawn row by row |
//! | `1 + j` | axis `j` of a tensor-grid design |
//! | [`NOISE_STREAM`] | additive noise |
//! | [`SPLIT_STREAM`] | train/test permutations |
//! | [`PROBE_STREAM`] | Shepard radius probes |
//!
//! Monte-Carlo trial `t` under base seed `s` uses seed [`trial_seed`]`(s, t)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::jacobi_poly::{weight_mass, JacobiParams};

pub const DESIGN_STREAM: u64 = 0;
pub const NOISE_STREAM: u64 = 0x6e6f_6973_6500_0000;
pub const SPLIT_STREAM: u64 = 0x7370_6c69_7400_0000;
pub const PROBE_STREAM: u64 = 0x7072_6f62_6500_0000;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of Monte-Carlo trial `trial`: `splitmix64(seed ^ splitmix64(trial))`.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    splitmix64(seed ^ splitmix64(trial))
}

/// Generator for `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub alpha: f64,
    pub d: usize,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(alpha: f64, d: usize, seed: u64) -> Result<Self> {
        JacobiParams::new(alpha)?;
        if d == 0 {
            return Err(Error::invalid("dimension d must be >= 1"));
        }
        Ok(Self { alpha, d, seed })
    }
}

/// How design points are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Design {
    /// `n` independent points, each with `d` independent Beta coordinates.
    #[default]
    Iid,
    /// `n_1` independent Beta draws per axis and every combination of them,
    /// `n = n_1^d` points in total.
    Grid,
}

impl std::str::FromStr for Design {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid" => Ok(Design::Iid),
            "grid" => Ok(Design::Grid),
            other => Err(Error::invalid(format!(
                "unknown design '{other}' (expected 'iid' or 'grid')"
            ))),
        }
    }
}

/// `n` design points in `[0,1]^d` (row-major) with optional responses.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    d: usize,
    x: Vec<f64>,
    y: Option<Vec<f64>>,
}

impl SampleSet {
    pub fn new(d: usize, x: Vec<f64>, y: Option<Vec<f64>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimension d must be >= 1"));
        }
        if !x.len().is_multiple_of(d) {
            return Err(Error::invalid(format!(
                "coordinate buffer of length {} is not a multiple of d = {d}",
                x.len()
            )));
        }
        let n = x.len() / d;
        if let Some(y) = &y {
            if y.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: y.len(),
                });
            }
        }
        Ok(Self { d, x, y })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.x.len() / self.d
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.x.chunks_exact(self.d)
    }

    pub fn coords(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> Option<&[f64]> {
        self.y.as_deref()
    }

    pub fn with_y(mut self, y: Vec<f64>) -> Result<Self> {
        if y.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: y.len(),
            });
        }
        self.y = Some(y);
        Ok(self)
    }

    /// Responses `f(X_i)` evaluated at every point.
    pub fn map_points(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        self.points().map(f).collect()
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> SampleSet {
        let mut x = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            x.extend_from_slice(self.point(i));
        }
        let y = self
            .y
            .as_ref()
            .map(|y| indices.iter().map(|&i| y[i]).collect());
        SampleSet { d: self.d, x, y }
    }
}

struct BetaSampler {
    gamma: Gamma<f64>,
}

impl BetaSampler {
    fn new(alpha: f64) -> Self {
        Self {
            gamma: Gamma::new(alpha + 1.0, 1.0).expect("shape alpha + 1 > 0"),
        }
    }

    /// `G1 / (G1 + G2)`, redrawn if rounding produced an exact endpoint.
    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        loop {
            let g1 = self.gamma.sample(rng);
            let g2 = self.gamma.sample(rng);
            let v = g1 / (g1 + g2);
            if v > 0.0 && v < 1.0 {
                return v;
            }
        }
    }
}

/// `n` i.i.d. points with Beta(α+1, α+1) coordinates.
pub fn sample(config: &SamplerConfig, n: usize) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::invalid("sample size n must be >= 1"));
    }
    let beta = BetaSampler::new(config.alpha);
    let mut rng = stream_rng(config.seed, DESIGN_STREAM);
    let x = (0..n * config.d).map(|_| beta.draw(&mut rng)).collect();
    SampleSet::new(config.d, x, None)
}

/// The `n_1^d` points of a tensor grid built from `n_1` Beta draws per axis.
///
/// Each axis has its own stream, so the first `m` draws of an axis do not
/// depend on `n_1 ≥ m` and grids of increasing `n_1` are nested.
pub fn sample_grid(config: &SamplerConfig, n1: usize) -> Result<SampleSet> {
    if n1 == 0 {
        return Err(Error::invalid("grid size n1 must be >= 1"));
    }
    let d = config.d;
    let total = n1
        .checked_pow(d as u32)
        .filter(|&t| t <= 100_000_000)
        .ok_or_else(|| Error::invalid(format!("grid of {n1}^{d} points is too large")))?;
    let beta = BetaSampler::new(config.alpha);
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            let mut rng = stream_rng(config.seed, 1 + j as u64);
            (0..n1).map(|_| beta.draw(&mut rng)).collect()
        })
        .collect();
    let mut x = Vec::with_capacity(total * d);
    for i in 0..total {
        let mut rest = i;
        for axis in &axes {
            x.push(axis[rest % n1]);
            rest /= n1;
        }
    }
    SampleSet::new(d, x, None)
}

/// Design points following `design`; `size` is `n` for i.i.d. and `n_1` for grids.
pub fn sample_design(config: &SamplerConfig, design: Design, size: usize) -> Result<SampleSet> {
    match design {
        Design::Iid => sample(config, size),
        Design::Grid => sample_grid(config, size),
    }
}

/// Product Beta density `h_{α+1}(x) = Π_j ω_α(x_j) / β(α+1,α+1)^d`.
pub fn density(alpha: f64, x: &[f64]) -> Result<f64> {
    JacobiParams::new(alpha)?;
    if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Ok(0.0);
    }
    if alpha < 0.0 && x.iter().any(|&v| v == 0.0 || v == 1.0) {
        return Err(Error::SingularEvaluation {
            alpha,
            point: x.to_vec(),
        });
    }
    let mass = weight_mass(alpha);
    Ok(x.iter()
        .map(|&v| (v * (1.0 - v)).powf(alpha) / mass)
        .product())
}

/// `y + σ ε` with i.i.d. standard normal `ε` from the noise stream of `seed`.
pub fn add_noise(y_clean: &[f64], sigma: f64, seed: u64) -> Result<Vec<f64>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("sigma must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(y_clean.to_vec());
    }
    let mut rng = stream_rng(seed, NOISE_STREAM);
    Ok(y_clean
        .iter()
        .map(|&v| {
            let e: f64 = StandardNormal.sample(&mut rng);
            v + sigma * e
        })
        .collect())
}
