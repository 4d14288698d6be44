//! Shepard inverse-distance interpolation of scattered data, and resampling
//! of scattered observations onto Beta-distributed design points.

use rand::Rng;
use rayon::prelude::*;

use crate::beta_sampling::{sample_design, stream_rng, Design, SampleSet, SamplerConfig, PROBE_STREAM};
use crate::error::{Error, Result};

/// Default power `μ`.
pub const DEFAULT_MU: f64 = 3.0;

/// Distances below this fraction of the diameter count as a node hit.
const HIT_REL_TOL: f64 = 1e-12;

const PROBES: usize = 32;

/// Distinct scattered nodes with attached values.
#[derive(Debug, Clone)]
pub struct ScatterSet {
    d: usize,
    nodes: Vec<f64>,
    values: Vec<f64>,
    /// Diagonal of the bounding box, an upper bound on the point-set diameter.
    diam: f64,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl ScatterSet {
    /// Exact duplicate nodes are merged into one whose value is the mean.
    pub fn new(d: usize, nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimension d must be >= 1"));
        }
        if !nodes.len().is_multiple_of(d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: nodes.len() % d,
            });
        }
        let n = nodes.len() / d;
        if values.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: values.len(),
            });
        }
        if n == 0 {
            return Err(Error::Empty("scatter set has no nodes".into()));
        }
        if nodes.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::invalid("scatter nodes and values must be finite"));
        }

        let mut order: Vec<usize> = (0..n).collect();
        let key = |i: usize| &nodes[i * d..(i + 1) * d];
        order.sort_by(|&i, &j| {
            key(i)
                .iter()
                .zip(key(j))
                .map(|(a, b)| a.total_cmp(b))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(i.cmp(&j))
        });
        // Group equal nodes, keeping the position of each group's first member.
        let mut groups: Vec<(usize, f64, usize)> = Vec::new();
        let mut prev: Option<usize> = None;
        for &i in &order {
            match prev {
                Some(p) if key(p) == key(i) => {
                    let g = groups.last_mut().expect("group exists");
                    g.1 += values[i];
                    g.2 += 1;
                }
                _ => groups.push((i, values[i], 1)),
            }
            prev = Some(i);
        }
        let merged = n - groups.len();
        if merged > 0 {
            log::info!("merged {merged} duplicate scatter nodes by averaging their values");
        }
        groups.sort_by_key(|g| g.0);
        let mut out_nodes = Vec::with_capacity(groups.len() * d);
        let mut out_values = Vec::with_capacity(groups.len());
        for (i, sum, count) in groups {
            out_nodes.extend_from_slice(key(i));
            out_values.push(sum / count as f64);
        }

        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for p in out_nodes.chunks_exact(d) {
            for j in 0..d {
                lo[j] = lo[j].min(p[j]);
                hi[j] = hi[j].max(p[j]);
            }
        }
        let diam = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| (b - a).powi(2))
            .sum::<f64>()
            .sqrt();
        Ok(Self {
            d,
            nodes: out_nodes,
            values: out_values,
            diam,
            lo,
            hi,
        })
    }

    pub fn from_samples(set: &SampleSet) -> Result<Self> {
        let y = set
            .y()
            .ok_or_else(|| Error::invalid("scatter data needs a y column"))?;
        Self::new(set.d(), set.coords().to_vec(), y.to_vec())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.d..(i + 1) * self.d]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn diam(&self) -> f64 {
        self.diam
    }

    fn check_query(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: x.len(),
            });
        }
        Ok(())
    }

    fn distances(&self, x: &[f64]) -> Vec<f64> {
        self.nodes
            .chunks_exact(self.d)
            .map(|p| p.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .collect()
    }

    /// First node within the zero-distance guard of `x`.
    fn hit(&self, dist: &[f64]) -> Option<usize> {
        let tol = HIT_REL_TOL * self.diam;
        dist.iter().position(|&r| r <= tol)
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::invalid(format!("power mu must be positive, got {mu}")));
    }
    Ok(())
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0) {
        return Err(Error::invalid(format!("radius R must be positive, got {r}")));
    }
    Ok(())
}

/// Normalizes raw weights; a node hit yields the matching unit vector.
fn normalize(mut w: Vec<f64>) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    for v in &mut w {
        *v /= s;
    }
    w
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut w = vec![0.0; n];
    w[i] = 1.0;
    w
}

/// Normalized weights `d_i^{-μ} / Σ_k d_k^{-μ}`.
pub fn shepard_weights(scatter: &ScatterSet, mu: f64, x: &[f64]) -> Result<Vec<f64>> {
    check_mu(mu)?;
    scatter.check_query(x)?;
    let dist = scatter.distances(x);
    if let Some(i) = scatter.hit(&dist) {
        return Ok(unit(dist.len(), i));
    }
    // Scaling by the smallest distance keeps every ratio in (0, 1].
    let dmin = dist.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(normalize(dist.iter().map(|&r| (dmin / r).powf(mu)).collect()))
}

/// Normalized weights `(1/d_i - 1/R)_+^μ`; nodes at distance `≥ R` get zero.
pub fn modified_weights(scatter: &ScatterSet, mu: f64, radius: f64, x: &[f64]) -> Result<Vec<f64>> {
    check_mu(mu)?;
    check_radius(radius)?;
    scatter.check_query(x)?;
    let dist = scatter.distances(x);
    if let Some(i) = scatter.hit(&dist) {
        return Ok(unit(dist.len(), i));
    }
    let t: Vec<f64> = dist
        .iter()
        .map(|&r| if r < radius { 1.0 / r - 1.0 / radius } else { 0.0 })
        .collect();
    let tmax = t.iter().copied().fold(0.0, f64::max);
    if !(tmax > 0.0) {
        return Err(Error::NoNodeInRange { radius });
    }
    Ok(normalize(
        t.iter()
            .map(|&v| if v > 0.0 { (v / tmax).powf(mu) } else { 0.0 })
            .collect(),
    ))
}

/// `Σ w_i f_i` over the nonzero weights, clamped into the range of the
/// contributing values to absorb rounding.
fn combine(values: &[f64], weights: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (&f, &w) in values.iter().zip(weights) {
        if w > 0.0 {
            num += w * f;
            den += w;
            lo = lo.min(f);
            hi = hi.max(f);
        }
    }
    (num / den).clamp(lo, hi)
}

/// Original Shepard interpolant; returns `f_i` exactly at node `x_i`.
pub fn shepard_eval(scatter: &ScatterSet, mu: f64, x: &[f64]) -> Result<f64> {
    let w = shepard_weights(scatter, mu, x)?;
    Ok(combine(&scatter.values, &w))
}

/// Modified Shepard interpolant with compact support `R`.
pub fn shepard_modified_eval(scatter: &ScatterSet, mu: f64, radius: f64, x: &[f64]) -> Result<f64> {
    let w = modified_weights(scatter, mu, radius, x)?;
    Ok(combine(&scatter.values, &w))
}

/// Per-coordinate affine map sending `[min_j, max_j]` onto `[0, 1]`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AffineTransform {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl AffineTransform {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(v, (lo, hi))| (v - lo) / (hi - lo))
            .collect()
    }

    pub fn inverse(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(v, (lo, hi))| lo + v * (hi - lo))
            .collect()
    }
}

/// Maps raw nodes (row-major, `d` columns) onto `[0,1]^d`.
pub fn affine_to_unit_cube(d: usize, raw: &[f64]) -> Result<(Vec<f64>, AffineTransform)> {
    if d == 0 || !raw.len().is_multiple_of(d) {
        return Err(Error::invalid("raw node array does not match dimension"));
    }
    if raw.len() / d < 2 {
        return Err(Error::invalid("affine normalization needs at least 2 nodes"));
    }
    let mut min = vec![f64::INFINITY; d];
    let mut max = vec![f64::NEG_INFINITY; d];
    for p in raw.chunks_exact(d) {
        for j in 0..d {
            min[j] = min[j].min(p[j]);
            max[j] = max[j].max(p[j]);
        }
    }
    if let Some(j) = (0..d).find(|&j| !(max[j] > min[j])) {
        return Err(Error::invalid(format!(
            "coordinate {} is degenerate (all values equal {})",
            j + 1,
            min[j]
        )));
    }
    let t = AffineTransform { min, max };
    let mut out: Vec<f64> = raw.chunks_exact(d).flat_map(|p| t.apply(p)).collect();
    for v in &mut out {
        *v = v.clamp(0.0, 1.0);
    }
    Ok((out, t))
}

/// `1.5 ×` the mean radius enclosing the `max(10, ⌈0.02 n⌉)` nearest nodes of
/// 32 probe points drawn uniformly in the bounding box.
pub fn default_radius(scatter: &ScatterSet, seed: u64) -> f64 {
    let n = scatter.n();
    let k = 10usize.max((0.02 * n as f64).ceil() as usize).min(n);
    let mut rng = stream_rng(seed, PROBE_STREAM);
    let mut total = 0.0;
    for _ in 0..PROBES {
        let probe: Vec<f64> = (0..scatter.d)
            .map(|j| {
                let (lo, hi) = (scatter.lo[j], scatter.hi[j]);
                if hi > lo {
                    rng.random_range(lo..=hi)
                } else {
                    lo
                }
            })
            .collect();
        let mut dist = scatter.distances(&probe);
        let (_, kth, _) = dist.select_nth_unstable_by(k - 1, f64::total_cmp);
        total += *kth;
    }
    let r = 1.5 * total / PROBES as f64;
    if r > 0.0 {
        r
    } else {
        // Single repeated location: any positive radius covers it.
        1.0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ShepardConfig {
    pub mu: f64,
    /// `None` selects [`default_radius`].
    pub radius: Option<f64>,
}

impl Default for ShepardConfig {
    fn default() -> Self {
        Self {
            mu: DEFAULT_MU,
            radius: None,
        }
    }
}

impl ShepardConfig {
    pub fn new(mu: f64, radius: Option<f64>) -> Result<Self> {
        check_mu(mu)?;
        if let Some(r) = radius {
            check_radius(r)?;
        }
        Ok(Self { mu, radius })
    }
}

/// Draws Beta design points and assigns each the modified Shepard value of
/// `scatter`, falling back to the original interpolant where no node lies
/// within `R`. `scatter` must already live in `[0,1]^d`.
pub fn resample_to_beta(
    scatter: &ScatterSet,
    sampler: &SamplerConfig,
    design: Design,
    size: usize,
    config: ShepardConfig,
) -> Result<SampleSet> {
    if scatter.d() != sampler.d {
        return Err(Error::DimensionMismatch {
            expected: scatter.d(),
            found: sampler.d,
        });
    }
    if scatter.nodes.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::invalid(
            "scatter nodes must lie in the unit cube (normalize them first)",
        ));
    }
    let config = ShepardConfig::new(config.mu, config.radius)?;
    let radius = config
        .radius
        .unwrap_or_else(|| default_radius(scatter, sampler.seed));
    let points = sample_design(sampler, design, size)?;
    let results: Vec<(f64, bool)> = points
        .coords()
        .par_chunks_exact(scatter.d())
        .map(|p| match shepard_modified_eval(scatter, config.mu, radius, p) {
            Ok(v) => Ok((v, false)),
            Err(Error::NoNodeInRange { .. }) => shepard_eval(scatter, config.mu, p).map(|v| (v, true)),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let fallbacks = results.iter().filter(|r| r.1).count();
    if fallbacks > 0 {
        log::info!(
            "{fallbacks} of {} resampled points had no node within R = {radius:.4}; used the original Shepard interpolant",
            results.len()
        );
    }
    points.with_y(results.into_iter().map(|r| r.0).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_scatter(rng: &mut ChaCha8Rng, n: usize, d: usize) -> ScatterSet {
        let nodes = (0..n * d).map(|_| rng.random::<f64>()).collect();
        let values = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        ScatterSet::new(d, nodes, values).unwrap()
    }

    #[test]
    fn duplicates_are_averaged() {
        let s = ScatterSet::new(1, vec![0.5, 0.1, 0.5], vec![1.0, 7.0, 3.0]).unwrap();
        assert_eq!(s.n(), 2);
        assert_eq!(s.node(0), &[0.5]);
        assert_eq!(s.values(), &[2.0, 7.0]);
        assert!(ScatterSet::new(1, vec![], vec![]).is_err());
    }

    #[test]
    fn constants_are_reproduced() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = random_scatter(&mut rng, 40, 2);
        s.values.iter_mut().for_each(|v| *v = 4.25);
        for _ in 0..100 {
            let x = [rng.random::<f64>(), rng.random::<f64>()];
            assert_eq!(shepard_eval(&s, 3.0, &x).unwrap(), 4.25);
            assert_eq!(shepard_modified_eval(&s, 3.0, 10.0, &x).unwrap(), 4.25);
        }
    }

    #[test]
    fn nodes_are_interpolated_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = random_scatter(&mut rng, 30, 3);
        for i in 0..s.n() {
            assert_eq!(shepard_eval(&s, 2.0, s.node(i)).unwrap(), s.values()[i]);
            assert_eq!(shepard_modified_eval(&s, 2.0, 0.3, s.node(i)).unwrap(), s.values()[i]);
        }
    }

    #[test]
    fn far_nodes_do_not_matter() {
        let s = ScatterSet::new(1, vec![0.0, 0.1, 0.9], vec![1.0, 2.0, 3.0]).unwrap();
        let x = [0.05];
        let before = shepard_modified_eval(&s, 3.0, 0.3, &x).unwrap();
        let mut t = s.clone();
        t.values[2] = -1e6;
        assert_eq!(shepard_modified_eval(&t, 3.0, 0.3, &x).unwrap().to_bits(), before.to_bits());
        assert!(matches!(
            shepard_modified_eval(&s, 3.0, 0.01, &[0.5]),
            Err(Error::NoNodeInRange { .. })
        ));
    }

    #[test]
    fn huge_radius_recovers_original() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_scatter(&mut rng, 50, 2);
        // The weights deviate from d^{-μ} by a relative O(μ d / R).
        for (scale, tol) in [(1e6, 1e-4), (1e12, 1e-10)] {
            let r = scale * s.diam();
            for _ in 0..100 {
                let x = [rng.random::<f64>(), rng.random::<f64>()];
                let a = shepard_eval(&s, 3.0, &x).unwrap();
                let b = shepard_modified_eval(&s, 3.0, r, &x).unwrap();
                assert!((a - b).abs() <= tol);
            }
        }
    }

    #[test]
    fn weights_form_partition_of_unity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = random_scatter(&mut rng, 60, 2);
        for _ in 0..200 {
            let x = [rng.random::<f64>(), rng.random::<f64>()];
            let w = shepard_weights(&s, 2.5, &x).unwrap();
            assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            let w = modified_weights(&s, 2.5, 0.5, &x).unwrap();
            assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            assert!(w.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let s = ScatterSet::new(1, vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        assert!(shepard_eval(&s, 0.0, &[0.5]).is_err());
        assert!(shepard_modified_eval(&s, 1.0, -1.0, &[0.5]).is_err());
        assert!(shepard_eval(&s, 1.0, &[0.5, 0.5]).is_err());
        assert!(ShepardConfig::new(3.0, Some(0.0)).is_err());
    }

    #[test]
    fn affine_examples() {
        let (u, t) = affine_to_unit_cube(1, &[-1.0, 3.0]).unwrap();
        assert_eq!(u, vec![0.0, 1.0]);
        assert_eq!(t.inverse(&[0.25]), vec![0.0]);
        let (u, t) = affine_to_unit_cube(2, &[0.0, 0.0, 1.0, 1.0, 0.3, 0.7]).unwrap();
        assert_eq!(u, vec![0.0, 0.0, 1.0, 1.0, 0.3, 0.7]);
        assert_eq!(t.min, vec![0.0, 0.0]);
        assert_eq!(t.max, vec![1.0, 1.0]);
        assert!(affine_to_unit_cube(2, &[0.0, 1.0, 2.0, 1.0]).is_err());
        assert!(affine_to_unit_cube(1, &[2.0]).is_err());

        let raw = [12.5, -3.0, 17.25, 4.5, 13.0, 0.125];
        let (u, t) = affine_to_unit_cube(2, &raw).unwrap();
        for (p, q) in u.chunks(2).zip(raw.chunks(2)) {
            let back = t.inverse(p);
            for (a, b) in back.iter().zip(q) {
                assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn mesh_refinement_reduces_error() {
        let f = |x: f64| x * (1.0 - x);
        let max_err = |h: f64| {
            let n = (1.0 / h).round() as usize;
            let nodes: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
            let values = nodes.iter().map(|&x| f(x)).collect();
            let s = ScatterSet::new(1, nodes, values).unwrap();
            (0..=1000)
                .map(|i| {
                    let x = i as f64 / 1000.0;
                    (shepard_eval(&s, 3.0, &[x]).unwrap() - f(x)).abs()
                })
                .fold(0.0, f64::max)
        };
        let coarse = max_err(0.1);
        let fine = max_err(0.05);
        assert!(coarse / fine >= 1.5, "ratio {}", coarse / fine);
    }

    #[test]
    fn resampling_constant_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut s = random_scatter(&mut rng, 200, 2);
        let r = default_radius(&s, 9);
        assert!(r > 0.0 && r < s.diam());
        let cfg = SamplerConfig::new(-0.5, 2, 9).unwrap();
        let a = resample_to_beta(&s, &cfg, Design::Iid, 100, ShepardConfig::default()).unwrap();
        let b = resample_to_beta(&s, &cfg, Design::Iid, 100, ShepardConfig::default()).unwrap();
        assert_eq!(a.y(), b.y());
        assert_eq!(a.coords(), b.coords());
        s.values.iter_mut().for_each(|v| *v = -1.5);
        let c = resample_to_beta(&s, &cfg, Design::Grid, 10, ShepardConfig::new(3.0, Some(0.05)).unwrap())
            .unwrap();
        assert_eq!(c.n(), 100);
        assert!(c.y().unwrap().iter().all(|&v| v == -1.5));
    }
}
