use crate::error::{Error, Result};

/// Eigen-decomposition of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Row-major `n × n`; column `j` is the unit eigenvector of `values[j]`.
    pub vectors: Vec<f64>,
    pub sweeps: usize,
}

/// Cyclic Jacobi rotations on a dense symmetric `n × n` row-major matrix.
///
/// Sweeps stop once the off-diagonal Frobenius norm falls to
/// `rel_tol · ‖A‖_F`; more than `max_sweeps` sweeps is an error.
pub fn symmetric_eigen(
    matrix: &[f64],
    n: usize,
    rel_tol: f64,
    max_sweeps: usize,
) -> Result<SymmetricEigen> {
    assert_eq!(matrix.len(), n * n, "matrix is not n x n");
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let total: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = rel_tol * total;
    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += 2.0 * a[p * n + q] * a[p * n + q];
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off <= target || total == 0.0 {
            break;
        }
        if sweeps == max_sweeps {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;

                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r * n + new_col] = v[r * n + old_col];
        }
    }
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_and_two_by_two() {
        let e = symmetric_eigen(&[4.0, 0.0, 0.0, 1.0], 2, 1e-14, 30).unwrap();
        assert_eq!(e.values, vec![1.0, 4.0]);
        let e = symmetric_eigen(&[2.0, 1.0, 1.0, 2.0], 2, 1e-14, 30).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn reconstructs_random_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 25;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v: f64 = rng.random_range(-1.0..1.0);
                m[i * n + j] = v;
                m[j * n + i] = v;
            }
        }
        let e = symmetric_eigen(&m, n, 1e-14, 50).unwrap();
        for i in 0..n {
            for j in 0..n {
                let r: f64 = (0..n)
                    .map(|k| e.vectors[i * n + k] * e.values[k] * e.vectors[j * n + k])
                    .sum();
                assert!((r - m[i * n + j]).abs() < 1e-12);
            }
        }
        let trace: f64 = (0..n).map(|i| m[i * n + i]).sum();
        assert!((e.values.iter().sum::<f64>() - trace).abs() < 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn sweep_cap_reports_non_convergence() {
        let m = [1.0, 0.5, 0.5, 2.0];
        assert!(matches!(
            symmetric_eigen(&m, 2, 1e-14, 0),
            Err(Error::NoConvergence { .. })
        ));
    }
}
