use super::{axpy, check_dim, dot, norm, DenseMatrix, Rng, Vector};
use crate::error::{Error, Result};

/// Householder QR of a square matrix. Returns `(Q, R)` with `Q` orthogonal
/// and `R` upper triangular, without any sign normalization.
pub fn householder_qr(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let n = a.rows();
    assert_eq!(n, a.cols(), "householder_qr expects a square matrix");
    let mut r = a.clone();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(n);

    for k in 0..n.saturating_sub(1) {
        let mut v: Vec<f64> = (k..n).map(|i| r[(i, k)]).collect();
        let alpha = norm(&v);
        if alpha == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        v[0] += if v[0] >= 0.0 { alpha } else { -alpha };
        let vn = norm(&v);
        v.iter_mut().for_each(|x| *x /= vn);
        // R[k.., k..] -= 2 v (vᵀ R[k.., k..])
        for j in k..n {
            let s: f64 = (k..n).map(|i| v[i - k] * r[(i, j)]).sum();
            for i in k..n {
                r[(i, j)] -= 2.0 * v[i - k] * s;
            }
        }
        for i in k + 1..n {
            r[(i, k)] = 0.0;
        }
        reflectors.push(v);
    }

    // Q = H_0 H_1 ... H_{n-2}, accumulated right to left onto the identity.
    let mut q = DenseMatrix::identity(n);
    for (k, v) in reflectors.iter().enumerate().rev() {
        if v.is_empty() {
            continue;
        }
        for j in 0..n {
            let s: f64 = (k..n).map(|i| v[i - k] * q[(i, j)]).sum();
            for i in k..n {
                q[(i, j)] -= 2.0 * v[i - k] * s;
            }
        }
    }
    (q, r)
}

/// Random orthogonal matrix: Q factor of a Gaussian matrix, with the signs
/// of diag(R) absorbed into Q so that the result is unique for a given seed.
pub fn random_orthogonal(n: usize, rng: &mut Rng) -> DenseMatrix {
    assert!(n >= 1, "random_orthogonal needs n >= 1");
    let mut g = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = rng.normal();
        }
    }
    let (mut q, r) = householder_qr(&g);
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// Solves `A x = b` for symmetric positive definite `A` via Cholesky.
/// Only the lower triangle of `A` is read.
pub fn cholesky_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vector> {
    let n = a.rows();
    check_dim(n, a.cols())?;
    check_dim(n, b.len())?;

    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) {
            return Err(Error::NonPositiveDefinite { pivot: j, value: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }

    let mut y = b.to_vec();
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[(i, k)] * y[k]).sum();
        y[i] = (y[i] - s) / l[(i, i)];
    }
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[(k, i)] * y[k]).sum();
        y[i] = (y[i] - s) / l[(i, i)];
    }
    Vector::new(y)
}

#[derive(Debug, Clone, Copy)]
pub struct PowerIterationOptions {
    /// Relative residual target: stops once ‖Av − λv‖ ≤ tol·λ.
    pub tol: f64,
    pub max_iter: usize,
    /// Seed of the random starting vector.
    pub seed: u64,
}

impl Default for PowerIterationOptions {
    fn default() -> Self {
        PowerIterationOptions { tol: 1e-8, max_iter: 100_000, seed: 0x5EED }
    }
}

/// Largest eigenvalue of a symmetric positive semidefinite operator.
///
/// Iterates v ← Av/‖Av‖ from a seeded Gaussian start and returns the
/// Rayleigh quotient once the eigen-residual drops below `tol·λ`. For a
/// symmetric operator the residual bounds the distance from λ̂ to the
/// spectrum, so the answer is within `tol·λ` of an eigenvalue.
pub fn power_iteration_lmax<F>(matvec: F, n: usize, opts: PowerIterationOptions) -> Result<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    assert!(n >= 1 && opts.tol > 0.0);
    let mut rng = Rng::new(opts.seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    let vn = norm(&v);
    v.iter_mut().for_each(|x| *x /= vn);

    for _ in 0..opts.max_iter {
        let av = matvec(&v);
        let lambda = dot(&v, &av);
        let mut r = av.clone();
        axpy(-lambda, &v, &mut r);
        let avn = norm(&av);
        if avn == 0.0 {
            // v lies in the null space; a PSD operator with Av = 0 for a
            // random v is the zero operator.
            return Ok(0.0);
        }
        if norm(&r) <= opts.tol * lambda.abs() {
            return Ok(lambda);
        }
        v = av;
        v.iter_mut().for_each(|x| *x /= avn);
    }
    Err(Error::NoConvergence { iterations: opts.max_iter })
}
