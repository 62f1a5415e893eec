use super::libsvm::Dataset;
use crate::error::{Error, Result};
use crate::numkit::{power_iteration_lmax, PowerIterationOptions};
use crate::oracle::{LineFunction, Problem};

/// `log(1 + e^{-t})` without overflow.
pub fn softplus_neg(t: f64) -> f64 {
    if t >= 0.0 {
        (-t).exp().ln_1p()
    } else {
        -t + t.exp().ln_1p()
    }
}

/// `σ(−t) = 1/(1 + e^{t})` without overflow.
pub fn sigmoid_neg(t: f64) -> f64 {
    if t >= 0.0 {
        let e = (-t).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + t.exp())
    }
}

/// Binary logistic loss `f(x) = (1/m) Σ log(1 + exp(−y_j z_jᵀx))`.
///
/// Features are kept both row-major (for values and gradients) and
/// column-major (so a partial derivative only touches rows that contain the
/// feature).
#[derive(Debug, Clone)]
pub struct LogisticProblem {
    m: usize,
    n: usize,
    labels: Vec<f64>,
    row_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    row_val: Vec<f64>,
    col_ptr: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
}

impl LogisticProblem {
    /// Builds the problem; `n_features` widens the dimension beyond the
    /// largest index present in the data.
    pub fn new(ds: &Dataset, n_features: Option<usize>) -> Result<Self> {
        let n = match n_features {
            Some(n) if n < ds.n_features => {
                return Err(Error::InvalidConfig(format!(
                    "n_features = {n} is smaller than the data's {} features",
                    ds.n_features
                )))
            }
            Some(n) => n,
            None => ds.n_features,
        };
        if n == 0 || ds.is_empty() {
            return Err(Error::InvalidConfig("logistic problem needs at least one row and one feature".into()));
        }
        let mut labels = Vec::with_capacity(ds.len());
        let mut row_ptr = vec![0];
        let mut row_idx = Vec::with_capacity(ds.nnz());
        let mut row_val = Vec::with_capacity(ds.nnz());
        let mut col_count = vec![0usize; n];
        for (j, row) in ds.rows.iter().enumerate() {
            if row.label != 1.0 && row.label != -1.0 {
                return Err(Error::MappedLabel { row: j, label: row.label });
            }
            labels.push(row.label);
            for &(i, v) in &row.features {
                row_idx.push(i);
                row_val.push(v);
                col_count[i] += 1;
            }
            row_ptr.push(row_idx.len());
        }

        let mut col_ptr = vec![0usize; n + 1];
        for i in 0..n {
            col_ptr[i + 1] = col_ptr[i] + col_count[i];
        }
        let mut fill = col_ptr.clone();
        let mut col_row = vec![0; row_idx.len()];
        let mut col_val = vec![0.0; row_idx.len()];
        for j in 0..labels.len() {
            for k in row_ptr[j]..row_ptr[j + 1] {
                let i = row_idx[k];
                col_row[fill[i]] = j;
                col_val[fill[i]] = row_val[k];
                fill[i] += 1;
            }
        }

        Ok(LogisticProblem { m: labels.len(), n, labels, row_ptr, row_idx, row_val, col_ptr, col_row, col_val })
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    fn row_dot(&self, j: usize, x: &[f64]) -> f64 {
        (self.row_ptr[j]..self.row_ptr[j + 1]).map(|k| self.row_val[k] * x[self.row_idx[k]]).sum()
    }

    /// Margins `t_j = y_j z_jᵀx`.
    fn margins(&self, x: &[f64]) -> Vec<f64> {
        (0..self.m).map(|j| self.labels[j] * self.row_dot(j, x)).collect()
    }

    /// `v ↦ Zᵀ(Zv)/(4m)`, whose top eigenvalue bounds the Hessian.
    pub fn gauss_newton_bound(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for j in 0..self.m {
            let zv = self.row_dot(j, v);
            for k in self.row_ptr[j]..self.row_ptr[j + 1] {
                out[self.row_idx[k]] += self.row_val[k] * zv;
            }
        }
        let s = 1.0 / (4.0 * self.m as f64);
        out.iter_mut().for_each(|o| *o *= s);
        out
    }

    /// `λ_max(ZᵀZ)/(4m)`, an upper bound on the gradient's Lipschitz constant.
    pub fn lf_estimate(&self) -> Result<f64> {
        let opts = PowerIterationOptions { tol: 1e-8, ..Default::default() };
        power_iteration_lmax(|v| self.gauss_newton_bound(v), self.n, opts)
    }
}

impl Problem for LogisticProblem {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        // Accumulate deviations from log 2 so that f(0) = log 2 exactly.
        let ln2 = std::f64::consts::LN_2;
        let dev: f64 = self.margins(x).iter().map(|&t| softplus_neg(t) - ln2).sum();
        ln2 + dev / self.m as f64
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        let inv_m = 1.0 / self.m as f64;
        for j in 0..self.m {
            let y = self.labels[j];
            let w = -sigmoid_neg(y * self.row_dot(j, x)) * y * inv_m;
            for k in self.row_ptr[j]..self.row_ptr[j + 1] {
                g[self.row_idx[k]] += w * self.row_val[k];
            }
        }
        g
    }

    fn partial(&self, i: usize, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for k in self.col_ptr[i]..self.col_ptr[i + 1] {
            let j = self.col_row[k];
            let y = self.labels[j];
            s -= sigmoid_neg(y * self.row_dot(j, x)) * y * self.col_val[k];
        }
        s / self.m as f64
    }

    fn line<'s>(&'s self, x: &[f64], d: &[f64]) -> Option<Box<dyn LineFunction + 's>> {
        Some(Box::new(LogisticLine { u: self.margins(x), v: self.margins(d), inv_m: 1.0 / self.m as f64 }))
    }
}

/// `φ(h) = (1/m) Σ log(1 + exp(−(u_j + h v_j)))` with margins precomputed.
struct LogisticLine {
    u: Vec<f64>,
    v: Vec<f64>,
    inv_m: f64,
}

impl LineFunction for LogisticLine {
    fn value(&self, h: f64) -> f64 {
        self.u.iter().zip(&self.v).map(|(u, v)| softplus_neg(u + h * v)).sum::<f64>() * self.inv_m
    }

    fn slope(&self, h: f64) -> f64 {
        -self.u.iter().zip(&self.v).map(|(u, v)| sigmoid_neg(u + h * v) * v).sum::<f64>() * self.inv_m
    }
}

#[cfg(test)]
mod tests {
    use super::super::libsvm::{parse_libsvm, Row};
    use super::*;

    fn single(z: Vec<(usize, f64)>, y: f64, n: usize) -> LogisticProblem {
        let ds = Dataset { rows: vec![Row { label: y, features: z }], n_features: n };
        LogisticProblem::new(&ds, None).unwrap()
    }

    #[test]
    fn value_at_zero_is_ln2() {
        let ds = parse_libsvm("+1 1:0.3 4:2\n-1 2:1\n-1 1:1 3:1\n+1 2:5\n-1 4:0.1\n").unwrap();
        let p = LogisticProblem::new(&ds, Some(10)).unwrap();
        assert_eq!(p.value(&[0.0; 10]), std::f64::consts::LN_2);
    }

    #[test]
    fn single_row_gradient() {
        // σ(0) = ½, so ∇f(0) = −½·y·z.
        let p = single(vec![(0, 1.0)], 1.0, 2);
        assert_eq!(p.gradient(&[0.0, 0.0]), vec![-0.5, 0.0]);
        assert_eq!(p.partial(0, &[0.0, 0.0]), -0.5);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let ds = crate::problems::a1a_like(20, 11);
        let p = LogisticProblem::new(&ds, None).unwrap();
        let mut rng = crate::numkit::Rng::new(12);
        let x: Vec<f64> = (0..p.dim()).map(|_| 0.3 * rng.normal()).collect();
        let g = p.gradient(&x);
        let h = 1e-6;
        for i in 0..p.dim() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (p.value(&xp) - p.value(&xm)) / (2.0 * h);
            assert!((fd - g[i]).abs() <= 1e-4 * g[i].abs().max(1e-3), "coordinate {i}: {fd} vs {}", g[i]);
            assert!((p.partial(i, &x) - g[i]).abs() <= 1e-15);
        }
    }

    #[test]
    fn single_row_lf() {
        let p = single(vec![(0, 1.0)], 1.0, 2);
        assert!((p.lf_estimate().unwrap() - 0.25).abs() < 1e-9);
    }

    #[test]
    fn stable_for_large_margins() {
        assert_eq!(softplus_neg(800.0), 0.0);
        assert!((softplus_neg(-800.0) - 800.0).abs() < 1e-9);
        assert_eq!(sigmoid_neg(-800.0), 1.0);
        assert_eq!(sigmoid_neg(800.0), 0.0);
    }

    #[test]
    fn bad_labels_rejected() {
        let ds = parse_libsvm("+1 1:1\n0 2:1\n").unwrap();
        assert_eq!(LogisticProblem::new(&ds, None).unwrap_err(), Error::MappedLabel { row: 1, label: 0.0 });
    }

    #[test]
    fn n_features_cannot_shrink() {
        let ds = parse_libsvm("+1 5:1\n").unwrap();
        assert!(LogisticProblem::new(&ds, Some(3)).is_err());
        assert_eq!(LogisticProblem::new(&ds, Some(123)).unwrap().dim(), 123);
    }

    #[test]
    fn line_matches_value_and_gradient() {
        let ds = parse_libsvm("+1 1:0.3 4:2\n-1 2:1\n-1 1:1 3:1\n+1 2:5\n").unwrap();
        let p = LogisticProblem::new(&ds, None).unwrap();
        let x = [0.1, -0.2, 0.3, 0.05];
        let d = [1.0, 0.5, -0.25, 2.0];
        let line = p.line(&x, &d).unwrap();
        for &h in &[0.0, 0.3, -1.2] {
            let xh: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + h * b).collect();
            assert!((line.value(h) - p.value(&xh)).abs() < 1e-14);
            let g = p.gradient(&xh);
            let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
            assert!((line.slope(h) - slope).abs() < 1e-14);
        }
    }
}
