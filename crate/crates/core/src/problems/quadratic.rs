use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::numkit::{
    cholesky_solve, dot, power_iteration_lmax, random_orthogonal, DenseMatrix, PowerIterationOptions, Rng,
};
use crate::oracle::{BlockLayout, Problem, ProxTerm};

/// Ridge added to diagonal blocks before the Cholesky solve; `A` is
/// singular by construction.
pub const BLOCK_RIDGE: f64 = 1e-12;

/// `f(x) = ½ xᵀAx` with symmetric positive semidefinite `A`.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    a: DenseMatrix,
    construction: Option<Construction>,
    blocks: Option<BlockLayout>,
}

/// The factors `A = SᵀDS` a generated problem was built from.
#[derive(Debug, Clone)]
pub struct Construction {
    pub s: DenseMatrix,
    pub d: Vec<f64>,
    /// Index with `D_ii = 0`.
    pub zero_index: usize,
}

impl QuadraticProblem {
    /// Degenerate random quadratic: `A = SᵀDS` with `S` random orthogonal,
    /// `D_ii ~ U(0,1)` and one uniformly chosen `D_ii` set to zero.
    pub fn generate(n: usize, rng: &mut Rng) -> Self {
        assert!(n >= 2, "generated quadratics need n >= 2");
        let mut d: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
        let zero_index = rng.index(n);
        d[zero_index] = 0.0;
        let s = random_orthogonal(n, rng);
        let mut a = s.transpose().matmul(&DenseMatrix::from_diag(&d)).matmul(&s);
        a.symmetrize();
        QuadraticProblem { a, construction: Some(Construction { s, d, zero_index }), blocks: None }
    }

    pub fn from_matrix(a: DenseMatrix) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::DimensionMismatch { expected: a.rows(), actual: a.cols() });
        }
        if a.asymmetry() > 1e-12 * a.norm_max().max(1.0) {
            return Err(Error::InvalidConfig("quadratic matrix is not symmetric".into()));
        }
        let mut a = a;
        a.symmetrize();
        Ok(QuadraticProblem { a, construction: None, blocks: None })
    }

    pub fn with_blocks(mut self, layout: BlockLayout) -> Result<Self> {
        if layout.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: layout.dim() });
        }
        self.blocks = Some(layout);
        Ok(self)
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn construction(&self) -> Option<&Construction> {
        self.construction.as_ref()
    }

    /// λ_max(A) by power iteration.
    pub fn lf_estimate(&self) -> Result<f64> {
        let opts = PowerIterationOptions { tol: 1e-8, ..Default::default() };
        power_iteration_lmax(|v| self.a.matvec(v), self.dim(), opts)
    }

    /// Plain-text form: a line with `n`, then `n` whitespace-separated rows.
    /// Floats are written in shortest round-trip form.
    pub fn to_text(&self) -> String {
        let n = self.dim();
        let mut out = format!("{n}\n");
        for i in 0..n {
            let row = self.a.row(i);
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                write!(out, "{v:e}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parses [`to_text`](Self::to_text) output. Lines starting with `#`
    /// are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (ln, header) = lines.next().ok_or(Error::Parse { line: 1, reason: "empty matrix file".into() })?;
        let n: usize =
            header.parse().map_err(|_| Error::Parse { line: ln, reason: format!("bad dimension `{header}`") })?;
        if n == 0 {
            return Err(Error::Parse { line: ln, reason: "dimension must be positive".into() });
        }
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            let (ln, line) =
                lines.next().ok_or(Error::Parse { line: ln + r + 1, reason: format!("expected {n} rows") })?;
            let before = data.len();
            for tok in line.split_whitespace() {
                let v: f64 =
                    tok.parse().map_err(|_| Error::Parse { line: ln, reason: format!("bad number `{tok}`") })?;
                data.push(v);
            }
            if data.len() - before != n {
                return Err(Error::Parse { line: ln, reason: format!("expected {n} entries") });
            }
        }
        if let Some((ln, _)) = lines.next() {
            return Err(Error::Parse { line: ln, reason: "trailing data".into() });
        }
        let a = DenseMatrix::from_row_major(n, n, data).map_err(|e| Error::Parse { line: 1, reason: e.to_string() })?;
        Self::from_matrix(a)
    }
}

impl Problem for QuadraticProblem {
    fn dim(&self) -> usize {
        self.a.rows()
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, &self.a.matvec(x))
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.a.matvec(x)
    }

    fn partial(&self, i: usize, x: &[f64]) -> f64 {
        dot(self.a.row(i), x)
    }

    fn block_layout(&self) -> Option<&BlockLayout> {
        self.blocks.as_ref()
    }

    fn block_argmin(&self, b: usize, x: &[f64], prox: Option<ProxTerm<'_>>) -> Result<Vec<f64>> {
        let layout = self.blocks.as_ref().ok_or(Error::MissingBlockSolver)?;
        let range = layout.block(b);
        let idx: Vec<usize> = range.clone().collect();
        let l = prox.map_or(0.0, |p| p.l);

        // (A_II + (L + ridge)·I) x_I = −A_IJ x_J + L·c_I
        let mut sub = self.a.submatrix(&idx, &idx);
        for k in 0..idx.len() {
            sub[(k, k)] += l + BLOCK_RIDGE;
        }
        let rhs: Vec<f64> = idx
            .iter()
            .map(|&i| {
                let row = self.a.row(i);
                let off: f64 =
                    row.iter().zip(x).enumerate().filter(|(j, _)| !range.contains(j)).map(|(_, (a, v))| a * v).sum();
                -off + prox.map_or(0.0, |p| p.l * p.center[i])
            })
            .collect();
        let sol = cholesky_solve(&sub, &rhs)?;
        let mut out = x.to_vec();
        out[range].copy_from_slice(&sol);
        Ok(out)
    }

    fn curvature(&self, d: &[f64]) -> Option<f64> {
        Some(dot(d, &self.a.matvec(d)))
    }

    fn optimal_value(&self) -> Option<f64> {
        Some(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::norm;

    #[test]
    fn construction_contract() {
        let q = QuadraticProblem::generate(4, &mut Rng::new(7));
        assert!(q.matrix().asymmetry() <= 1e-14);
        let c = q.construction().unwrap();
        assert_eq!(c.d.iter().filter(|v| **v == 0.0).count(), 1);
        assert!(c.d.iter().all(|v| (0.0..1.0).contains(v)));
    }

    #[test]
    fn null_direction_has_tiny_eigenvalue() {
        for seed in 0..5 {
            let q = QuadraticProblem::generate(30, &mut Rng::new(seed));
            let c = q.construction().unwrap();
            // v = Sᵀe_i is the eigenvector for D_ii = 0.
            let v: Vec<f64> = c.s.row(c.zero_index).to_vec();
            let av = q.matrix().matvec(&v);
            assert!(norm(&av) <= 1e-14, "seed {seed}: ‖Av‖ = {:e}", norm(&av));
            let rayleigh = dot(&v, &av) / dot(&v, &v);
            assert!(rayleigh <= 1e-15);
        }
    }

    #[test]
    fn psd_spot_check() {
        let q = QuadraticProblem::generate(10, &mut Rng::new(3));
        let mut r = Rng::new(30);
        for _ in 0..100 {
            let x: Vec<f64> = (0..10).map(|_| r.normal()).collect();
            assert!(dot(&x, &q.matrix().matvec(&x)) >= -1e-12);
        }
    }

    #[test]
    fn identity_value_and_gradient() {
        let q = QuadraticProblem::from_matrix(DenseMatrix::identity(2)).unwrap();
        assert_eq!(q.value(&[3.0, 4.0]), 12.5);
        assert_eq!(q.gradient(&[3.0, 4.0]), vec![3.0, 4.0]);
    }

    #[test]
    fn block_argmin_two_by_two() {
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let q = QuadraticProblem::from_matrix(a).unwrap().with_blocks(BlockLayout::contiguous(2, 2).unwrap()).unwrap();
        let x = q.block_argmin(0, &[1.0, 1.0], None).unwrap();
        assert!((x[0] + 0.5).abs() < 1e-11);
        assert_eq!(x[1], 1.0);
    }

    #[test]
    fn block_argmin_with_prox_zeroes_block_gradient() {
        let q = QuadraticProblem::generate(9, &mut Rng::new(5))
            .with_blocks(BlockLayout::contiguous(9, 3).unwrap())
            .unwrap();
        let c = vec![0.3; 9];
        let prox = ProxTerm { l: 0.7, center: &c };
        let x = q.block_argmin(1, &[1.0; 9], Some(prox)).unwrap();
        let g = q.gradient(&x);
        for i in 3..6 {
            assert!((g[i] + 0.7 * (x[i] - c[i])).abs() <= 1e-8);
        }
    }

    #[test]
    fn directional_smoothness_is_diagonal() {
        let q = QuadraticProblem::generate(6, &mut Rng::new(9));
        let x = vec![0.2, -0.1, 0.5, 0.9, -0.3, 0.4];
        for i in 0..6 {
            let u = 0.37;
            let mut xu = x.clone();
            xu[i] += u;
            let diff = (q.partial(i, &xu) - q.partial(i, &x)).abs();
            assert!((diff - q.matrix()[(i, i)] * u).abs() <= 1e-12);
        }
    }

    #[test]
    fn lf_estimate_diagonal() {
        let q = QuadraticProblem::from_matrix(DenseMatrix::from_diag(&[0.9, 0.3, 0.0])).unwrap();
        assert!((q.lf_estimate().unwrap() - 0.9).abs() <= 1e-8);
    }

    #[test]
    fn lf_estimate_matches_construction() {
        let q = QuadraticProblem::generate(40, &mut Rng::new(12));
        let dmax = q.construction().unwrap().d.iter().cloned().fold(0.0, f64::max);
        assert!((q.lf_estimate().unwrap() - dmax).abs() <= 1e-7);
    }

    #[test]
    fn text_round_trip_is_exact() {
        let q = QuadraticProblem::generate(5, &mut Rng::new(1));
        let back = QuadraticProblem::from_text(&q.to_text()).unwrap();
        assert_eq!(back.matrix(), q.matrix());
    }

    #[test]
    fn text_errors_carry_line_numbers() {
        assert!(matches!(QuadraticProblem::from_text("2\n1 0\n0\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(QuadraticProblem::from_text("x\n"), Err(Error::Parse { line: 1, .. })));
    }
}
