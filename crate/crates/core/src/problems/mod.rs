//! Benchmark problems: the degenerate random quadratic and logistic
//! regression on sparse binary-feature data.

mod libsvm;
mod logistic;
mod quadratic;
mod synth;

pub use libsvm::{parse_libsvm, read_libsvm, to_libsvm_string, Dataset, Row};
pub use logistic::{sigmoid_neg, softplus_neg, LogisticProblem};
pub use quadratic::{Construction, QuadraticProblem, BLOCK_RIDGE};
pub use synth::{a1a_like, A1A_GROUP_SIZES};

use crate::error::Result;
use crate::oracle::Problem;

/// Number of features in the a1a dataset.
pub const A1A_N_FEATURES: usize = 123;

/// Bundled 1605-row sample with a1a's layout (see `data/README.md`).
pub const BUNDLED_A1A_SAMPLE: &str = include_str!("../../data/a1a_synthetic_1605.txt");

pub fn bundled_a1a_sample() -> Result<Dataset> {
    parse_libsvm(BUNDLED_A1A_SAMPLE)
}

/// One of the supported benchmark problems.
#[derive(Debug, Clone)]
pub enum ExperimentProblem {
    Quadratic(QuadraticProblem),
    Logistic(LogisticProblem),
}

impl ExperimentProblem {
    pub fn as_problem(&self) -> &dyn Problem {
        match self {
            ExperimentProblem::Quadratic(q) => q,
            ExperimentProblem::Logistic(l) => l,
        }
    }
}

/// Gradient Lipschitz constant: λ_max(A) for quadratics, the spectral bound
/// λ_max(ZᵀZ)/(4m) for logistic regression.
pub fn lf_estimate(problem: &ExperimentProblem) -> Result<f64> {
    match problem {
        ExperimentProblem::Quadratic(q) => q.lf_estimate(),
        ExperimentProblem::Logistic(l) => l.lf_estimate(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{dist_sq, norm, Rng};

    #[test]
    fn bundled_sample_shape() {
        let ds = bundled_a1a_sample().unwrap();
        assert_eq!(ds.len(), 1605);
        assert!(ds.n_features <= A1A_N_FEATURES);
        assert!(ds.rows.iter().all(|r| r.label == 1.0 || r.label == -1.0));
        assert!(ds.rows.iter().all(|r| r.features.len() == A1A_GROUP_SIZES.len()));
    }

    #[test]
    fn logistic_gradient_is_lipschitz_with_estimate() {
        let ds = bundled_a1a_sample().unwrap();
        let p = LogisticProblem::new(&ds, Some(A1A_N_FEATURES)).unwrap();
        let lf = lf_estimate(&ExperimentProblem::Logistic(p.clone())).unwrap();
        let mut rng = Rng::new(50);
        for _ in 0..50 {
            let x: Vec<f64> = (0..p.dim()).map(|_| rng.normal()).collect();
            let y: Vec<f64> = (0..p.dim()).map(|_| rng.normal()).collect();
            let gx = p.gradient(&x);
            let gy = p.gradient(&y);
            assert!(dist_sq(&gx, &gy).sqrt() <= lf * dist_sq(&x, &y).sqrt() * (1.0 + 1e-6));
        }
    }

    #[test]
    fn quadratic_midpoint_convexity() {
        let q = QuadraticProblem::generate(15, &mut Rng::new(8));
        let mut rng = Rng::new(80);
        for _ in 0..100 {
            let x: Vec<f64> = (0..15).map(|_| rng.normal()).collect();
            let y: Vec<f64> = (0..15).map(|_| rng.normal()).collect();
            let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
            assert!(q.value(&mid) <= 0.5 * q.value(&x) + 0.5 * q.value(&y) + 1e-12);
        }
        assert!(norm(&q.gradient(&[0.0; 15])) == 0.0);
    }
}
