use super::{InnerMethod, MethodKind, SolverDescriptor};
use crate::error::Result;
use crate::numkit::{axpy, Vector};
use crate::oracle::Objective;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    Fixed(f64),
    /// `1/(L_f + L)`, where `L` is the objective's proximal weight.
    InverseSmoothness {
        lf: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientDescent {
    rule: StepRule,
}

impl GradientDescent {
    pub fn new(rule: StepRule) -> Self {
        GradientDescent { rule }
    }

    pub fn step_for(&self, obj: &dyn Objective) -> f64 {
        match self.rule {
            StepRule::Fixed(h) => h,
            StepRule::InverseSmoothness { lf } => 1.0 / (lf + obj.regularization()),
        }
    }
}

impl InnerMethod for GradientDescent {
    fn descriptor(&self) -> SolverDescriptor {
        MethodKind::Gd.descriptor()
    }

    fn unit(&mut self, obj: &dyn Objective, x: &mut Vector) -> Result<()> {
        let g = obj.gradient(x)?;
        axpy(-self.step_for(obj), &g, x);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::gd_run;
    use super::*;
    use crate::oracle::test_problems::Diag;
    use crate::oracle::Oracle;

    #[test]
    fn isotropic_quadratic_in_one_step() {
        let l = 3.0;
        let p = Diag(vec![l; 4]);
        let o = Oracle::new(&p);
        let x0 = Vector::new(vec![1.0, -2.0, 0.5, 7.0]).unwrap();
        let run = gd_run(&o, x0, 1.0 / l, |x, _| Ok(x.iter().all(|v| *v == 0.0)), 10).unwrap();
        assert_eq!(run.units, 1);
    }

    #[test]
    fn monotone_with_short_step() {
        let p = Diag(vec![0.1, 0.5, 1.0, 2.0]);
        let o = Oracle::new(&p);
        let mut gd = GradientDescent::new(StepRule::Fixed(0.5));
        let mut x = Vector::new(vec![1.0; 4]).unwrap();
        let mut f = o.peek_value(&x);
        for _ in 0..50 {
            gd.unit(&o, &mut x).unwrap();
            let f1 = o.peek_value(&x);
            assert!(f1 <= f + 1e-12);
            f = f1;
        }
    }

    #[test]
    fn inverse_smoothness_uses_prox_weight() {
        use crate::oracle::ProxOracle;
        let p = Diag(vec![1.0]);
        let o = Oracle::new(&p);
        let prox = ProxOracle::new(&o, 3.0, Vector::zeros(1)).unwrap();
        let gd = GradientDescent::new(StepRule::InverseSmoothness { lf: 1.0 });
        assert_eq!(gd.step_for(&prox), 0.25);
        assert_eq!(gd.step_for(&o), 1.0);
    }
}
