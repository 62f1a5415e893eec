use super::{InnerMethod, MethodKind, SolverDescriptor};
use crate::error::{Error, Result};
use crate::numkit::{check_dim, Rng, Vector};
use crate::oracle::Objective;

/// Lower bound kept on every smoothness estimate.
pub const BETA_HAT_FLOOR: f64 = 1e-12;
/// Maximum doublings of one estimate within a single coordinate step.
pub const DOUBLING_CAP: usize = 60;

/// Per-coordinate smoothness estimates `β̂_i`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RacdmState {
    beta_hat: Vec<f64>,
}

impl RacdmState {
    pub fn uniform(n: usize, beta0: f64) -> Self {
        Self::new(vec![beta0; n])
    }

    pub fn new(beta_hat: Vec<f64>) -> Self {
        assert!(beta_hat.iter().all(|b| *b > 0.0 && b.is_finite()), "initial estimates must be positive");
        RacdmState { beta_hat: beta_hat.into_iter().map(|b| b.max(BETA_HAT_FLOOR)).collect() }
    }

    pub fn beta_hat(&self) -> &[f64] {
        &self.beta_hat
    }
}

/// Outcome of one coordinate step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateStep {
    pub coordinate: usize,
    /// `∇_i f` before the step.
    pub partial_before: f64,
    /// `∇_i f` at the accepted point.
    pub partial_after: f64,
    pub doublings: usize,
}

/// Random adaptive coordinate descent.
///
/// A step on coordinate `i` tries `x_i − ∇_i f(x)/β̂_i`; while the partial
/// derivative changes sign across the step the estimate doubles and the
/// trial is recomputed. After acceptance `β̂_i` is halved so the estimate
/// can also track decreasing local smoothness.
#[derive(Debug, Clone, PartialEq)]
pub struct Racdm {
    state: RacdmState,
    initial: RacdmState,
    rng: Rng,
}

impl Racdm {
    pub fn new(state: RacdmState, rng: Rng) -> Self {
        Racdm { initial: state.clone(), state, rng }
    }

    /// Restores the estimates passed to [`Racdm::new`]; the RNG stream
    /// continues.
    pub fn reset(&mut self) {
        self.state = self.initial.clone();
    }

    pub fn state(&self) -> &RacdmState {
        &self.state
    }

    pub fn into_parts(self) -> (RacdmState, Rng) {
        (self.state, self.rng)
    }

    /// One step on a uniformly sampled coordinate.
    pub fn random_step(&mut self, obj: &dyn Objective, x: &mut Vector) -> Result<CoordinateStep> {
        let i = self.rng.index(x.dim());
        self.coordinate_step(obj, x, i)
    }

    /// One step on coordinate `i`.
    pub fn coordinate_step(&mut self, obj: &dyn Objective, x: &mut Vector, i: usize) -> Result<CoordinateStep> {
        check_dim(x.dim(), self.state.beta_hat.len())?;
        let g0 = obj.partial(i, x)?;
        let xi = x[i];
        let beta = &mut self.state.beta_hat[i];
        let mut doublings = 0;
        let g1 = if g0 == 0.0 {
            0.0
        } else {
            loop {
                x[i] = xi - g0 / *beta;
                let g1 = obj.partial(i, x)?;
                if g0 * g1 >= 0.0 {
                    break g1;
                }
                if doublings == DOUBLING_CAP {
                    x[i] = xi;
                    return Err(Error::DoublingCapExceeded { coordinate: i, doublings });
                }
                *beta *= 2.0;
                doublings += 1;
            }
        };
        *beta = (*beta * 0.5).max(BETA_HAT_FLOOR);
        Ok(CoordinateStep { coordinate: i, partial_before: g0, partial_after: g1, doublings })
    }
}

impl InnerMethod for Racdm {
    fn descriptor(&self) -> SolverDescriptor {
        MethodKind::Racdm.descriptor()
    }

    fn unit(&mut self, obj: &dyn Objective, x: &mut Vector) -> Result<()> {
        for _ in 0..x.dim() {
            self.random_step(obj, x)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::test_problems::Diag;
    use crate::oracle::{Oracle, Problem};

    #[test]
    fn hand_traced_second_coordinate() {
        // f = ½(x₁² + 4x₂²), β̂ = (1, 1), x = (1, 1), i = 2 (index 1).
        let p = Diag(vec![1.0, 4.0]);
        let o = Oracle::new(&p);
        let mut m = Racdm::new(RacdmState::uniform(2, 1.0), Rng::new(0));
        let mut x = Vector::new(vec![1.0, 1.0]).unwrap();
        let s = m.coordinate_step(&o, &mut x, 1).unwrap();
        assert_eq!(s.doublings, 2);
        assert_eq!(s.partial_before, 4.0);
        assert_eq!(s.partial_after, 0.0);
        assert_eq!(x.as_slice(), &[1.0, 0.0]);
        assert_eq!(m.state().beta_hat(), &[1.0, 2.0]);
        // two trial partials rejected, one accepted, plus the initial one
        assert_eq!(o.counter_snapshot().partials, 4);
    }

    struct Shifted;
    impl Problem for Shifted {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, x: &[f64]) -> f64 {
            0.5 * (x[0] - 1.0).powi(2)
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            vec![x[0] - 1.0]
        }
        fn partial(&self, _i: usize, x: &[f64]) -> f64 {
            x[0] - 1.0
        }
    }

    #[test]
    fn one_dimensional_shifted() {
        let o = Oracle::new(&Shifted);
        let mut m = Racdm::new(RacdmState::uniform(1, 1.0), Rng::new(0));
        let mut x = Vector::zeros(1);
        let s = m.coordinate_step(&o, &mut x, 0).unwrap();
        assert_eq!(s.partial_before, -1.0);
        assert_eq!(x[0], 1.0);
        assert_eq!(m.state().beta_hat(), &[0.5]);
    }

    #[test]
    fn floor_is_respected() {
        let p = Diag(vec![1e-20, 1e-20]);
        let o = Oracle::new(&p);
        let mut m = Racdm::new(RacdmState::uniform(2, 1e-11), Rng::new(4));
        let mut x = Vector::new(vec![1.0, 1.0]).unwrap();
        for _ in 0..20 {
            m.unit(&o, &mut x).unwrap();
            assert!(m.state().beta_hat().iter().all(|b| *b >= BETA_HAT_FLOOR));
        }
    }

    #[test]
    fn doubling_cap_reported() {
        // ∇f flips sign for every finite step: |x|-like slope with huge curvature.
        let p = Diag(vec![1e300]);
        let o = Oracle::new(&p);
        let mut m = Racdm::new(RacdmState::uniform(1, 1e-12), Rng::new(0));
        let mut x = Vector::new(vec![1.0]).unwrap();
        let r = m.coordinate_step(&o, &mut x, 0);
        assert_eq!(r, Err(Error::DoublingCapExceeded { coordinate: 0, doublings: DOUBLING_CAP }));
        assert_eq!(x[0], 1.0);
    }

    #[test]
    fn state_dimension_checked() {
        let p = Diag(vec![1.0, 1.0]);
        let o = Oracle::new(&p);
        let mut m = Racdm::new(RacdmState::uniform(3, 1.0), Rng::new(0));
        let mut x = Vector::zeros(2);
        assert!(matches!(m.unit(&o, &mut x), Err(Error::DimensionMismatch { .. })));
    }
}
