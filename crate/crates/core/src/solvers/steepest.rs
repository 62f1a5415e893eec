use super::{scalar_minimize, InnerMethod, LineSearchOptions, MethodKind, SolverDescriptor};
use crate::error::Result;
use crate::numkit::{axpy, dot, Vector};
use crate::oracle::Objective;

/// Steepest descent: `x ← x − h·∇f(x)` with `h` minimizing `f` along the
/// ray. Quadratic objectives get the closed form `h = gᵀg / gᵀ∇²f g`; all
/// others go through [`scalar_minimize`], warm-started from the last step.
#[derive(Debug, Clone, PartialEq)]
pub struct SteepestDescent {
    last_step: f64,
    pub line_search: LineSearchOptions,
}

impl Default for SteepestDescent {
    fn default() -> Self {
        SteepestDescent { last_step: 1.0, line_search: LineSearchOptions::default() }
    }
}

impl SteepestDescent {
    pub fn new() -> Self {
        Self::default()
    }

    /// Forgets the warm-start step length.
    pub fn reset(&mut self) {
        self.last_step = 1.0;
    }

    /// Takes one step in place and returns the step length used.
    pub fn step(&mut self, obj: &dyn Objective, x: &mut Vector) -> Result<f64> {
        let g = obj.gradient(x)?;
        let gg = dot(&g, &g);
        if gg == 0.0 {
            return Ok(0.0);
        }
        let h = match obj.curvature(&g) {
            Some(q) if q > 0.0 => gg / q,
            _ => {
                let dir: Vec<f64> = g.iter().map(|v| -v).collect();
                let line = obj.line(x, &dir);
                scalar_minimize(|h| line.slope(h), self.last_step, self.line_search)?
            }
        };
        axpy(-h, &g, x);
        self.last_step = h;
        Ok(h)
    }
}

impl InnerMethod for SteepestDescent {
    fn descriptor(&self) -> SolverDescriptor {
        MethodKind::SteepestDescent.descriptor()
    }

    fn unit(&mut self, obj: &dyn Objective, x: &mut Vector) -> Result<()> {
        self.step(obj, x).map(|_| ())
    }
}
