use super::{InnerMethod, MethodKind, SolverDescriptor};
use crate::error::{Error, Result};
use crate::numkit::Vector;
use crate::oracle::Objective;

/// Alternating minimization with the cyclic block rule: one unit replaces
/// each block in turn by its exact minimizer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AlternatingMinimization;

impl AlternatingMinimization {
    pub fn block_step(&self, obj: &dyn Objective, x: &mut Vector, block: usize) -> Result<()> {
        *x = obj.block_argmin(block, x)?;
        Ok(())
    }
}

impl InnerMethod for AlternatingMinimization {
    fn descriptor(&self) -> SolverDescriptor {
        MethodKind::Am.descriptor()
    }

    fn unit(&mut self, obj: &dyn Objective, x: &mut Vector) -> Result<()> {
        let p = match obj.block_layout() {
            Some(layout) if layout.count() >= 2 => layout.count(),
            _ => return Err(Error::MissingBlockSolver),
        };
        for b in 0..p {
            self.block_step(obj, x, b)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::test_problems::Diag;
    use crate::oracle::Oracle;

    #[test]
    fn requires_block_solver() {
        let p = Diag(vec![1.0, 1.0]);
        let o = Oracle::new(&p);
        let mut x = Vector::zeros(2);
        assert_eq!(AlternatingMinimization.unit(&o, &mut x), Err(Error::MissingBlockSolver));
    }
}
