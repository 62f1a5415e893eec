//! Non-accelerated inner methods.
//!
//! Every method advances in *iteration units* and is driven by
//! [`run_until`], which checks a stop predicate before the first unit and
//! after each one. Units are chosen so that one unit costs roughly one
//! gradient equivalent for every method:
//!
//! | method | unit |
//! |---|---|
//! | gradient descent | one step |
//! | steepest descent | one exact line-search step |
//! | RACDM | `n` random coordinate steps |
//! | alternating minimization | one cyclic sweep over all blocks |

mod am;
mod gd;
mod line_search;
mod racdm;
mod steepest;

pub use am::AlternatingMinimization;
pub use gd::{GradientDescent, StepRule};
pub use line_search::{scalar_minimize, LineSearchOptions};
pub use racdm::{CoordinateStep, Racdm, RacdmState, BETA_HAT_FLOOR, DOUBLING_CAP};
pub use steepest::SteepestDescent;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numkit::{Rng, Vector};
use crate::oracle::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodKind {
    Gd,
    SteepestDescent,
    Racdm,
    Am,
}

impl MethodKind {
    pub fn name(self) -> &'static str {
        match self {
            MethodKind::Gd => "gd",
            MethodKind::SteepestDescent => "sd",
            MethodKind::Racdm => "racdm",
            MethodKind::Am => "am",
        }
    }

    pub fn descriptor(self) -> SolverDescriptor {
        let (c_n_label, iteration_unit) = match self {
            MethodKind::Gd => ("O(1)", "one gradient step"),
            MethodKind::SteepestDescent => ("O(1)", "one exact line-search step"),
            MethodKind::Racdm => ("O(n)", "n coordinate steps"),
            MethodKind::Am => ("O(p)", "one cyclic sweep over all p blocks"),
        };
        SolverDescriptor { kind: self, c_n_label, iteration_unit }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gd" => Ok(MethodKind::Gd),
            "sd" | "steepest" => Ok(MethodKind::SteepestDescent),
            "racdm" => Ok(MethodKind::Racdm),
            "am" => Ok(MethodKind::Am),
            other => Err(Error::InvalidConfig(format!("unknown method `{other}`"))),
        }
    }
}

/// Static facts about a method: its complexity class in `n`/`p` and what
/// one counted unit means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverDescriptor {
    pub kind: MethodKind,
    pub c_n_label: &'static str,
    pub iteration_unit: &'static str,
}

/// A non-accelerated method that advances one iteration unit at a time.
pub trait InnerMethod {
    fn descriptor(&self) -> SolverDescriptor;
    fn unit(&mut self, obj: &dyn Objective, x: &mut Vector) -> Result<()>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverEvent {
    pub unit: usize,
    pub f_value: f64,
    pub grad_equiv: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverRun {
    pub final_point: Vector,
    /// Units executed before the predicate fired.
    pub units: usize,
    /// Per-unit records, empty unless requested.
    pub events: Vec<SolverEvent>,
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub cap: usize,
    pub record_events: bool,
}

impl RunOptions {
    pub fn capped(cap: usize) -> Self {
        RunOptions { cap, record_events: false }
    }
}

/// Runs `method` from `x0` until `stop(x, units)` returns true.
///
/// The predicate is evaluated at the start point and after every unit; no
/// unit runs once it has returned true. Exceeding `opts.cap` units is an
/// error.
pub fn run_until<M, S>(
    method: &mut M,
    obj: &dyn Objective,
    x0: Vector,
    mut stop: S,
    opts: RunOptions,
) -> Result<SolverRun>
where
    M: InnerMethod + ?Sized,
    S: FnMut(&Vector, usize) -> Result<bool>,
{
    let mut x = x0;
    let mut units = 0;
    let mut events = Vec::new();
    let record = |x: &Vector, units: usize, events: &mut Vec<SolverEvent>| {
        if opts.record_events {
            events.push(SolverEvent { unit: units, f_value: obj.peek_value(x), grad_equiv: obj.cost() });
        }
    };
    record(&x, 0, &mut events);
    if stop(&x, 0)? {
        return Ok(SolverRun { final_point: x, units, events });
    }
    loop {
        if units >= opts.cap {
            return Err(Error::CapExceeded { cap: opts.cap });
        }
        method.unit(obj, &mut x)?;
        units += 1;
        record(&x, units, &mut events);
        if stop(&x, units)? {
            return Ok(SolverRun { final_point: x, units, events });
        }
    }
}

/// Fixed-step gradient descent: `x ← x − step·∇f(x)`.
pub fn gd_run<S>(obj: &dyn Objective, x0: Vector, step: f64, stop: S, cap: usize) -> Result<SolverRun>
where
    S: FnMut(&Vector, usize) -> Result<bool>,
{
    run_until(&mut GradientDescent::new(StepRule::Fixed(step)), obj, x0, stop, RunOptions::capped(cap))
}

/// Steepest descent with exact line search.
pub fn steepest_run<S>(obj: &dyn Objective, x0: Vector, stop: S, cap: usize) -> Result<SolverRun>
where
    S: FnMut(&Vector, usize) -> Result<bool>,
{
    run_until(&mut SteepestDescent::new(), obj, x0, stop, RunOptions::capped(cap))
}

/// Random adaptive coordinate descent. `state` and `rng` are updated in
/// place so they can be carried into a later run.
pub fn racdm_run<S>(
    obj: &dyn Objective,
    x0: Vector,
    state: &mut RacdmState,
    rng: &mut Rng,
    stop: S,
    cap: usize,
) -> Result<SolverRun>
where
    S: FnMut(&Vector, usize) -> Result<bool>,
{
    let mut racdm = Racdm::new(std::mem::take(state), rng.clone());
    let out = run_until(&mut racdm, obj, x0, stop, RunOptions::capped(cap));
    let (s, r) = racdm.into_parts();
    *state = s;
    *rng = r;
    out
}

/// Cyclic alternating minimization over the objective's blocks.
pub fn am_run<S>(obj: &dyn Objective, x0: Vector, stop: S, cap: usize) -> Result<SolverRun>
where
    S: FnMut(&Vector, usize) -> Result<bool>,
{
    run_until(&mut AlternatingMinimization, obj, x0, stop, RunOptions::capped(cap))
}

/// Owned inner solver, including any adaptive state it carries between
/// runs.
#[derive(Debug, Clone)]
pub enum InnerSolver {
    Gd(GradientDescent),
    Steepest(SteepestDescent),
    Racdm(Racdm),
    Am(AlternatingMinimization),
}

impl InnerSolver {
    pub fn kind(&self) -> MethodKind {
        self.descriptor().kind
    }

    /// Drops adaptive state accumulated by earlier runs.
    pub fn reset(&mut self) {
        match self {
            InnerSolver::Steepest(m) => m.reset(),
            InnerSolver::Racdm(m) => m.reset(),
            InnerSolver::Gd(_) | InnerSolver::Am(_) => {}
        }
    }
}

impl InnerMethod for InnerSolver {
    fn descriptor(&self) -> SolverDescriptor {
        match self {
            InnerSolver::Gd(m) => m.descriptor(),
            InnerSolver::Steepest(m) => m.descriptor(),
            InnerSolver::Racdm(m) => m.descriptor(),
            InnerSolver::Am(m) => m.descriptor(),
        }
    }

    fn unit(&mut self, obj: &dyn Objective, x: &mut Vector) -> Result<()> {
        match self {
            InnerSolver::Gd(m) => m.unit(obj, x),
            InnerSolver::Steepest(m) => m.unit(obj, x),
            InnerSolver::Racdm(m) => m.unit(obj, x),
            InnerSolver::Am(m) => m.unit(obj, x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::test_problems::Diag;
    use crate::oracle::Oracle;

    #[test]
    fn predicate_true_at_start_runs_nothing() {
        let p = Diag(vec![1.0, 2.0]);
        let o = Oracle::new(&p);
        let x0 = Vector::new(vec![1.0, 1.0]).unwrap();
        let run = gd_run(&o, x0.clone(), 0.5, |_, _| Ok(true), 10).unwrap();
        assert_eq!(run.units, 0);
        assert_eq!(run.final_point, x0);
        assert_eq!(o.counter_snapshot().full_gradients, 0);
    }

    #[test]
    fn no_unit_after_predicate_fires() {
        let p = Diag(vec![1.0, 2.0]);
        let o = Oracle::new(&p);
        let x0 = Vector::new(vec![1.0, 1.0]).unwrap();
        let mut seen = Vec::new();
        let run = gd_run(
            &o,
            x0,
            0.1,
            |_, u| {
                seen.push(u);
                Ok(u == 3)
            },
            100,
        )
        .unwrap();
        assert_eq!(run.units, 3);
        assert_eq!(seen, vec![0, 1, 2, 3]);
        assert_eq!(o.counter_snapshot().full_gradients, 3);
    }

    #[test]
    fn cap_exceeded() {
        let p = Diag(vec![1.0]);
        let o = Oracle::new(&p);
        let x0 = Vector::new(vec![1.0]).unwrap();
        assert_eq!(gd_run(&o, x0, 0.1, |_, _| Ok(false), 5), Err(Error::CapExceeded { cap: 5 }));
    }

    #[test]
    fn method_names_round_trip() {
        for k in [MethodKind::Gd, MethodKind::SteepestDescent, MethodKind::Racdm, MethodKind::Am] {
            assert_eq!(k.name().parse::<MethodKind>().unwrap(), k);
        }
        assert!("newton".parse::<MethodKind>().is_err());
        assert_eq!(MethodKind::Racdm.descriptor().c_n_label, "O(n)");
    }
}
