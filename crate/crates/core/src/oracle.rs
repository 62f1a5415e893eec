//! First-order oracles, call accounting and the proximal wrapper.
//!
//! A [`Problem`] is the raw mathematical object (value, gradient, partial
//! derivatives, optional block solver). An [`Oracle`] owns the call counters
//! for a single run over a problem, and [`ProxOracle`] is the regularized
//! objective `F(y) = f(y) + (L/2)‖y − c‖²` handed to inner solvers. Both
//! implement [`Objective`], which is all the solvers ever see.
//!
//! Cost is reported in gradient equivalents: a full gradient costs 1, a
//! partial derivative `1/n`, an exact block solve `1/p`, and a scalar query
//! (value, line-restriction evaluation, curvature) a per-problem weight `ν`,
//! 0 by default.

use std::cell::{Cell, RefCell};
use std::ops::Range;

use crate::error::{Error, Result};
use crate::numkit::{check_dim, dist_sq, dot, Vector};

/// Partition of `0..n` into `p` contiguous blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLayout {
    bounds: Vec<usize>,
}

impl BlockLayout {
    /// Splits `0..n` into `p` nearly equal contiguous blocks.
    pub fn contiguous(n: usize, p: usize) -> Result<Self> {
        if p == 0 || p > n {
            return Err(Error::InvalidConfig(format!("cannot split {n} coordinates into {p} blocks")));
        }
        let bounds = (0..=p).map(|b| b * n / p).collect();
        Ok(BlockLayout { bounds })
    }

    /// Blocks given by their sizes, in order.
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::InvalidConfig("block sizes must be positive".into()));
        }
        let mut bounds = vec![0];
        for s in sizes {
            bounds.push(bounds.last().unwrap() + s);
        }
        Ok(BlockLayout { bounds })
    }

    pub fn count(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn dim(&self) -> usize {
        *self.bounds.last().unwrap()
    }

    pub fn block(&self, b: usize) -> Range<usize> {
        self.bounds[b]..self.bounds[b + 1]
    }
}

/// The `(L/2)‖y − center‖²` term added to block subproblems.
#[derive(Debug, Clone, Copy)]
pub struct ProxTerm<'a> {
    pub l: f64,
    pub center: &'a [f64],
}

/// One-dimensional restriction `φ(h) = f(x + h·d)`.
pub trait LineFunction {
    fn value(&self, h: f64) -> f64;
    fn slope(&self, h: f64) -> f64;
}

/// A smooth convex function on ℝⁿ with first-order access.
///
/// Implementations must keep `gradient(x)[i]` and `partial(i, x)` equal up
/// to rounding.
pub trait Problem: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    fn partial(&self, i: usize, x: &[f64]) -> f64;

    fn block_layout(&self) -> Option<&BlockLayout> {
        None
    }

    /// Exact minimizer over block `b` with the other coordinates fixed,
    /// optionally with a proximal term. Returns the full updated point.
    fn block_argmin(&self, _b: usize, _x: &[f64], _prox: Option<ProxTerm<'_>>) -> Result<Vec<f64>> {
        Err(Error::MissingBlockSolver)
    }

    /// `dᵀ∇²f d` for problems with a constant Hessian.
    fn curvature(&self, _d: &[f64]) -> Option<f64> {
        None
    }

    /// A cheap restriction of `f` to the line `x + h·d`, if the problem has one.
    fn line<'s>(&'s self, _x: &[f64], _d: &[f64]) -> Option<Box<dyn LineFunction + 's>> {
        None
    }

    /// Gradient-equivalent weight of a scalar query.
    fn value_call_weight(&self) -> f64 {
        0.0
    }

    /// Known optimal value, if any.
    fn optimal_value(&self) -> Option<f64> {
        None
    }
}

/// Oracle call totals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CallCounter {
    pub full_gradients: u64,
    pub values: u64,
    pub partials: u64,
    pub block_solves: u64,
}

impl CallCounter {
    /// Gradient-equivalent cost for dimension `n`, `p` blocks and value
    /// weight `nu`.
    pub fn grad_equiv(&self, n: usize, p: usize, nu: f64) -> f64 {
        self.full_gradients as f64
            + self.partials as f64 / n as f64
            + self.block_solves as f64 / p.max(1) as f64
            + self.values as f64 * nu
    }
}

/// The surface inner solvers run against.
pub trait Objective {
    fn dim(&self) -> usize;
    fn value(&self, y: &[f64]) -> Result<f64>;
    fn gradient(&self, y: &[f64]) -> Result<Vector>;
    fn partial(&self, i: usize, y: &[f64]) -> Result<f64>;
    fn block_layout(&self) -> Option<&BlockLayout>;
    fn block_argmin(&self, b: usize, y: &[f64]) -> Result<Vector>;
    /// `dᵀ∇²F d` when the Hessian is constant; counted as a scalar query.
    fn curvature(&self, d: &[f64]) -> Option<f64>;
    /// `φ(h) = F(y + h·d)`; each evaluation of the returned function is
    /// counted.
    fn line<'s>(&'s self, y: &[f64], d: &[f64]) -> Box<dyn LineFunction + 's>;
    /// Gradient-equivalent cost charged so far.
    fn cost(&self) -> f64;
    /// Weight `L` of the proximal term, 0 for an unregularized oracle.
    fn regularization(&self) -> f64 {
        0.0
    }
    /// Objective value without touching the counters; for monitoring only.
    fn peek_value(&self, y: &[f64]) -> f64;
}

/// Counted access to a [`Problem`] for one run.
pub struct Oracle<'p> {
    problem: &'p dyn Problem,
    counter: Cell<CallCounter>,
    // Last gradient evaluated: re-requests at the identical point are free.
    last_gradient: RefCell<Option<(Vec<f64>, Vec<f64>)>>,
}

impl<'p> Oracle<'p> {
    pub fn new(problem: &'p dyn Problem) -> Self {
        Oracle { problem, counter: Cell::new(CallCounter::default()), last_gradient: RefCell::new(None) }
    }

    pub fn problem(&self) -> &'p dyn Problem {
        self.problem
    }

    pub fn counter_snapshot(&self) -> CallCounter {
        self.counter.get()
    }

    pub fn counter_reset(&self) {
        self.counter.set(CallCounter::default());
        self.last_gradient.replace(None);
    }

    fn block_count(&self) -> usize {
        self.problem.block_layout().map_or(1, BlockLayout::count)
    }

    fn bump(&self, f: impl FnOnce(&mut CallCounter)) {
        let mut c = self.counter.get();
        f(&mut c);
        self.counter.set(c);
    }

    pub(crate) fn count_value_calls(&self, k: u64) {
        self.bump(|c| c.values += k);
    }

    fn counted_line<'s>(&'s self, y: &[f64], d: &[f64]) -> Option<Box<dyn LineFunction + 's>> {
        let inner = self.problem.line(y, d)?;
        Some(Box::new(CountedLine { oracle: self, inner }))
    }

    fn raw_gradient(&self, y: &[f64]) -> Vec<f64> {
        if let Some((x, g)) = self.last_gradient.borrow().as_ref() {
            if x.as_slice() == y {
                return g.clone();
            }
        }
        self.bump(|c| c.full_gradients += 1);
        let g = self.problem.gradient(y);
        self.last_gradient.replace(Some((y.to_vec(), g.clone())));
        g
    }
}

impl Objective for Oracle<'_> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn value(&self, y: &[f64]) -> Result<f64> {
        check_dim(self.dim(), y.len())?;
        self.bump(|c| c.values += 1);
        Ok(self.problem.value(y))
    }

    fn gradient(&self, y: &[f64]) -> Result<Vector> {
        check_dim(self.dim(), y.len())?;
        Ok(Vector::from_raw(self.raw_gradient(y)))
    }

    fn partial(&self, i: usize, y: &[f64]) -> Result<f64> {
        check_dim(self.dim(), y.len())?;
        if i >= self.dim() {
            return Err(Error::IndexOutOfRange { index: i, dim: self.dim() });
        }
        self.bump(|c| c.partials += 1);
        Ok(self.problem.partial(i, y))
    }

    fn block_layout(&self) -> Option<&BlockLayout> {
        self.problem.block_layout()
    }

    fn block_argmin(&self, b: usize, y: &[f64]) -> Result<Vector> {
        check_dim(self.dim(), y.len())?;
        let x = self.problem.block_argmin(b, y, None)?;
        self.bump(|c| c.block_solves += 1);
        Ok(Vector::from_raw(x))
    }

    fn curvature(&self, d: &[f64]) -> Option<f64> {
        let q = self.problem.curvature(d)?;
        self.bump(|c| c.values += 1);
        Some(q)
    }

    fn line<'s>(&'s self, y: &[f64], d: &[f64]) -> Box<dyn LineFunction + 's> {
        match self.counted_line(y, d) {
            Some(line) => line,
            None => Box::new(GradientLine { obj: self, origin: y.to_vec(), dir: d.to_vec() }),
        }
    }

    fn cost(&self) -> f64 {
        let nu = self.problem.value_call_weight();
        self.counter.get().grad_equiv(self.dim(), self.block_count(), nu)
    }

    fn peek_value(&self, y: &[f64]) -> f64 {
        self.problem.value(y)
    }
}

struct CountedLine<'s> {
    oracle: &'s Oracle<'s>,
    inner: Box<dyn LineFunction + 's>,
}

impl LineFunction for CountedLine<'_> {
    fn value(&self, h: f64) -> f64 {
        self.oracle.count_value_calls(1);
        self.inner.value(h)
    }
    fn slope(&self, h: f64) -> f64 {
        self.oracle.count_value_calls(1);
        self.inner.slope(h)
    }
}

/// Line restriction built from full gradients, for problems without a
/// specialised one. Every slope costs a gradient.
struct GradientLine<'s, O: Objective + ?Sized> {
    obj: &'s O,
    origin: Vec<f64>,
    dir: Vec<f64>,
}

impl<O: Objective + ?Sized> GradientLine<'_, O> {
    fn at(&self, h: f64) -> Vec<f64> {
        self.origin.iter().zip(&self.dir).map(|(x, d)| x + h * d).collect()
    }
}

impl<O: Objective + ?Sized> LineFunction for GradientLine<'_, O> {
    fn value(&self, h: f64) -> f64 {
        self.obj.value(&self.at(h)).unwrap_or(f64::NAN)
    }
    fn slope(&self, h: f64) -> f64 {
        self.obj.gradient(&self.at(h)).map_or(f64::NAN, |g| dot(&g, &self.dir))
    }
}

/// `F_{L,c}(y) = f(y) + (L/2)‖y − c‖²` over a counted oracle.
pub struct ProxOracle<'o> {
    inner: &'o Oracle<'o>,
    l: f64,
    center: Vector,
}

impl<'o> ProxOracle<'o> {
    pub fn new(inner: &'o Oracle<'o>, l: f64, center: Vector) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidConfig(format!("regularization L must be positive, got {l}")));
        }
        check_dim(inner.dim(), center.dim())?;
        Ok(ProxOracle { inner, l, center })
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn inner(&self) -> &'o Oracle<'o> {
        self.inner
    }
}

impl Objective for ProxOracle<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, y: &[f64]) -> Result<f64> {
        let f = self.inner.value(y)?;
        Ok(f + 0.5 * self.l * dist_sq(y, &self.center))
    }

    fn gradient(&self, y: &[f64]) -> Result<Vector> {
        let mut g = self.inner.gradient(y)?;
        for ((gi, yi), ci) in g.iter_mut().zip(y).zip(self.center.iter()) {
            *gi += self.l * (yi - ci);
        }
        Ok(g)
    }

    fn partial(&self, i: usize, y: &[f64]) -> Result<f64> {
        let p = self.inner.partial(i, y)?;
        Ok(p + self.l * (y[i] - self.center[i]))
    }

    fn block_layout(&self) -> Option<&BlockLayout> {
        self.inner.block_layout()
    }

    fn block_argmin(&self, b: usize, y: &[f64]) -> Result<Vector> {
        check_dim(self.dim(), y.len())?;
        let prox = ProxTerm { l: self.l, center: &self.center };
        let x = self.inner.problem().block_argmin(b, y, Some(prox))?;
        self.inner.bump(|c| c.block_solves += 1);
        Ok(Vector::from_raw(x))
    }

    fn curvature(&self, d: &[f64]) -> Option<f64> {
        self.inner.curvature(d).map(|q| q + self.l * dot(d, d))
    }

    fn line<'s>(&'s self, y: &[f64], d: &[f64]) -> Box<dyn LineFunction + 's> {
        let Some(base) = self.inner.counted_line(y, d) else {
            return Box::new(GradientLine { obj: self, origin: y.to_vec(), dir: d.to_vec() });
        };
        let offset: Vec<f64> = y.iter().zip(self.center.iter()).map(|(a, b)| a - b).collect();
        Box::new(ProxLine { base, l: self.l, dd: dot(d, d), od: dot(&offset, d), oo: dot(&offset, &offset) })
    }

    fn cost(&self) -> f64 {
        self.inner.cost()
    }

    fn regularization(&self) -> f64 {
        self.l
    }

    fn peek_value(&self, y: &[f64]) -> f64 {
        self.inner.peek_value(y) + 0.5 * self.l * dist_sq(y, &self.center)
    }
}

/// φ(h) + (L/2)‖y − c + h·d‖², expanded in h.
struct ProxLine<'s> {
    base: Box<dyn LineFunction + 's>,
    l: f64,
    dd: f64,
    od: f64,
    oo: f64,
}

impl LineFunction for ProxLine<'_> {
    fn value(&self, h: f64) -> f64 {
        self.base.value(h) + 0.5 * self.l * (self.oo + 2.0 * h * self.od + h * h * self.dd)
    }
    fn slope(&self, h: f64) -> f64 {
        self.base.slope(h) + self.l * (self.od + h * self.dd)
    }
}
