//! The accelerated proximal envelope and its adaptive regularization search.
//!
//! Each outer iteration `k` chooses `L_{k+1}` by trial: the first attempt
//! uses `min{α·L_k, L_u}`, every further attempt divides by `β` (never going
//! below `L_d`). For each trial the step coefficients and the centre
//! `x^{k+1}` are recomputed from the committed `(A_k, y^k, z^k)`, and the
//! inner solver runs from `x^{k+1}` on
//! `F(y) = f(y) + (L/2)‖y − x^{k+1}‖²` until
//! `‖∇F(y)‖ ≤ (L/2)‖y − x^{k+1}‖`. The search stops once an attempt needed at
//! least `γ` times as many inner units as the one before, or `L` reached
//! `L_d`; the last attempt is accepted and `z` moves along `−∇f(y^{k+1})`.

use crate::error::{Error, Result};
use crate::numkit::{check_dim, dist_sq, Vector};
use crate::oracle::{Objective, Oracle, ProxOracle};
use crate::solvers::{run_until, InnerSolver, RunOptions};
use crate::trace::{Stopwatch, TerminalStatus, Trace, TraceEvent};

#[derive(Debug, Clone, PartialEq)]
pub struct CatalystConfig {
    /// Up-scaling factor for the first trial of each outer iteration.
    pub alpha: f64,
    /// Down-scaling factor between trials.
    pub beta: f64,
    /// Inner-effort growth that ends the search.
    pub gamma: f64,
    pub l0: f64,
    pub ld: f64,
    pub lu: f64,
    /// Target gap `f(y) − f_ref`.
    pub eps: f64,
    /// Unit cap for one inner attempt.
    pub inner_unit_cap: usize,
    pub outer_cap: usize,
    /// Carry adaptive inner state (RACDM's β̂, the line-search hint) across
    /// attempts and outer iterations.
    pub warm_start_state: bool,
    /// Optional gradient-equivalent budget for the whole run.
    pub budget: Option<f64>,
    pub inner_start: InnerStart,
}

/// Where each inner run starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerStart {
    /// The extrapolated centre `x^{k+1}` of the current trial.
    #[default]
    Center,
    /// The last accepted iterate `y^k`.
    PreviousIterate,
}

impl CatalystConfig {
    pub const DEFAULT_ALPHA: f64 = 2.0;
    pub const DEFAULT_BETA: f64 = 1.5;
    pub const DEFAULT_GAMMA: f64 = 1.3;

    /// Defaults for a problem with smoothness `lf`: `L_0 = 1.6·L_f`,
    /// `L_d = 0.005·L_f`, `L_u = 10·L_f`.
    pub fn for_smoothness(lf: f64) -> Self {
        CatalystConfig {
            alpha: Self::DEFAULT_ALPHA,
            beta: Self::DEFAULT_BETA,
            gamma: Self::DEFAULT_GAMMA,
            l0: 1.6 * lf,
            ld: 0.005 * lf,
            lu: 10.0 * lf,
            eps: 1e-9,
            inner_unit_cap: 100_000,
            outer_cap: 1_000,
            warm_start_state: true,
            budget: None,
            inner_start: InnerStart::Center,
        }
    }

    /// Checks the hard constraints and returns warnings for the soft ones.
    pub fn validate(&self) -> Result<Vec<String>> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        let (a, b, g) = (self.alpha, self.beta, self.gamma);
        if !(a > b && b > g && g > 0.0) {
            return bad(format!("need alpha > beta > gamma > 0, got ({a}, {b}, {g})"));
        }
        if !(b > 1.0) {
            return bad(format!("beta must exceed 1 for the trial sequence to decrease, got {b}"));
        }
        if !(self.ld > 0.0 && self.ld <= self.lu && self.l0 > 0.0) {
            return bad(format!(
                "need 0 < L_d <= L_u and L_0 > 0, got L_d={}, L_u={}, L_0={}",
                self.ld, self.lu, self.l0
            ));
        }
        if !(self.eps > 0.0) {
            return bad("eps must be positive".into());
        }
        let mut warnings = Vec::new();
        if g <= 1.0 {
            warnings.push(format!(
                "gamma = {g} <= 1: the inner-effort growth test passes whenever effort does not shrink, \
                 so the L search usually stops after two attempts"
            ));
        }
        Ok(warnings)
    }
}

/// Committed accumulator of the outer method.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeState {
    /// `A_k`.
    pub a: f64,
    pub y: Vector,
    pub z: Vector,
    /// Centre `x^k` of the last accepted step (`y^0` before the first).
    pub x: Vector,
    /// `L_k`.
    pub l_prev: f64,
    pub k: usize,
}

impl EnvelopeState {
    pub fn new(y0: Vector, l0: f64) -> Self {
        EnvelopeState { a: 0.0, z: y0.clone(), x: y0.clone(), y: y0, l_prev: l0, k: 0 }
    }
}

/// Summary of one accepted outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterRecord {
    /// Index of the produced iterate (`k + 1`).
    pub k: usize,
    pub l_accepted: f64,
    pub attempts: usize,
    /// Trial `L` of every attempt; the last one was accepted.
    pub trial_l: Vec<f64>,
    pub units_per_attempt: Vec<usize>,
    /// `a_{k+1}` of the accepted trial.
    pub a_step: f64,
    /// `A_{k+1}`.
    pub a_k: f64,
    /// `‖∇F(y^{k+1})‖`.
    pub cert_lhs: f64,
    /// `(L/2)‖y^{k+1} − x^{k+1}‖`.
    pub cert_rhs: f64,
    /// `‖y^{k+1} − x^{k+1}‖²`.
    pub step_sq: f64,
    pub f_y: f64,
    /// Accepted centre `x^{k+1}`, iterate `y^{k+1}` and `z^{k+1}`.
    pub x: Vector,
    pub y: Vector,
    pub z: Vector,
}

/// Step coefficients: the positive root `a` of `L·a² = A_k + a`, and
/// `A_{k+1} = A_k + a`.
pub fn ms_coefficients(a_k: f64, l: f64) -> (f64, f64) {
    debug_assert!(a_k >= 0.0 && l > 0.0);
    let inv = 1.0 / l;
    let a = 0.5 * (inv + (inv * inv + 4.0 * a_k * inv).sqrt());
    (a, a_k + a)
}

/// `x = (A_k/A_{k+1})·y + (a_{k+1}/A_{k+1})·z`.
pub fn extrapolate(y: &[f64], z: &[f64], a_k: f64, a_next: f64, a_total: f64) -> Result<Vector> {
    check_dim(y.len(), z.len())?;
    debug_assert!(a_total > 0.0);
    let wy = a_k / a_total;
    let wz = a_next / a_total;
    Vector::new(y.iter().zip(z).map(|(yi, zi)| wy * yi + wz * zi).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MsCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

/// Inexactness test `‖∇F(y)‖ ≤ (L/2)‖y − x‖`; the gradient is counted.
pub fn ms_condition(p: &ProxOracle<'_>, y: &[f64]) -> Result<MsCheck> {
    let lhs = p.gradient(y)?.norm();
    let rhs = 0.5 * p.l() * dist_sq(y, p.center()).sqrt();
    Ok(MsCheck { holds: lhs <= rhs, lhs, rhs })
}

/// Runs the `L` search for one outer iteration and commits the accepted
/// trial to `state`.
pub fn catalyst_outer_step(
    state: &mut EnvelopeState,
    cfg: &CatalystConfig,
    inner: &mut InnerSolver,
    oracle: &Oracle<'_>,
) -> Result<OuterRecord> {
    let mut l = (cfg.alpha * state.l_prev).min(cfg.lu).max(cfg.ld);
    let mut units_per_attempt: Vec<usize> = Vec::new();
    let mut trial_l: Vec<f64> = Vec::new();

    loop {
        let t = units_per_attempt.len() + 1;
        if t > 1 {
            l = (l / cfg.beta).max(cfg.ld);
        }
        trial_l.push(l);
        let (a_step, a_next) = ms_coefficients(state.a, l);
        let x = extrapolate(&state.y, &state.z, state.a, a_step, a_next)?;
        let prox = ProxOracle::new(oracle, l, x.clone())?;
        if !cfg.warm_start_state {
            inner.reset();
        }

        let mut last = MsCheck { holds: false, lhs: f64::NAN, rhs: f64::NAN };
        let start = match cfg.inner_start {
            InnerStart::Center => x.clone(),
            InnerStart::PreviousIterate => state.y.clone(),
        };
        let run = run_until(
            inner,
            &prox,
            start,
            |y, _| {
                last = ms_condition(&prox, y)?;
                Ok(last.holds)
            },
            RunOptions::capped(cfg.inner_unit_cap),
        )
        .map_err(|e| match e {
            Error::CapExceeded { cap } => Error::InnerCapExceeded { cap, l, attempt: t },
            other => other,
        })?;
        units_per_attempt.push(run.units);
        log::debug!("k={} attempt {t}: L={l:e} units={}", state.k, run.units);

        let grew = t > 1 && run.units as f64 >= cfg.gamma * units_per_attempt[t - 2] as f64;
        if grew || l == cfg.ld {
            debug_assert!(last.holds, "accepted point must satisfy the inexactness test");
            debug_assert!((l * a_step * a_step - a_next).abs() <= 1e-12 * a_next);
            let y = run.final_point;
            // Served from the oracle's cache: the last certificate check
            // already evaluated ∇f at y.
            let g = oracle.gradient(&y)?;
            let mut z = std::mem::take(&mut state.z);
            for (zi, gi) in z.iter_mut().zip(g.iter()) {
                *zi -= a_step * gi;
            }
            let step_sq = dist_sq(&y, &x);
            let f_y = oracle.peek_value(&y);
            state.a = a_next;
            state.z = z.clone();
            state.x = x.clone();
            state.y = y.clone();
            state.l_prev = l;
            state.k += 1;
            return Ok(OuterRecord {
                k: state.k,
                l_accepted: l,
                attempts: t,
                trial_l,
                units_per_attempt,
                a_step,
                a_k: a_next,
                cert_lhs: last.lhs,
                cert_rhs: last.rhs,
                step_sq,
                f_y,
                x,
                y,
                z,
            });
        }
    }
}

/// Outcome of a full envelope run.
#[derive(Debug, Clone)]
pub struct CatalystRun {
    pub trace: Trace,
    pub records: Vec<OuterRecord>,
    pub state: EnvelopeState,
}

/// Iterates [`catalyst_outer_step`] from `y0` until the gap to `f_ref`
/// drops to `cfg.eps`, the budget is spent, or `cfg.outer_cap` iterations
/// have run. Solver failures end the run and are reported through the
/// trace status rather than as errors; only an invalid configuration is an
/// `Err`.
pub fn catalyst_run(
    oracle: &Oracle<'_>,
    y0: Vector,
    cfg: &CatalystConfig,
    inner: &mut InnerSolver,
    f_ref: Option<f64>,
) -> Result<CatalystRun> {
    cfg.validate()?;
    check_dim(oracle.dim(), y0.dim())?;
    let started = Stopwatch::start();
    let mut state = EnvelopeState::new(y0, cfg.l0);
    let mut trace = Trace::new(f_ref);
    let mut records = Vec::new();

    let event = |state: &EnvelopeState, rec: Option<&OuterRecord>| TraceEvent {
        outer_k: state.k,
        grad_equiv: oracle.cost(),
        f_value: oracle.peek_value(&state.y),
        gap: f64::NAN,
        l_k: Some(rec.map_or(cfg.l0, |r| r.l_accepted)),
        a_k: Some(state.a),
        inner_units: Some(rec.map_or(0, |r| r.units_per_attempt.iter().sum())),
        wall_ms: started.elapsed_ms(),
    };
    trace.push(event(&state, None));

    let converged = |trace: &Trace| f_ref.is_some() && trace.final_gap() <= cfg.eps;
    trace.terminal_status = loop {
        if converged(&trace) {
            break TerminalStatus::Converged;
        }
        if cfg.budget.is_some_and(|b| oracle.cost() >= b) {
            break TerminalStatus::Budget;
        }
        if state.k >= cfg.outer_cap {
            break TerminalStatus::OuterCap;
        }
        match catalyst_outer_step(&mut state, cfg, inner, oracle) {
            Ok(rec) => {
                trace.push(event(&state, Some(&rec)));
                records.push(rec);
            }
            Err(e) => {
                let status = match e {
                    Error::InnerCapExceeded { .. } => TerminalStatus::InnerCap,
                    _ => TerminalStatus::Failed,
                };
                trace.error = Some(e.to_string());
                break status;
            }
        }
    };
    Ok(CatalystRun { trace, records, state })
}

/// Right-hand sides of the convergence certificates along a run, for a
/// problem whose minimizer `x*` and optimal value are known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateCheck {
    /// `f(y^N) − f* − R²/(2A_N)`; must be ≤ 0.
    pub value_bound_slack: f64,
    /// `Σ A_k L_k ‖y^k − x^k‖² − 2R²`; must be ≤ 0.
    pub residual_sum_slack: f64,
    /// `‖z^N − x*‖ − R`; must be ≤ 0.
    pub z_distance_slack: f64,
    /// `¼(Σ 1/√L_k)² − A_N`; must be ≤ 0.
    pub growth_slack: f64,
}

/// Evaluates the certificate slacks after each record for a minimizer
/// `x_star` with value `f_star`; `R = ‖y⁰ − x*‖`.
pub fn certificate_slacks(records: &[OuterRecord], y0: &[f64], x_star: &[f64], f_star: f64) -> Vec<CertificateCheck> {
    let r = dist_sq(y0, x_star).sqrt();
    let mut residual_sum = 0.0;
    let mut inv_sqrt_sum = 0.0;
    records
        .iter()
        .map(|rec| {
            let zd = dist_sq(&rec.z, x_star).sqrt();
            residual_sum += rec.a_k * rec.l_accepted * rec.step_sq;
            inv_sqrt_sum += 1.0 / rec.l_accepted.sqrt();
            CertificateCheck {
                value_bound_slack: rec.f_y - f_star - r * r / (2.0 * rec.a_k),
                residual_sum_slack: residual_sum - 2.0 * r * r,
                z_distance_slack: zd - r,
                growth_slack: 0.25 * inv_sqrt_sum * inv_sqrt_sum - rec.a_k,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::test_problems::Diag;

    #[test]
    fn coefficient_examples() {
        assert_eq!(ms_coefficients(0.0, 1.0), (1.0, 1.0));
        assert_eq!(ms_coefficients(2.0, 1.0), (2.0, 4.0));
        assert_eq!(ms_coefficients(0.0, 4.0), (0.25, 0.25));
    }

    #[test]
    fn coefficient_identity() {
        for &(a, l) in &[(0.0, 0.3), (1.5, 2.0), (1e4, 1e-3), (7.0, 123.0)] {
            let (step, total) = ms_coefficients(a, l);
            assert!((l * step * step - total).abs() <= 1e-12 * total);
        }
    }

    #[test]
    fn extrapolate_examples() {
        let y = [1.0, 2.0];
        let z = [3.0, -2.0];
        assert_eq!(extrapolate(&y, &y, 0.7, 0.3, 1.0).unwrap().as_slice(), &y);
        assert_eq!(extrapolate(&y, &z, 0.0, 0.5, 0.5).unwrap().as_slice(), &z);
        assert_eq!(extrapolate(&y, &z, 2.0, 2.0, 4.0).unwrap().as_slice(), &[2.0, 0.0]);
        assert!(extrapolate(&y, &[1.0], 1.0, 1.0, 2.0).is_err());
    }

    fn ms_at(y: f64) -> MsCheck {
        let p = Diag(vec![1.0]);
        let o = Oracle::new(&p);
        let prox = ProxOracle::new(&o, 1.0, Vector::new(vec![2.0]).unwrap()).unwrap();
        let c = ms_condition(&prox, &[y]).unwrap();
        assert_eq!(o.counter_snapshot().full_gradients, 1);
        c
    }

    #[test]
    fn ms_condition_examples() {
        assert_eq!(ms_at(1.0), MsCheck { holds: true, lhs: 0.0, rhs: 0.5 });
        let c = ms_at(1.1);
        assert!(c.holds && (c.lhs - 0.2).abs() < 1e-15 && (c.rhs - 0.45).abs() < 1e-15);
        assert_eq!(ms_at(1.5), MsCheck { holds: false, lhs: 1.0, rhs: 0.25 });
        assert_eq!(ms_at(2.0), MsCheck { holds: false, lhs: 2.0, rhs: 0.0 });
    }

    fn one_dim(c: f64) -> (Diag, CatalystConfig) {
        let mut cfg = CatalystConfig::for_smoothness(c);
        cfg.eps = 1e-12;
        (Diag(vec![c]), cfg)
    }

    fn exact_gd(c: f64) -> InnerSolver {
        InnerSolver::Gd(crate::solvers::GradientDescent::new(crate::solvers::StepRule::InverseSmoothness { lf: c }))
    }

    #[test]
    fn first_trial_is_alpha_times_previous() {
        let (p, cfg) = one_dim(1.0);
        let o = Oracle::new(&p);
        let mut st = EnvelopeState::new(Vector::new(vec![1.0]).unwrap(), 0.3);
        let rec = catalyst_outer_step(&mut st, &cfg, &mut exact_gd(1.0), &o).unwrap();
        assert_eq!(rec.trial_l[0], 2.0 * 0.3);
        // capped at L_u
        let mut st = EnvelopeState::new(Vector::new(vec![1.0]).unwrap(), 9.0);
        let rec = catalyst_outer_step(&mut st, &cfg, &mut exact_gd(1.0), &o).unwrap();
        assert_eq!(rec.trial_l[0], cfg.lu);
    }

    #[test]
    fn constant_effort_runs_down_to_ld() {
        // An exact one-step inner solver never grows its effort, so the
        // search only ends at L_d.
        let (p, cfg) = one_dim(1.0);
        let o = Oracle::new(&p);
        let mut st = EnvelopeState::new(Vector::new(vec![1.0]).unwrap(), cfg.l0);
        let rec = catalyst_outer_step(&mut st, &cfg, &mut exact_gd(1.0), &o).unwrap();
        assert!(rec.units_per_attempt.iter().all(|&u| u == 1));
        assert_eq!(rec.l_accepted, cfg.ld);
        assert_eq!(*rec.trial_l.last().unwrap(), cfg.ld);
        assert!(rec.trial_l.windows(2).all(|w| w[1] < w[0]));
        assert!(rec.cert_lhs <= rec.cert_rhs);
    }

    #[test]
    fn effort_growth_stops_after_second_attempt() {
        let (p, mut cfg) = one_dim(1.0);
        cfg.gamma = 0.9;
        let o = Oracle::new(&p);
        let mut st = EnvelopeState::new(Vector::new(vec![1.0]).unwrap(), 1.0);
        let rec = catalyst_outer_step(&mut st, &cfg, &mut exact_gd(1.0), &o).unwrap();
        assert_eq!(rec.attempts, 2);
        assert_eq!(rec.l_accepted, rec.trial_l[1]);
        assert_eq!(rec.trial_l[1], 2.0 / 1.5);
        assert_eq!(st.l_prev, rec.l_accepted);
    }

    #[test]
    fn rejected_trials_leave_accumulator_alone() {
        let (p, cfg) = one_dim(1.0);
        let o = Oracle::new(&p);
        let mut st = EnvelopeState::new(Vector::new(vec![1.0]).unwrap(), cfg.l0);
        let rec = catalyst_outer_step(&mut st, &cfg, &mut exact_gd(1.0), &o).unwrap();
        let (a, total) = ms_coefficients(0.0, rec.l_accepted);
        assert_eq!((rec.a_step, rec.a_k, st.a), (a, total, total));
    }

    #[test]
    fn inner_cap_is_reported_with_context() {
        let p = Diag(vec![1.0, 1e-3]);
        let o = Oracle::new(&p);
        let mut cfg = CatalystConfig::for_smoothness(1.0);
        cfg.inner_unit_cap = 1;
        let mut inner = InnerSolver::Gd(crate::solvers::GradientDescent::new(crate::solvers::StepRule::Fixed(1e-6)));
        let run = catalyst_run(&o, Vector::new(vec![1.0, 1.0]).unwrap(), &cfg, &mut inner, Some(0.0)).unwrap();
        assert_eq!(run.trace.terminal_status, TerminalStatus::InnerCap);
        assert!(run.trace.error.as_deref().unwrap().contains("attempt 1"));
    }

    #[test]
    fn run_is_deterministic_and_certified() {
        let p = Diag(vec![1.0, 0.5, 0.1, 0.01, 0.0]);
        let y0 = Vector::new(vec![1.0, -1.0, 2.0, 0.5, 3.0]).unwrap();
        let cfg = CatalystConfig { eps: 1e-8, ..CatalystConfig::for_smoothness(1.0) };
        let go = || {
            let o = Oracle::new(&p);
            catalyst_run(
                &o,
                y0.clone(),
                &cfg,
                &mut InnerSolver::Steepest(crate::solvers::SteepestDescent::new()),
                Some(0.0),
            )
            .unwrap()
        };
        let a = go();
        let b = go();
        assert_eq!(a.trace.terminal_status, TerminalStatus::Converged);
        assert_eq!(a.records, b.records);
        let x_star = [0.0, 0.0, 0.0, 0.0, 3.0];
        for c in certificate_slacks(&a.records, &y0, &x_star, 0.0) {
            assert!(c.value_bound_slack <= 1e-12);
            assert!(c.residual_sum_slack <= 1e-12);
            assert!(c.z_distance_slack <= 1e-12);
            assert!(c.growth_slack <= 1e-12);
        }
        let costs: Vec<f64> = a.trace.events.iter().map(|e| e.grad_equiv).collect();
        assert!(costs.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn config_validation() {
        let mut cfg = CatalystConfig::for_smoothness(1.0);
        assert!(cfg.validate().unwrap().is_empty());
        cfg.gamma = 0.9;
        assert_eq!(cfg.validate().unwrap().len(), 1);
        cfg.gamma = 1.6;
        assert!(cfg.validate().is_err());
        let mut cfg = CatalystConfig::for_smoothness(1.0);
        cfg.ld = 20.0;
        assert!(cfg.validate().is_err());
    }
}
