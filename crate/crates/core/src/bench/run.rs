use std::any::Any;
use std::fs::File;
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::config::{Beta0, DataSource, ProblemSpec, RunSpec};
use crate::envelope::catalyst_run;
use crate::error::{Error, Result};
use crate::numkit::{Rng, Vector};
use crate::oracle::{BlockLayout, Objective, Oracle};
use crate::problems::{
    bundled_a1a_sample, lf_estimate, read_libsvm, ExperimentProblem, LogisticProblem, QuadraticProblem,
};
use crate::solvers::{
    run_until, AlternatingMinimization, GradientDescent, InnerSolver, MethodKind, Racdm, RacdmState, RunOptions,
    SteepestDescent, StepRule,
};
use crate::trace::{Stopwatch, TerminalStatus, Trace, TraceEvent};

/// Tag for the solver's random stream, split off the run seed so the
/// starting point does not depend on the method.
const SOLVER_STREAM: u64 = 0x5241_4344;

#[derive(Debug, Clone)]
pub struct RunResult {
    pub spec: RunSpec,
    /// Problem dimension, 0 if the problem could not be built.
    pub dim: usize,
    /// Smoothness estimate the relative parameters were resolved against.
    pub lf: Option<f64>,
    pub trace: Trace,
}

impl RunResult {
    fn failed(spec: &RunSpec, err: String) -> Self {
        let mut trace = Trace::new(None);
        trace.terminal_status = TerminalStatus::Failed;
        trace.error = Some(err);
        RunResult { spec: spec.clone(), dim: 0, lf: None, trace }
    }
}

pub fn build_problem(spec: &RunSpec) -> Result<ExperimentProblem> {
    match &spec.problem {
        ProblemSpec::Quadratic { n, seed, file } => {
            let q = match file {
                Some(path) => QuadraticProblem::from_text(&read_file(path)?)?,
                None => QuadraticProblem::generate(*n, &mut Rng::new(*seed)),
            };
            let q = match spec.blocks {
                Some(p) if spec.method == MethodKind::Am => {
                    let n = q.matrix().rows();
                    q.with_blocks(BlockLayout::contiguous(n, p)?)?
                }
                _ => q,
            };
            Ok(ExperimentProblem::Quadratic(q))
        }
        ProblemSpec::Logistic { data, n_features } => {
            let ds = match data {
                DataSource::Bundled => bundled_a1a_sample()?,
                DataSource::File(path) => {
                    let f = File::open(path).map_err(|e| match e.kind() {
                        std::io::ErrorKind::NotFound => Error::MissingFile(path.display().to_string()),
                        _ => e.into(),
                    })?;
                    read_libsvm(BufReader::new(f))?
                }
            };
            Ok(ExperimentProblem::Logistic(LogisticProblem::new(&ds, Some(*n_features))?))
        }
    }
}

fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.display().to_string()),
        _ => e.into(),
    })
}

/// The inner (or standalone) solver for a spec, with its initial state.
pub fn build_solver(spec: &RunSpec, dim: usize, lf: f64, rng: Rng) -> InnerSolver {
    match spec.method {
        MethodKind::Gd => InnerSolver::Gd(GradientDescent::new(match spec.step {
            Some(h) => StepRule::Fixed(h),
            None => StepRule::InverseSmoothness { lf },
        })),
        MethodKind::SteepestDescent => InnerSolver::Steepest(SteepestDescent::new()),
        MethodKind::Racdm => {
            let beta0 = match spec.beta0 {
                Beta0::InvL0 => 1.0 / (spec.l0 * lf),
                Beta0::Value(b) => b,
            };
            InnerSolver::Racdm(Racdm::new(RacdmState::uniform(dim, beta0), rng))
        }
        MethodKind::Am => InnerSolver::Am(AlternatingMinimization),
    }
}

/// Starting point with entries drawn from U(0, 1).
pub fn starting_point(dim: usize, rng: &mut Rng) -> Vector {
    Vector::new((0..dim).map(|_| rng.uniform()).collect()).expect("uniform draws are finite")
}

/// Runs one spec; never panics and never returns an error — failures are
/// reported through the trace.
pub fn execute_run(spec: &RunSpec) -> RunResult {
    match catch_unwind(AssertUnwindSafe(|| try_run(spec))) {
        Ok(Ok(r)) => r,
        Ok(Err(e)) => RunResult::failed(spec, e.to_string()),
        Err(payload) => RunResult::failed(spec, format!("panicked: {}", panic_message(payload.as_ref()))),
    }
}

fn panic_message(p: &(dyn Any + Send)) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown payload".into())
}

fn try_run(spec: &RunSpec) -> Result<RunResult> {
    let problem = build_problem(spec)?;
    let lf = lf_estimate(&problem)?;
    let p = problem.as_problem();
    let dim = p.dim();
    let f_ref = p.optimal_value();

    let mut rng = Rng::new(spec.run_seed);
    let y0 = starting_point(dim, &mut rng);
    let mut solver = build_solver(spec, dim, lf, rng.fork(SOLVER_STREAM));
    let oracle = Oracle::new(p);

    let trace = if spec.accelerated {
        let cfg = spec.catalyst_config(lf);
        catalyst_run(&oracle, y0, &cfg, &mut solver, f_ref)?.trace
    } else {
        plain_run(spec, &oracle, y0, &mut solver, f_ref)
    };
    Ok(RunResult { spec: spec.clone(), dim, lf: Some(lf), trace })
}

fn plain_run(spec: &RunSpec, oracle: &Oracle<'_>, y0: Vector, solver: &mut InnerSolver, f_ref: Option<f64>) -> Trace {
    let started = Stopwatch::start();
    let mut trace = Trace::new(f_ref);
    let result = run_until(
        solver,
        oracle,
        y0,
        |x, unit| {
            trace.push(TraceEvent {
                outer_k: unit,
                grad_equiv: oracle.cost(),
                f_value: oracle.peek_value(x),
                gap: f64::NAN,
                l_k: None,
                a_k: None,
                inner_units: None,
                wall_ms: started.elapsed_ms(),
            });
            let done = f_ref.is_some() && trace.final_gap() <= spec.eps;
            let broke = spec.budget.is_some_and(|b| oracle.cost() >= b);
            Ok(done || broke)
        },
        RunOptions::capped(spec.max_units),
    );
    trace.terminal_status = match result {
        Ok(_) if f_ref.is_some() && trace.final_gap() <= spec.eps => TerminalStatus::Converged,
        Ok(_) => TerminalStatus::Budget,
        Err(Error::CapExceeded { .. }) => TerminalStatus::OuterCap,
        Err(e) => {
            trace.error = Some(e.to_string());
            TerminalStatus::Failed
        }
    };
    trace
}

/// Executes `specs` on up to `jobs` worker threads. Results come back in
/// spec order and do not depend on `jobs`.
///
/// Problems without a known optimal value (logistic regression) get the
/// session's best value on the same data as reference; a run whose budget
/// or cap ran out is then reported converged if its gap reached `eps`.
pub fn execute_runs(specs: &[RunSpec], jobs: usize) -> Vec<RunResult> {
    let jobs = jobs.clamp(1, specs.len().max(1));
    if jobs == 1 {
        // No worker threads (also the only option on wasm32).
        let mut results: Vec<RunResult> = specs.iter().map(execute_run).collect();
        apply_session_reference(&mut results);
        return results;
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<RunResult>>> = specs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(spec) = specs.get(i) else { break };
                let r = execute_run(spec);
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    let mut results: Vec<RunResult> =
        slots.into_iter().map(|m| m.into_inner().unwrap().expect("every slot filled")).collect();
    apply_session_reference(&mut results);
    results
}

fn apply_session_reference(results: &mut [RunResult]) {
    let needs_ref = |r: &RunResult| r.trace.f_ref.is_none() && !r.trace.events.is_empty();
    let mut groups: Vec<ProblemSpec> = Vec::new();
    for r in results.iter().filter(|r| needs_ref(r)) {
        if !groups.contains(&r.spec.problem) {
            groups.push(r.spec.problem.clone());
        }
    }
    for g in groups {
        let best = results
            .iter()
            .filter(|r| needs_ref(r) && r.spec.problem == g)
            .filter_map(|r| r.trace.best_value())
            .fold(f64::INFINITY, f64::min);
        for r in results.iter_mut().filter(|r| needs_ref(r) && r.spec.problem == g) {
            r.trace.set_reference(best);
            let reached = r.trace.events.iter().any(|e| e.gap <= r.spec.eps);
            if reached && matches!(r.trace.terminal_status, TerminalStatus::Budget | TerminalStatus::OuterCap) {
                r.trace.terminal_status = TerminalStatus::Converged;
            }
        }
    }
}

/// Process exit code for a finished session: 0 if every run converged,
/// 2 otherwise.
pub fn exit_code(results: &[RunResult]) -> i32 {
    if results.iter().all(|r| r.trace.terminal_status == TerminalStatus::Converged) {
        0
    } else {
        2
    }
}
