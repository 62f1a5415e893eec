//! Browser demo: runs small experiment sessions in wasm and hands the
//! traces to `www/index.html` as JSON.
//!
//! Every export has a plain-Rust twin returning `Result<_, String>` so the
//! logic is testable natively.

use adacat::bench::{execute_runs, parse_config, RunResult};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest quadratic the page may request; generation is O(n³).
pub const MAX_N: usize = 200;

#[derive(Debug, Serialize)]
pub struct Curve {
    pub label: String,
    pub accelerated: bool,
    pub status: String,
    pub cost: Vec<f64>,
    pub gap: Vec<f64>,
    /// Accepted `L_k / L_f` per outer iteration; empty for plain runs.
    pub l_rel: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct Session {
    pub lf: f64,
    pub curves: Vec<Curve>,
}

fn curve(r: &RunResult) -> Curve {
    let lf = r.lf.unwrap_or(f64::NAN);
    // The k = 0 event sits at cost 0, which a log axis cannot show.
    let events: Vec<_> = r.trace.events.iter().filter(|e| e.grad_equiv > 0.0).collect();
    Curve {
        label: format!("{}{}", r.spec.method, if r.spec.accelerated { " + envelope" } else { "" }),
        accelerated: r.spec.accelerated,
        status: r.trace.terminal_status.to_string(),
        cost: events.iter().map(|e| e.grad_equiv).collect(),
        gap: events.iter().map(|e| e.gap).collect(),
        l_rel: events.iter().filter_map(|e| e.l_k).map(|l| l / lf).collect(),
    }
}

fn session(config: &str) -> Result<Session, String> {
    let loaded = parse_config(config, std::path::Path::new(".")).map_err(|e| e.to_string())?;
    let results = execute_runs(&loaded.runs, 1);
    if let Some(r) = results.iter().find(|r| r.trace.events.is_empty()) {
        return Err(r.trace.error.clone().unwrap_or_else(|| "run produced no events".into()));
    }
    Ok(Session { lf: results[0].lf.unwrap_or(f64::NAN), curves: results.iter().map(curve).collect() })
}

fn check_method(method: &str) -> Result<(), String> {
    match method {
        "gd" | "sd" | "racdm" => Ok(()),
        _ => Err(format!("unsupported method `{method}`")),
    }
}

/// Plain vs accelerated `method` on the degenerate random quadratic.
pub fn quadratic_session(
    method: &str,
    n: usize,
    seed: u64,
    alpha: f64,
    beta: f64,
    gamma: f64,
    eps: f64,
) -> Result<Session, String> {
    check_method(method)?;
    if !(2..=MAX_N).contains(&n) {
        return Err(format!("n must be in 2..={MAX_N}"));
    }
    session(&format!(
        "[defaults]\nproblem = quadratic\nn = {n}\nseed = {seed}\nmethod = {method}\neps = {eps:e}\n\
         alpha = {alpha}\nbeta = {beta}\ngamma = {gamma}\nmax_units = 20000\n\
         [run plain]\n[run accelerated]\naccelerated = true\n"
    ))
}

/// Plain and accelerated steepest descent and gradient descent on the
/// bundled logistic-regression sample, all within `budget`
/// gradient-equivalents.
pub fn logistic_session(budget: f64, alpha: f64, beta: f64, gamma: f64) -> Result<Session, String> {
    if !(budget > 0.0 && budget <= 5000.0) {
        return Err("budget must be in (0, 5000]".into());
    }
    let mut cfg = format!(
        "[defaults]\nproblem = logistic\nbudget = {budget}\neps = 1e-12\nalpha = {alpha}\nbeta = {beta}\ngamma = {gamma}\n"
    );
    for m in ["sd", "gd"] {
        cfg += &format!("[run {m}]\nmethod = {m}\n[run {m}-acc]\nmethod = {m}\naccelerated = true\n");
    }
    session(&cfg)
}

#[derive(Debug, Serialize)]
pub struct Envelope {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    /// `f_L(x) = min_y f(y) + (L/2)(y − x)²`.
    pub envelope: Vec<f64>,
    /// The minimizing `y`.
    pub prox: Vec<f64>,
}

type Scalar = fn(f64) -> f64;

/// One-dimensional test functions with their derivatives.
fn scalar_fn(kind: &str) -> Result<(Scalar, Scalar), String> {
    use adacat::problems::{sigmoid_neg, softplus_neg};
    match kind {
        "logistic" => Ok((softplus_neg, |t| -sigmoid_neg(t))),
        "quartic" => Ok((|t| 0.25 * t.powi(4), |t| t.powi(3))),
        "abs" => Ok((f64::abs, |t| {
            if t > 0.0 {
                1.0
            } else if t < 0.0 {
                -1.0
            } else {
                0.0
            }
        })),
        _ => Err(format!("unknown function `{kind}`")),
    }
}

/// Moreau envelope of a convex scalar function on `points` samples of
/// `[lo, hi]`. The prox point solves `f'(y) + L(y − x) = 0` by bisection,
/// which only needs the left-hand side to be nondecreasing in `y`.
pub fn moreau_envelope(kind: &str, l: f64, lo: f64, hi: f64, points: usize) -> Result<Envelope, String> {
    if !(l > 0.0 && l.is_finite()) {
        return Err("L must be positive".into());
    }
    if !(lo < hi) || !(2..=2000).contains(&points) {
        return Err("need lo < hi and 2..=2000 points".into());
    }
    let (f, df) = scalar_fn(kind)?;
    let x: Vec<f64> = (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect();
    let prox: Vec<f64> = x
        .iter()
        .map(|&x0| {
            let g = |y: f64| df(y) + l * (y - x0);
            let (mut a, mut b) = (x0 - 1.0, x0 + 1.0);
            while g(a) > 0.0 {
                a -= 2.0 * (x0 - a);
            }
            while g(b) < 0.0 {
                b += 2.0 * (b - x0);
            }
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m == a || m == b {
                    break;
                }
                if g(m) < 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            0.5 * (a + b)
        })
        .collect();
    Ok(Envelope {
        f: x.iter().map(|&t| f(t)).collect(),
        envelope: x.iter().zip(&prox).map(|(&t, &y)| f(y) + 0.5 * l * (y - t) * (y - t)).collect(),
        x,
        prox,
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e)).and_then(|v| serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string())))
}

#[wasm_bindgen(js_name = quadraticSession)]
pub fn quadratic_session_js(
    method: &str,
    n: usize,
    seed: u32,
    alpha: f64,
    beta: f64,
    gamma: f64,
    eps: f64,
) -> Result<String, JsError> {
    to_js(quadratic_session(method, n, seed.into(), alpha, beta, gamma, eps))
}

#[wasm_bindgen(js_name = logisticSession)]
pub fn logistic_session_js(budget: f64, alpha: f64, beta: f64, gamma: f64) -> Result<String, JsError> {
    to_js(logistic_session(budget, alpha, beta, gamma))
}

#[wasm_bindgen(js_name = moreauEnvelope)]
pub fn moreau_envelope_js(kind: &str, l: f64, lo: f64, hi: f64, points: usize) -> Result<String, JsError> {
    to_js(moreau_envelope(kind, l, lo, hi, points))
}
