//! Convergence traces: one record per outer iteration (accelerated runs) or
//! per iteration unit (plain runs).

use std::fmt;

/// Wall-clock timer for the `wall_ms` column. `std::time::Instant` is not
/// available on `wasm32-unknown-unknown`, where it always reads 0.
#[derive(Debug, Clone, Copy)]
pub struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    started: std::time::Instant,
}

impl Stopwatch {
    pub fn start() -> Self {
        Stopwatch {
            #[cfg(not(target_arch = "wasm32"))]
            started: std::time::Instant::now(),
        }
    }

    pub fn elapsed_ms(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.started.elapsed().as_secs_f64() * 1e3;
        #[cfg(target_arch = "wasm32")]
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEvent {
    pub outer_k: usize,
    pub grad_equiv: f64,
    pub f_value: f64,
    /// `f_value − f_ref`; NaN until a reference value is known.
    pub gap: f64,
    pub l_k: Option<f64>,
    pub a_k: Option<f64>,
    pub inner_units: Option<usize>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalStatus {
    Converged,
    OuterCap,
    InnerCap,
    /// Gradient-equivalent budget exhausted.
    Budget,
    /// Any other solver error; see [`Trace::error`].
    Failed,
}

impl TerminalStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminalStatus::Converged => "converged",
            TerminalStatus::OuterCap => "outer_cap",
            TerminalStatus::InnerCap => "inner_cap",
            TerminalStatus::Budget => "budget",
            TerminalStatus::Failed => "failed",
        }
    }
}

impl fmt::Display for TerminalStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
    pub terminal_status: TerminalStatus,
    pub error: Option<String>,
    pub f_ref: Option<f64>,
}

impl Trace {
    pub fn new(f_ref: Option<f64>) -> Self {
        Trace { events: Vec::new(), terminal_status: TerminalStatus::OuterCap, error: None, f_ref }
    }

    pub fn push(&mut self, mut ev: TraceEvent) {
        ev.gap = self.f_ref.map_or(f64::NAN, |r| ev.f_value - r);
        self.events.push(ev);
    }

    pub fn last(&self) -> Option<&TraceEvent> {
        self.events.last()
    }

    pub fn best_value(&self) -> Option<f64> {
        self.events.iter().map(|e| e.f_value).reduce(f64::min)
    }

    /// Sets the reference value and recomputes every gap.
    pub fn set_reference(&mut self, f_ref: f64) {
        self.f_ref = Some(f_ref);
        for ev in &mut self.events {
            ev.gap = ev.f_value - f_ref;
        }
    }

    pub fn final_gap(&self) -> f64 {
        self.last().map_or(f64::NAN, |e| e.gap)
    }

    pub fn total_grad_equiv(&self) -> f64 {
        self.last().map_or(0.0, |e| e.grad_equiv)
    }

    /// Cost at which the gap first drops to `threshold`, if it ever does.
    pub fn cost_to_reach(&self, threshold: f64) -> Option<f64> {
        self.events.iter().find(|e| e.gap <= threshold).map(|e| e.grad_equiv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(k: usize, cost: f64, f: f64) -> TraceEvent {
        TraceEvent {
            outer_k: k,
            grad_equiv: cost,
            f_value: f,
            gap: 0.0,
            l_k: None,
            a_k: None,
            inner_units: None,
            wall_ms: 0.0,
        }
    }

    #[test]
    fn reference_fills_gaps() {
        let mut t = Trace::new(None);
        t.push(ev(0, 0.0, 3.0));
        t.push(ev(1, 1.0, 2.0));
        assert!(t.events[0].gap.is_nan());
        t.set_reference(1.5);
        assert_eq!(t.events[1].gap, 0.5);
        assert_eq!(t.cost_to_reach(0.5), Some(1.0));
        assert_eq!(t.cost_to_reach(0.1), None);
        assert_eq!(t.best_value(), Some(2.0));
    }
}
