use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchOptions {
    pub max_doublings: usize,
    /// Cap on bracket-shrinking steps after the sign change is found.
    pub max_refinements: usize,
    /// Accept `h` once `|φ'(h)| ≤ slope_rtol·|φ'(0)|`.
    pub slope_rtol: f64,
    /// Or once the bracket is narrower than `width_rtol·h`.
    pub width_rtol: f64,
}

impl Default for LineSearchOptions {
    fn default() -> Self {
        LineSearchOptions { max_doublings: 100, max_refinements: 200, slope_rtol: 1e-8, width_rtol: 1e-12 }
    }
}

/// Minimizes a convex scalar function given its derivative.
///
/// Doubles from `h_hint` until the slope turns non-negative, then shrinks
/// the bracket with Illinois-modified false position on the slope, falling
/// back to bisection whenever a step fails to halve the bracket. Fails with `NoSignChange` if the function still
/// decreases after all doublings, which signals a direction along which it
/// is unbounded below.
pub fn scalar_minimize<D>(phi_prime: D, h_hint: f64, opts: LineSearchOptions) -> Result<f64>
where
    D: Fn(f64) -> f64,
{
    assert!(h_hint > 0.0, "h_hint must be positive");
    let d0 = phi_prime(0.0);
    if !(d0 < 0.0) {
        return Err(Error::NotDescentDirection { slope: d0 });
    }
    let small = opts.slope_rtol * d0.abs();

    let mut lo = 0.0;
    let mut d_lo = d0;
    let mut hi = h_hint;
    let mut d_hi = phi_prime(hi);
    let mut doublings = 0;
    while d_hi < 0.0 {
        if d_hi.abs() <= small {
            return Ok(hi);
        }
        if doublings == opts.max_doublings {
            return Err(Error::NoSignChange { doublings });
        }
        lo = hi;
        d_lo = d_hi;
        hi *= 2.0;
        doublings += 1;
        d_hi = phi_prime(hi);
    }
    if d_hi.abs() <= small {
        return Ok(hi);
    }

    // Invariant: d_lo < 0 <= d_hi. `w_lo`/`w_hi` are the (possibly
    // down-weighted) slopes used for interpolation.
    let (mut w_lo, mut w_hi) = (d_lo, d_hi);
    let mut kept: Option<bool> = None; // which end survived the last step (true = lo)
    let mut width = hi - lo;
    for _ in 0..opts.max_refinements {
        let mut h = (lo * w_hi - hi * w_lo) / (w_hi - w_lo);
        if !(h > lo && h < hi) {
            h = 0.5 * (lo + hi);
        }
        let d = phi_prime(h);
        if d.abs() <= small {
            return Ok(h);
        }
        if d < 0.0 {
            lo = h;
            w_lo = d;
            if kept == Some(false) {
                w_hi *= 0.5;
            }
            kept = Some(false);
        } else {
            hi = h;
            w_hi = d;
            if kept == Some(true) {
                w_lo *= 0.5;
            }
            kept = Some(true);
        }
        if hi - lo <= opts.width_rtol * hi {
            break;
        }
        if hi - lo > 0.5 * width {
            // Slow progress: take a bisection step as well.
            let mid = 0.5 * (lo + hi);
            let d = phi_prime(mid);
            if d.abs() <= small {
                return Ok(mid);
            }
            if d < 0.0 {
                lo = mid;
                w_lo = d;
            } else {
                hi = mid;
                w_hi = d;
            }
            kept = None;
        }
        width = hi - lo;
    }
    let h = 0.5 * (lo + hi);
    // Guard against returning 0 when the minimizer sits below the bracket's resolution.
    Ok(if h > 0.0 { h } else { hi })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_of_shifted_parabola() {
        let h = scalar_minimize(|h| 2.0 * (h - 3.0), 1.0, LineSearchOptions::default()).unwrap();
        assert!((h - 3.0).abs() <= 1e-8, "{h}");
    }

    #[test]
    fn closed_form_for_any_center() {
        for &c in &[1e-6, 0.01, 0.7, 2.5, 1234.5] {
            // φ(h) = ½·2·(h − c)²
            let h = scalar_minimize(|h| 2.0 * (h - c), 1.0, LineSearchOptions::default()).unwrap();
            assert!((h - c).abs() <= 1e-8 * c.max(1.0), "c={c} h={h}");
        }
    }

    #[test]
    fn unbounded_direction_reports_no_sign_change() {
        let r = scalar_minimize(|_| -1.0, 1.0, LineSearchOptions::default());
        assert_eq!(r, Err(Error::NoSignChange { doublings: 100 }));
    }

    #[test]
    fn ascent_direction_rejected() {
        assert!(matches!(
            scalar_minimize(|h| h + 1.0, 1.0, LineSearchOptions::default()),
            Err(Error::NotDescentDirection { .. })
        ));
    }

    #[test]
    fn few_evaluations_on_smooth_slopes() {
        use std::cell::Cell;
        let calls = Cell::new(0);
        let h = scalar_minimize(
            |h: f64| {
                calls.set(calls.get() + 1);
                (h - 0.37).sinh() + 0.1 * (h - 0.37)
            },
            1.0,
            LineSearchOptions::default(),
        )
        .unwrap();
        assert!((h - 0.37).abs() < 1e-8);
        assert!(calls.get() < 20, "{} slope evaluations", calls.get());
    }

    #[test]
    fn bracket_contains_sign_change() {
        // φ(h) = cosh(h − 2): slope sinh(h − 2).
        let h = scalar_minimize(|h: f64| (h - 2.0).sinh(), 0.1, LineSearchOptions::default()).unwrap();
        assert!((h - 2.0).abs() < 1e-8);
    }
}
