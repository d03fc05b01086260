//! Principal branch of the Lambert W function.
//!
//! `W0(x)` is the real solution `w >= -1` of `w * exp(w) = x` for
//! `x >= -1/e`. Every equilibrium contract in this crate is of the form
//! `1 / W0(r e / c)`, so the argument is almost always well above `e`.

use std::f64::consts::E;

use crate::error::{Error, Result};

/// Convergence settings for [`lambert_w0_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WConfig {
    /// Accept `w` once `|w e^w - x| <= rel_tolerance * max(1, |x|)`.
    pub rel_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for WConfig {
    fn default() -> Self {
        Self {
            rel_tolerance: 1e-14,
            max_iterations: 100,
        }
    }
}

impl WConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tolerance > 0.0 && self.rel_tolerance.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "rel_tolerance",
                value: self.rel_tolerance,
                reason: "must be finite and > 0",
            });
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iterations",
                value: 0.0,
                reason: "must be >= 1",
            });
        }
        Ok(())
    }
}

const BRANCH_POINT: f64 = -1.0 / E;

/// `W0(x)` with the default [`WConfig`].
pub fn lambert_w0(x: f64) -> Result<f64> {
    lambert_w0_with(x, &WConfig::default())
}

/// `W0(x)` by Halley iteration, falling back to bisection when Halley fails
/// to reach the residual tolerance.
pub fn lambert_w0_with(x: f64, cfg: &WConfig) -> Result<f64> {
    cfg.validate()?;
    if x.is_nan() || x < BRANCH_POINT {
        return Err(Error::LambertDomain { x });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    // The branch point itself; also absorbs x within rounding of -1/e.
    if x - BRANCH_POINT <= f64::EPSILON {
        return Ok(-1.0);
    }

    let tol = cfg.rel_tolerance * x.abs().max(1.0);
    if let Some(w) = halley(x, initial_guess(x), tol, cfg.max_iterations) {
        return Ok(w);
    }
    bisect(x, tol, cfg.max_iterations)
}

/// `log(x / W0(x))`, which equals `W0(x)` for every `x > 0`.
pub fn log_x_over_w(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter {
            name: "x",
            value: x,
            reason: "log(x / W(x)) needs finite x > 0",
        });
    }
    let w = lambert_w0(x)?;
    Ok((x / w).ln())
}

fn initial_guess(x: f64) -> f64 {
    if x > E {
        let l = x.ln();
        l - l.ln()
    } else if x > 0.0 {
        // W0 is concave with W0(0) = 0 and W0(e) = 1; x/e under-estimates
        // slightly and Halley corrects it in a couple of steps.
        x / E
    } else {
        // Series about the branch point.
        let p = (2.0 * (E * x + 1.0)).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    }
}

fn halley(x: f64, mut w: f64, tol: f64, max_iterations: usize) -> Option<f64> {
    for _ in 0..max_iterations {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() <= tol {
            // One Newton step past the tolerance lands at machine precision.
            let polished = w - f / (ew * (w + 1.0));
            let ok = polished.is_finite()
                && (polished * polished.exp() - x).abs() <= f.abs();
            return Some(if ok { polished } else { w });
        }
        let wp1 = w + 1.0;
        if wp1 <= 0.0 {
            return None;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            return None;
        }
        let next = w - f / denom;
        if !next.is_finite() || next < -1.0 {
            return None;
        }
        if next == w {
            // Stalled at the floating-point floor; accept only if close.
            return ((next * next.exp() - x).abs() <= 4.0 * tol).then_some(next);
        }
        w = next;
    }
    None
}

fn bisect(x: f64, tol: f64, max_iterations: usize) -> Result<f64> {
    let (mut lo, mut hi) = if x > 0.0 {
        (0.0, (x.ln() + 1.0).max(1.0))
    } else {
        (-1.0, 0.0)
    };
    // Bisection halves the bracket each step; give it enough room to reach
    // machine precision regardless of the Halley iteration budget.
    let budget = max_iterations.max(200);
    for _ in 0..budget {
        let mid = 0.5 * (lo + hi);
        let f = mid * mid.exp() - x;
        if f.abs() <= tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        if f > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::NonConvergence {
        op: "lambert_w0",
        iterations: budget,
    })
}
