//! Principal branch of the Lambert W function.
//!
//! Two entry points are provided. [`lambert_w0`] works on the linear argument
//! `x >= -1/e`. [`lambert_w0_exp`] evaluates `W(e^y)` without ever forming
//! `e^y`, which is what the diode models need: their W arguments are of the
//! form `A * exp(B)` and overflow `f64` long before the result does.

use std::f64::consts::E;

use thiserror::Error;

/// `-1/e`, the branch point of `W`.
pub const BRANCH_POINT: f64 = -1.0 / E;

/// Below this log-argument `W(e^y) = e^y (1 - e^y)` is exact to double precision.
const TINY_LOG_ARG: f64 = -40.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum LambertWError {
    #[error("lambert W argument {0} is outside the principal branch domain [-1/e, inf)")]
    Domain(f64),
    #[error(
        "lambert W iteration did not converge for argument {arg} after {iterations} iterations"
    )]
    NoConvergence { arg: f64, iterations: u32 },
}

/// Solver policy for the Halley iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WSolveSettings {
    /// Iteration stops once the Halley step is below `rel_tolerance * |w|`.
    pub rel_tolerance: f64,
    pub max_iterations: u32,
}

impl Default for WSolveSettings {
    fn default() -> Self {
        Self {
            rel_tolerance: 1e-12,
            max_iterations: 64,
        }
    }
}

/// `W0(x)` with default settings.
pub fn lambert_w0(x: f64) -> Result<f64, LambertWError> {
    lambert_w0_with(x, &WSolveSettings::default())
}

/// `W0(e^y)` with default settings.
pub fn lambert_w0_exp(y: f64) -> Result<f64, LambertWError> {
    lambert_w0_exp_with(y, &WSolveSettings::default())
}

pub fn lambert_w0_with(x: f64, settings: &WSolveSettings) -> Result<f64, LambertWError> {
    if x.is_nan() || x < BRANCH_POINT {
        return Err(LambertWError::Domain(x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == BRANCH_POINT {
        return Ok(-1.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    if x > 1e3 {
        // w e^w overflows in the iteration well before x does; switch to logs.
        return lambert_w0_exp_with(x.ln(), settings);
    }

    let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
    if p < 1e-2 {
        // The root is nearly double here and Halley stalls; the branch-point
        // series is already exact to rounding.
        return Ok(branch_series(p));
    }
    let mut w = initial_guess_linear(x);
    for _ in 0..settings.max_iterations {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            return Ok(w);
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            return Ok(w);
        }
        let step = f / denom;
        // Stay on the principal branch near the branch point.
        let next = (w - step).max(-1.0);
        if (next - w).abs() <= settings.rel_tolerance * next.abs().max(f64::MIN_POSITIVE) {
            return Ok(next);
        }
        w = next;
    }
    Err(LambertWError::NoConvergence {
        arg: x,
        iterations: settings.max_iterations,
    })
}

pub fn lambert_w0_exp_with(y: f64, settings: &WSolveSettings) -> Result<f64, LambertWError> {
    if y.is_nan() {
        return Err(LambertWError::Domain(y));
    }
    if y == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    if y < TINY_LOG_ARG {
        let x = y.exp();
        return Ok(x * (1.0 - x));
    }

    // Halley on g(w) = w + ln w - y, which has a single root w > 0.
    let mut w = initial_guess_log(y);
    for _ in 0..settings.max_iterations {
        let g = w + w.ln() - y;
        let g1 = 1.0 + 1.0 / w;
        let g2 = -1.0 / (w * w);
        let step = 2.0 * g * g1 / (2.0 * g1 * g1 - g * g2);
        let mut next = w - step;
        if next <= 0.0 {
            // Overshoot towards zero; halve instead so w stays positive.
            next = 0.5 * w;
        }
        if (next - w).abs() <= settings.rel_tolerance * next {
            return Ok(next);
        }
        w = next;
    }
    Err(LambertWError::NoConvergence {
        arg: y,
        iterations: settings.max_iterations,
    })
}

fn branch_series(p: f64) -> f64 {
    const C: [f64; 7] = [
        -1.0,
        1.0,
        -1.0 / 3.0,
        11.0 / 72.0,
        -43.0 / 540.0,
        769.0 / 17280.0,
        -221.0 / 8505.0,
    ];
    C.iter().rev().fold(0.0, |acc, &c| acc * p + c)
}

fn initial_guess_linear(x: f64) -> f64 {
    if x < -0.25 {
        // Series around the branch point.
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 0.25 {
        x * (1.0 - x + 1.5 * x * x)
    } else {
        winitzki(x.ln_1p())
    }
}

fn initial_guess_log(y: f64) -> f64 {
    if y > 3.0 {
        let ly = y.ln();
        y - ly + ly / y
    } else {
        winitzki(softplus(y))
    }
}

/// Winitzki's uniform approximation `W(x) ~ L (1 - ln(1 + L) / (2 + L))`, `L = ln(1 + x)`.
fn winitzki(l: f64) -> f64 {
    l * (1.0 - l.ln_1p() / (2.0 + l))
}

/// `ln(1 + e^y)` without overflow.
fn softplus(y: f64) -> f64 {
    if y > 30.0 {
        y
    } else {
        y.exp().ln_1p()
    }
}
