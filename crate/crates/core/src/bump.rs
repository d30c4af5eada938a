//! Smooth two-threshold cutoff profiles.
//!
//! With `f(t) = exp(−1/t)` for `t > 0` and `0` otherwise,
//!
//! ```text
//! η(s) = f(outer − s) / (f(outer − s) + f(s − inner))
//! ```
//!
//! is C∞, equal to 1 on `(−∞, inner]`, 0 on `[outer, ∞)` and strictly
//! decreasing in between. Call sites compose it with `‖x‖` or `‖x‖²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this the exponential is treated as exactly zero.
const JUNCTION_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    inner: f64,
    outer: f64,
}

fn f(t: f64) -> f64 {
    if t < JUNCTION_EPS {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

fn f_prime(t: f64) -> f64 {
    if t < JUNCTION_EPS {
        0.0
    } else {
        (-1.0 / t).exp() / (t * t)
    }
}

impl BumpProfile {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner >= 0.0 && outer > inner && outer.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bump profile needs 0 <= inner < outer, got ({inner}, {outer})"
            )));
        }
        Ok(BumpProfile { inner, outer })
    }

    pub fn inner(&self) -> f64 {
        self.inner
    }

    pub fn outer(&self) -> f64 {
        self.outer
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s <= self.inner {
            return 1.0;
        }
        if s >= self.outer {
            return 0.0;
        }
        let a = f(self.outer - s);
        let b = f(s - self.inner);
        if b == 0.0 {
            1.0
        } else if a == 0.0 {
            0.0
        } else {
            a / (a + b)
        }
    }

    /// Exact derivative `dη/ds`; never positive.
    pub fn derivative(&self, s: f64) -> f64 {
        if s <= self.inner || s >= self.outer {
            return 0.0;
        }
        let u = self.outer - s;
        let v = s - self.inner;
        let (a, b) = (f(u), f(v));
        let denom = a + b;
        if denom == 0.0 {
            return 0.0;
        }
        // d/ds f(u) = −f'(u), d/ds f(v) = f'(v)
        -(f_prime(u) * b + a * f_prime(v)) / (denom * denom)
    }

    /// Upper bound on `|η'|`, from a fine grid with 10% headroom.
    pub fn max_slope(&self) -> f64 {
        const GRID: usize = 512;
        let w = self.outer - self.inner;
        let peak = (1..GRID)
            .map(|k| -self.derivative(self.inner + w * k as f64 / GRID as f64))
            .fold(0.0, f64::max);
        1.1 * peak
    }
}
