//! Brute-force reference values computed by adaptive quadrature of integral
//! representations. Slow, independent of the series and continued fractions
//! in `specfun`.

use crate::quad::{adaptive, adaptive_semi_infinite};
use std::f64::consts::PI;

const TOL: f64 = 1e-14;

// Split [0, π] so oscillatory integrands get at least a panel per period.
fn oscillatory_0_pi<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
    let panels = ((x.abs() / 2.0).ceil() as usize).max(1);
    let h = PI / panels as f64;
    (0..panels).map(|i| adaptive(&f, i as f64 * h, (i + 1) as f64 * h, TOL)).sum()
}

/// J0(x) = (1/π) ∫_0^π cos(x sin θ) dθ.
pub fn j0(x: f64) -> f64 {
    oscillatory_0_pi(|t| (x * t.sin()).cos(), x) / PI
}

/// Y0(x) = (1/π) ∫_0^π sin(x sin θ) dθ − (2/π) ∫_0^∞ e^{−x sinh t} dt.
pub fn y0(x: f64) -> f64 {
    let a = oscillatory_0_pi(|t| (x * t.sin()).sin(), x) / PI;
    // the second integrand decays once sinh t exceeds ~1/x
    let knee = (1.0 / x).asinh().max(1.0);
    let f = |t: f64| (-x * t.sinh()).exp();
    let b = adaptive(f, 0.0, knee, TOL) + adaptive_semi_infinite(f, knee, TOL);
    a - 2.0 * b / PI
}

/// E1(x) = ∫_x^∞ e^{−t}/t dt, written as e^{−x} ∫_0^∞ e^{−u}/(x+u) du.
pub fn e1(x: f64) -> f64 {
    let f = |u: f64| (-u).exp() / (x + u);
    let knee = x.max(1e-300);
    let near = if x < 1.0 {
        // resolve the 1/(x+u) layer of width x near u = 0
        let mut s = 0.0;
        let mut lo = 0.0;
        let mut hi = knee;
        while hi < 1.0 {
            s += adaptive(f, lo, hi, TOL);
            lo = hi;
            hi *= 4.0;
        }
        s + adaptive(f, lo, 1.0, TOL) + adaptive_semi_infinite(f, 1.0, TOL)
    } else {
        adaptive_semi_infinite(f, 0.0, TOL)
    };
    (-x).exp() * near
}

/// Γ(1/2, x) = ∫_x^∞ t^{−1/2} e^{−t} dt via t = x + s², which removes the
/// endpoint singularity at x = 0.
pub fn upper_gamma_half(x: f64) -> f64 {
    let f = |s: f64| 2.0 * s * (-(x + s * s)).exp() / (x + s * s).sqrt();
    if x == 0.0 {
        return adaptive_semi_infinite(|s| 2.0 * (-(s * s)).exp(), 0.0, TOL);
    }
    adaptive_semi_infinite(f, 0.0, TOL)
}
