//! Special functions: Bessel J0/J1/Y0/Y1, Hankel H0^(1), exponential
//! integral E1, erfc and the upper incomplete gamma function of order 1/2.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Euler–Mascheroni constant, 20 significant digits.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

/// Below this argument the Bessel functions use their ascending series.
pub const BESSEL_SERIES_MAX: f64 = 12.0;

const E1_SERIES_MAX: f64 = 1.0;
const E1_UNDERFLOW: f64 = 745.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecFunResult {
    pub value: Complex64,
    pub est_abs_error: f64,
}

impl SpecFunResult {
    fn real(value: f64, est_abs_error: f64) -> Self {
        Self { value: Complex64::new(value, 0.0), est_abs_error }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecFun {
    J0,
    J1,
    Y0,
    Y1,
    Hankel10,
    E1,
    Erfc,
    UpperGammaHalf,
}

impl SpecFun {
    pub fn name(self) -> &'static str {
        match self {
            SpecFun::J0 => "J0",
            SpecFun::J1 => "J1",
            SpecFun::Y0 => "Y0",
            SpecFun::Y1 => "Y1",
            SpecFun::Hankel10 => "H0(1)",
            SpecFun::E1 => "E1",
            SpecFun::Erfc => "erfc",
            SpecFun::UpperGammaHalf => "Gamma(1/2,x)",
        }
    }
}

/// Evaluates `f` at `x` together with a rough absolute error estimate.
pub fn evaluate(f: SpecFun, x: f64) -> Result<SpecFunResult> {
    let eps = f64::EPSILON;
    let r = match f {
        SpecFun::J0 => SpecFunResult::real(bessel_j0(x), 16.0 * eps * bessel_scale(x)),
        SpecFun::J1 => SpecFunResult::real(bessel_j1(x), 16.0 * eps * bessel_scale(x)),
        SpecFun::Y0 => {
            let v = bessel_y0(x)?;
            SpecFunResult::real(v, 16.0 * eps * bessel_scale(x).max(v.abs()))
        }
        SpecFun::Y1 => {
            let v = bessel_y1(x)?;
            SpecFunResult::real(v, 16.0 * eps * bessel_scale(x).max(v.abs()))
        }
        SpecFun::Hankel10 => {
            let v = hankel1_0(x)?;
            SpecFunResult { value: v, est_abs_error: 16.0 * eps * bessel_scale(x).max(v.norm()) }
        }
        SpecFun::E1 => {
            let v = exp_integral_e1(x)?;
            SpecFunResult::real(v, 8.0 * eps * v.abs())
        }
        SpecFun::Erfc => {
            let v = erfc(x);
            SpecFunResult::real(v, 4.0 * eps * v.abs())
        }
        SpecFun::UpperGammaHalf => {
            let v = upper_gamma_half(x)?;
            SpecFunResult::real(v, 4.0 * eps * v.abs())
        }
    };
    Ok(r)
}

// Largest term magnitude of the ascending series, which bounds the
// cancellation error there; 1 in the asymptotic range.
fn bessel_scale(x: f64) -> f64 {
    if x.abs() <= BESSEL_SERIES_MAX {
        libm::cosh(x).sqrt().max(1.0)
    } else {
        1.0
    }
}

/// Exponential integral E1(x) = ∫_x^∞ e^{-t}/t dt.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("E1 requires x > 0, got {x}")));
    }
    Ok(e1_unchecked(x))
}

pub(crate) fn e1_unchecked(x: f64) -> f64 {
    if x <= E1_SERIES_MAX {
        // -γ - ln x - Σ_{k≥1} (-x)^k / (k·k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        -EULER_GAMMA - x.ln() - sum
    } else if x > E1_UNDERFLOW {
        0.0
    } else {
        // Modified Lentz on e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Γ(1/2, x) = √π · erfc(√x).
pub fn upper_gamma_half(x: f64) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::Domain(format!("Gamma(1/2, x) requires x >= 0, got {x}")));
    }
    Ok(PI.sqrt() * erfc(x.sqrt()))
}

// Ascending series pieces shared by J0/Y0 and J1/Y1.
// Returns (J0, S0) with Y0 = (2/π)[(ln(x/2)+γ) J0 + S0],
// S0 = Σ_{k≥1} (-1)^{k+1} H_k (x²/4)^k / (k!)².
fn series0(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut j = 1.0;
    let mut s = 0.0;
    let mut harmonic = 0.0;
    for k in 1..80 {
        let kf = k as f64;
        term *= -q / (kf * kf);
        harmonic += 1.0 / kf;
        j += term;
        s -= harmonic * term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    (j, s)
}

// Returns (J1, S1) with
// Y1 = (2/π)(ln(x/2)+γ) J1 - 2/(πx) - (1/π) Σ_{k≥0} (-1)^k (H_k + H_{k+1}) (x/2)^{2k+1} / (k!(k+1)!),
// S1 holding the last sum.
fn series1(x: f64) -> (f64, f64) {
    let h = 0.5 * x;
    let q = h * h;
    let mut term = h;
    let mut j = term;
    let mut s = term; // k = 0: H_0 + H_1 = 1
    let mut hk = 0.0;
    let mut hk1 = 1.0;
    for k in 1..80 {
        let kf = k as f64;
        term *= -q / (kf * (kf + 1.0));
        hk += 1.0 / kf;
        hk1 += 1.0 / (kf + 1.0);
        j += term;
        s += (hk + hk1) * term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    (j, s)
}

// Hankel asymptotic expansion: returns (P, Q) for order nu (0 or 1) such that
// J = sqrt(2/(πx)) (P cos χ - Q sin χ), Y = sqrt(2/(πx)) (P sin χ + Q cos χ),
// χ = x - (2ν+1)π/4.
fn hankel_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= (mu - odd * odd) / (kf * 8.0 * x);
        if a.abs() > prev {
            break;
        }
        prev = a.abs();
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    (p, q)
}

pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= BESSEL_SERIES_MAX {
        series0(x).0
    } else {
        let (p, q) = hankel_pq(0.0, x);
        let chi = x - 0.25 * PI;
        (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
    }
}

pub fn bessel_j1(x: f64) -> f64 {
    let sign = x.signum();
    let x = x.abs();
    let v = if x <= BESSEL_SERIES_MAX {
        series1(x).0
    } else {
        let (p, q) = hankel_pq(1.0, x);
        let chi = x - 0.75 * PI;
        (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
    };
    sign * v
}

pub fn bessel_y0(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("Y0 requires x > 0, got {x}")));
    }
    Ok(if x <= BESSEL_SERIES_MAX {
        let (j, s) = series0(x);
        (2.0 / PI) * (((0.5 * x).ln() + EULER_GAMMA) * j + s)
    } else {
        let (p, q) = hankel_pq(0.0, x);
        let chi = x - 0.25 * PI;
        (2.0 / (PI * x)).sqrt() * (p * chi.sin() + q * chi.cos())
    })
}

pub fn bessel_y1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("Y1 requires x > 0, got {x}")));
    }
    Ok(if x <= BESSEL_SERIES_MAX {
        let (j, s) = series1(x);
        (2.0 / PI) * ((0.5 * x).ln() + EULER_GAMMA) * j - 2.0 / (PI * x) - s / PI
    } else {
        let (p, q) = hankel_pq(1.0, x);
        let chi = x - 0.75 * PI;
        (2.0 / (PI * x)).sqrt() * (p * chi.sin() + q * chi.cos())
    })
}

/// H0^(1)(x) = J0(x) + i Y0(x).
pub fn hankel1_0(x: f64) -> Result<Complex64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("H0(1) has a logarithmic singularity at 0, got x = {x}")));
    }
    Ok(Complex64::new(bessel_j0(x), bessel_y0(x)?))
}

/// H1^(1)(x) = J1(x) + i Y1(x).
pub fn hankel1_1(x: f64) -> Result<Complex64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("H1(1) is singular at 0, got x = {x}")));
    }
    Ok(Complex64::new(bessel_j1(x), bessel_y1(x)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e1_branches_meet() {
        let a = e1_unchecked(1.0 - 1e-12);
        let b = e1_unchecked(1.0 + 1e-12);
        assert!((a - b).abs() < 1e-11);
    }

    #[test]
    fn bessel_branches_meet() {
        let lo = BESSEL_SERIES_MAX - 1e-13;
        let hi = BESSEL_SERIES_MAX + 1e-13;
        assert!((bessel_j0(lo) - bessel_j0(hi)).abs() < 1e-10);
        assert!((bessel_j1(lo) - bessel_j1(hi)).abs() < 1e-10);
        assert!((bessel_y0(lo).unwrap() - bessel_y0(hi).unwrap()).abs() < 1e-10);
        assert!((bessel_y1(lo).unwrap() - bessel_y1(hi).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn domain_errors() {
        assert!(exp_integral_e1(0.0).is_err());
        assert!(hankel1_0(-1.0).is_err());
        assert!(upper_gamma_half(-0.5).is_err());
    }
}
