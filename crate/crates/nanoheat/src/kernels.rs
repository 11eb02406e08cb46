//! Free-space kernels: the Laplace fundamental solution G0 = −ln r/(2π) and
//! the smooth remainder D = G^k − G0 of the Helmholtz kernel (i/4)H0(kr).

use crate::geometry::Vec2;
use crate::specfun::{self, EULER_GAMMA};
use num_complex::Complex64;
use std::f64::consts::PI;

const SERIES_TERMS: usize = 40;
const SERIES_MAX_KR: f64 = 12.0;

#[inline]
pub fn laplace_g0(r: f64) -> f64 {
    -r.ln() / (2.0 * PI)
}

/// ∇_x G0(x, y) = −(x − y)/(2π|x − y|²).
#[inline]
pub fn laplace_grad_x(x: Vec2, y: Vec2) -> Vec2 {
    let d = [x[0] - y[0], x[1] - y[1]];
    let s = -1.0 / (2.0 * PI * (d[0] * d[0] + d[1] * d[1]));
    [d[0] * s, d[1] * s]
}

/// ∫ of G0(x0 − y) over a disc of radius ρ centred at x0.
pub fn log_self_integral(rho: f64) -> f64 {
    rho * rho / 4.0 - rho * rho / 2.0 * rho.ln()
}

/// D(r) = (i/4)H0(kr) + ln r/(2π), written as Σ a_m r^{2m} + ln r Σ b_m r^{2m}
/// for kr ≤ 12 and through H0, H1 beyond.
#[derive(Debug, Clone)]
pub struct HelmholtzRemainder {
    pub k: f64,
    a: Vec<Complex64>,
    b: Vec<f64>,
}

impl HelmholtzRemainder {
    pub fn new(k: f64) -> Self {
        assert!(k > 0.0, "wavenumber must be positive");
        let c = ((0.5 * k).ln() + EULER_GAMMA) / (2.0 * PI);
        let lead = Complex64::new(-c, 0.25);
        let h2 = 0.25 * k * k;
        let mut a = Vec::with_capacity(SERIES_TERMS);
        let mut b = Vec::with_capacity(SERIES_TERMS);
        // J0 = Σ j_m q^m, S0 = Σ −H_m j_m q^m with q = (kr/2)².
        let mut j = 1.0;
        let mut harmonic = 0.0;
        let mut pow = 1.0;
        for m in 0..SERIES_TERMS {
            if m > 0 {
                let mf = m as f64;
                j *= -1.0 / (mf * mf);
                harmonic += 1.0 / mf;
                pow *= h2;
            }
            let s = -harmonic * j;
            a.push(lead * (j * pow) - s * pow / (2.0 * PI));
            b.push(if m == 0 { 0.0 } else { -j * pow / (2.0 * PI) });
        }
        Self { k, a, b }
    }

    /// D(0) = i/4 − (ln(k/2) + γ)/(2π).
    pub fn at_zero(&self) -> Complex64 {
        self.a[0]
    }

    /// Returns (D, D', D'') at r > 0 (derivatives in r).
    pub fn radial(&self, r: f64) -> (Complex64, Complex64, Complex64) {
        if self.k * r <= SERIES_MAX_KR {
            let lr = r.ln();
            let r2 = r * r;
            let mut d = Complex64::new(0.0, 0.0);
            let mut d1 = Complex64::new(0.0, 0.0);
            let mut d2 = Complex64::new(0.0, 0.0);
            // r^{2m-2}
            let mut p = 1.0 / (r2 * r2);
            for m in 0..SERIES_TERMS {
                p *= r2;
                let mf = 2.0 * m as f64;
                let am = self.a[m];
                let bm = self.b[m];
                d += (am + bm * lr) * (p * r2);
                if m > 0 {
                    d1 += (am * mf + bm * (mf * lr + 1.0)) * (p * r);
                    d2 += (am * (mf * (mf - 1.0)) + bm * (mf * (mf - 1.0) * lr + 2.0 * mf - 1.0)) * p;
                }
                if (am.norm() + bm.abs()) * p * r2 < 1e-18 && m > 2 {
                    break;
                }
            }
            (d, d1, d2)
        } else {
            let x = self.k * r;
            let h0 = specfun::hankel1_0(x).expect("positive argument");
            let h1 = specfun::hankel1_1(x).expect("positive argument");
            let i4 = Complex64::new(0.0, 0.25);
            let d = i4 * h0 + r.ln() / (2.0 * PI);
            let d1 = -i4 * self.k * h1 + 1.0 / (2.0 * PI * r);
            let d2 = -i4 * self.k * self.k * (h0 - h1 / x) - 1.0 / (2.0 * PI * r * r);
            (d, d1, d2)
        }
    }

    pub fn value(&self, r: f64) -> Complex64 {
        if r == 0.0 {
            return self.at_zero();
        }
        self.radial(r).0
    }

    /// Hessian ∂_{x_i}∂_{x_j} D(|x − y|) at separation d = x − y ≠ 0,
    /// returned as [h00, h01, h11].
    pub fn hessian(&self, d: Vec2) -> [Complex64; 3] {
        let r2 = d[0] * d[0] + d[1] * d[1];
        let r = r2.sqrt();
        let (_, g1, g2) = self.radial(r);
        let t = g1 / r;
        let u = (g2 - t) / r2;
        [u * (d[0] * d[0]) + t, u * (d[0] * d[1]), u * (d[1] * d[1]) + t]
    }

    /// ∫ Hess D over a disc of radius ρ centred at the evaluation point
    /// (leading r² and r² ln r terms), as a multiple of the identity.
    pub fn hessian_self_integral(&self, rho: f64) -> Complex64 {
        let area = PI * rho * rho;
        let (a1, b1) = (self.a[1], self.b[1]);
        (a1 * 2.0 + b1 + 2.0 * b1 * rho.ln()) * area
    }

    /// ∫ D over a disc of radius ρ centred at the evaluation point (through r² ln r).
    pub fn self_integral(&self, rho: f64) -> Complex64 {
        let r4 = rho.powi(4);
        let (a0, a1, b1) = (self.a[0], self.a[1], self.b[1]);
        a0 * (PI * rho * rho) + a1 * (PI * r4 / 2.0) + b1 * (2.0 * PI * (r4 * rho.ln() / 4.0 - r4 / 16.0))
    }
}

/// Full Helmholtz kernel G^k(r) = (i/4) H0(kr).
pub fn helmholtz_g(k: f64, r: f64) -> Complex64 {
    Complex64::new(0.0, 0.25) * specfun::hankel1_0(k * r).expect("positive argument")
}
