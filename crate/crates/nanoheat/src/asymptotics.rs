//! Dominant-term temperature formulas and scaling-law fits.

use crate::error::{Error, Result};
use crate::geometry::{dist, Vec2};
use crate::heatkernels::{kr_diagnostic, time_integral_point};
use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominantHeatInput {
    pub xi: Vec2,
    pub t: f64,
    pub z: Vec2,
    pub alpha_m: f64,
    pub kappa_p: f64,
    pub kappa_m: f64,
    pub omega: f64,
    pub im_eps_p: f64,
    /// ∫_Ω |E|².
    pub energy: f64,
    /// dist(ξ, Ω) ∼ δ^p.
    pub p: f64,
    /// Kernel exponent, 0 < r < ½.
    pub r: f64,
}

impl DominantHeatInput {
    fn validate(&self) -> Result<()> {
        if !(self.t > 0.0) {
            return Err(Error::Domain(format!("t must be positive, got {}", self.t)));
        }
        if self.xi == self.z {
            return Err(Error::Singular("probe point coincides with the particle centre".into()));
        }
        kr_diagnostic(self.r, 1.0)?;
        for (name, v) in [("alpha_m", self.alpha_m), ("kappa_p", self.kappa_p), ("kappa_m", self.kappa_m)] {
            if !(v > 0.0) {
                return Err(Error::Coefficient(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// U_e ≈ (κ_p/κ_m)(1/α_m)(ω Im ε_p/(2π κ_p)) ∫_0^t Φ^e dτ ∫_Ω|E|².
pub fn heat_dominant(input: &DominantHeatInput) -> Result<f64> {
    input.validate()?;
    let ti = time_integral_point(input.alpha_m, dist(input.xi, input.z), input.t)?;
    Ok(input.kappa_p / input.kappa_m / input.alpha_m * (input.omega * input.im_eps_p / (2.0 * PI * input.kappa_p)) * ti * input.energy)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorollaryKind {
    Plasmonic,
    Dielectric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorollaryInput {
    pub omega: f64,
    pub im_eps_p: f64,
    pub rho_c_m: f64,
    /// |E^in(z)|².
    pub e_in_sq: f64,
    /// (∫_Ω e_{n0})².
    pub mean_sq: f64,
    /// |ξ − z|.
    pub distance: f64,
    pub h: f64,
    pub delta: f64,
}

/// Leading term only:
/// (ω Im ε_p/(2π ρ_m c_m)) |E^in(z)|² (∫e_{n0})² log|ξ−z|^{-1} · δ^{-2h} (plasmonic)
/// or · |log δ|^{2h} (dielectric).
pub fn heat_corollary(kind: CorollaryKind, c: &CorollaryInput) -> Result<f64> {
    if !(c.distance > 0.0 && c.distance < 1.0) {
        return Err(Error::Domain(format!("|xi - z| must lie in (0, 1), got {}", c.distance)));
    }
    if !(c.delta > 0.0 && c.delta < 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1), got {}", c.delta)));
    }
    let enhancement = match kind {
        CorollaryKind::Plasmonic => c.delta.powf(-2.0 * c.h),
        CorollaryKind::Dielectric => c.delta.ln().abs().powf(2.0 * c.h),
    };
    Ok(c.omega * c.im_eps_p / (2.0 * PI * c.rho_c_m) * c.e_in_sq * c.mean_sq * (1.0 / c.distance).ln() * enhancement)
}

/// Ratio of the leading terms at dist δ^{p1} and δ^{p2}: log δ^{p1}/log δ^{p2}.
pub fn distance_effect(p1: f64, p2: f64, delta: f64) -> Result<f64> {
    if !(p1 > 0.0 && p1 <= 1.0 && p2 > 0.0 && p2 <= 1.0) {
        return Err(Error::Domain(format!("distance exponents must lie in (0, 1], got {p1}, {p2}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok((p1 * delta.ln()) / (p2 * delta.ln()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitModel {
    /// v = C δ^a.
    PowerLaw,
    /// v = C δ^a |log δ|^b.
    PowerLogLaw,
    /// v = C δ^a |log δ|^b with b fixed.
    PowerLogLawFixed { log_exponent: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub deltas: Vec<f64>,
    pub values: Vec<f64>,
    pub model: FitModel,
    pub exponent: f64,
    pub log_exponent: f64,
    pub log_prefactor: f64,
    /// RMS residual of log v.
    pub residual: f64,
}

/// Least squares of log v against log δ (and log|log δ|).
pub fn fit_scaling(deltas: &[f64], values: &[f64], model: FitModel) -> Result<ScalingFit> {
    if deltas.len() != values.len() {
        return Err(Error::Fit(format!("{} deltas for {} values", deltas.len(), values.len())));
    }
    if deltas.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 sweep points, got {}", deltas.len())));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Fit("deltas must be strictly decreasing".into()));
    }
    if deltas.iter().any(|d| !(*d > 0.0 && *d < 1.0)) || values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Fit("deltas must lie in (0, 1) and values must be positive".into()));
    }
    let m = deltas.len();
    let fixed = match model {
        FitModel::PowerLogLawFixed { log_exponent } => log_exponent,
        _ => 0.0,
    };
    let cols = if model == FitModel::PowerLogLaw { 3 } else { 2 };
    let ll = |d: f64| d.ln().abs().ln();
    let a = Mat::<f64>::from_fn(m, cols, |i, j| match j {
        0 => 1.0,
        1 => deltas[i].ln(),
        _ => ll(deltas[i]),
    });
    let mut rhs = Mat::<f64>::from_fn(m, 1, |i, _| values[i].ln() - fixed * ll(deltas[i]));
    a.qr().solve_lstsq_in_place(rhs.as_mut());
    let coef: Vec<f64> = (0..cols).map(|j| rhs[(j, 0)]).collect();
    let log_exponent = if cols == 3 { coef[2] } else { fixed };
    let residual = ((0..m)
        .map(|i| {
            let pred = coef[0] + coef[1] * deltas[i].ln() + log_exponent * ll(deltas[i]);
            (values[i].ln() - pred).powi(2)
        })
        .sum::<f64>()
        / m as f64)
        .sqrt();
    Ok(ScalingFit {
        deltas: deltas.to_vec(),
        values: values.to_vec(),
        model,
        exponent: coef[1],
        log_exponent,
        log_prefactor: coef[0],
        residual,
    })
}

/// Probe point at |ξ − z| = δ^p along `direction`.
pub fn probe_point(z: Vec2, delta: f64, p: f64, direction: Vec2) -> Vec2 {
    let d = delta.powf(p);
    [z[0] + d * direction[0], z[1] + d * direction[1]]
}

/// Admissibility of the distance exponent: (1 + 2p(1−r))/2 < h < 1.
pub fn check_exponents(p: f64, r: f64, h: f64) -> Result<()> {
    let lower = (1.0 + 2.0 * p * (1.0 - r)) / 2.0;
    if lower < h && h < 1.0 {
        Ok(())
    } else {
        Err(Error::Assumption(format!("exponents violate (1 + 2p(1-r))/2 = {lower} < h = {h} < 1 (p = {p}, r = {r})")))
    }
}
