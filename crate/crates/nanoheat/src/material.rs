//! Lorentz permittivity, host medium, contrasts and the two resonance
//! frequency-selection rules.

use crate::error::{Error, Result};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzMaterial {
    pub omega_p: f64,
    pub omega_0: f64,
    pub gamma_damp: f64,
    pub eps_inf: f64,
}

impl LorentzMaterial {
    pub fn new(omega_p: f64, omega_0: f64, gamma_damp: f64, eps_inf: f64) -> Result<Self> {
        let m = Self { omega_p, omega_0, gamma_damp, eps_inf };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.omega_p > 0.0 && self.omega_0 > 0.0 && self.gamma_damp >= 0.0 && self.eps_inf > 0.0;
        if !ok {
            return Err(Error::Config(format!("invalid Lorentz parameters {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HostMedium {
    pub eps_m: f64,
    pub mu_m: f64,
    pub rho_m: f64,
    pub c_m: f64,
    pub kappa_m: f64,
    pub alpha_m: f64,
}

impl HostMedium {
    /// Builds the medium with alpha_m = rho_m c_m / kappa_m.
    pub fn new(eps_m: f64, mu_m: f64, rho_m: f64, c_m: f64, kappa_m: f64) -> Result<Self> {
        let m = Self { eps_m, mu_m, rho_m, c_m, kappa_m, alpha_m: rho_m * c_m / kappa_m };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.eps_m, self.mu_m, self.rho_m, self.c_m, self.kappa_m, self.alpha_m];
        if all.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Config(format!("host medium constants must be positive: {self:?}")));
        }
        if self.alpha_m != self.rho_m * self.c_m / self.kappa_m {
            return Err(Error::Config("alpha_m must equal rho_m c_m / kappa_m".into()));
        }
        Ok(())
    }

    pub fn rho_c(&self) -> f64 {
        self.rho_m * self.c_m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeKind {
    Plasmonic,
    Dielectric,
}

impl RegimeKind {
    pub fn name(self) -> &'static str {
        match self {
            RegimeKind::Plasmonic => "plasmonic",
            RegimeKind::Dielectric => "dielectric",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "plasmonic" => Ok(RegimeKind::Plasmonic),
            "dielectric" => Ok(RegimeKind::Dielectric),
            _ => Err(Error::Config(format!("unknown regime {s:?}"))),
        }
    }
}

/// Resonance exponents and constants. `n0 = None` selects the eigenpair
/// with the largest mean automatically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeChoice {
    pub kind: RegimeKind,
    pub h: f64,
    pub s: f64,
    pub n0: Option<usize>,
    pub c_freq: f64,
    pub c_damp: f64,
}

impl RegimeChoice {
    pub fn plasmonic(h: f64) -> Self {
        Self { kind: RegimeKind::Plasmonic, h, s: 0.0, n0: None, c_freq: 1.0, c_damp: 1.0 }
    }

    pub fn dielectric(h: f64, s: f64) -> Self {
        Self { kind: RegimeKind::Dielectric, h, s, n0: None, c_freq: 1.0, c_damp: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h < 1.0) {
            return Err(Error::Config(format!("h must lie in (0,1), got {}", self.h)));
        }
        if self.kind == RegimeKind::Dielectric && !(self.s >= 0.0) {
            return Err(Error::Config(format!("s must be >= 0, got {}", self.s)));
        }
        if !(self.c_freq >= 0.0 && self.c_damp >= 0.0) {
            return Err(Error::Config("c_freq and c_damp must be >= 0".into()));
        }
        Ok(())
    }
}

/// ε_p = ε_∞ [1 + ω_p² / (ω_0² − ω² − iγω)].
pub fn permittivity(mat: &LorentzMaterial, omega: f64, gamma_damp: f64) -> Result<Complex64> {
    if !(omega >= 0.0) {
        return Err(Error::Domain(format!("omega must be >= 0, got {omega}")));
    }
    let den = Complex64::new(mat.omega_0 * mat.omega_0 - omega * omega, -gamma_damp * omega);
    if den.re == 0.0 && den.im == 0.0 {
        return Err(Error::Singular("Lorentz denominator vanishes (gamma = 0, omega = omega_0)".into()));
    }
    Ok(mat.eps_inf * (1.0 + mat.omega_p * mat.omega_p / den))
}

/// α = 1/ε_p − 1/ε_m.
pub fn tm_contrast(eps_p: Complex64, eps_m: f64) -> Result<Complex64> {
    if eps_p.norm() == 0.0 {
        return Err(Error::Singular("eps_p = 0 in the TM contrast".into()));
    }
    Ok(1.0 / eps_p - 1.0 / eps_m)
}

/// τ_p = ε_p − ε_m.
pub fn te_contrast(eps_p: Complex64, eps_m: f64) -> Result<Complex64> {
    if eps_p.norm() == 0.0 {
        return Err(Error::Singular("eps_p = 0".into()));
    }
    Ok(eps_p - eps_m)
}

/// The contrast normalisation ε_p/ε_∞ − 1 that appears in the frequency
/// derivation; reported alongside τ_p, never used by the solvers.
pub fn te_contrast_normalized(eps_p: Complex64, eps_inf: f64) -> Complex64 {
    eps_p / eps_inf - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequency {
    pub omega: f64,
    pub gamma_damp: f64,
}

/// Plasmonic rule: ω² = ω_0² + ω_p²(ε_m+λ)/(λ(1−ε_m/ε_∞)+ε_m) + c_freq δ^h,
/// γω = c_damp δ^h.
pub fn select_plasmonic_frequency(
    mat: &LorentzMaterial,
    medium: &HostMedium,
    lambda_n0: f64,
    delta: f64,
    choice: &RegimeChoice,
) -> Result<Frequency> {
    if !(lambda_n0 > 0.0 && lambda_n0 < 1.0) {
        return Err(Error::Domain(format!("lambda_n0 must lie in (0,1), got {lambda_n0}")));
    }
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta must be > 0, got {delta}")));
    }
    let eps_m = medium.eps_m;
    let den = lambda_n0 * (1.0 - eps_m / mat.eps_inf) + eps_m;
    if den == 0.0 {
        return Err(Error::Singular("plasmonic frequency denominator vanishes".into()));
    }
    let dh = delta.powf(choice.h);
    let w2 = mat.omega_0 * mat.omega_0 + mat.omega_p * mat.omega_p * (eps_m + lambda_n0) / den + choice.c_freq * dh;
    if !(w2 > 0.0) {
        return Err(Error::Regime(format!("selected omega^2 = {w2} is not positive")));
    }
    let omega = w2.sqrt();
    Ok(Frequency { omega, gamma_damp: choice.c_damp * dh / omega })
}

/// Undamped plasmonic resonance written as ω² = ω_0² − ω_p² β^{-1}.
pub fn plasmonic_resonance_via_beta(mat: &LorentzMaterial, medium: &HostMedium, lambda_n0: f64) -> f64 {
    mat.omega_0 * mat.omega_0 - mat.omega_p * mat.omega_p / plasmonic_beta(mat, medium, lambda_n0)
}

/// β = −1 + λ/ε_∞ − (λ²/ε_∞)/(ε_m + λ), i.e. ε_p/ε_∞ − 1 at exact resonance.
pub fn plasmonic_beta(mat: &LorentzMaterial, medium: &HostMedium, lambda_n0: f64) -> f64 {
    let l = lambda_n0;
    -1.0 + l / mat.eps_inf - l * l / mat.eps_inf / (medium.eps_m + l)
}

/// Largest admissible ratio γω / (ω_0² − ω²) in the dielectric rule.
pub const DIELECTRIC_DAMPING_RATIO_MAX: f64 = 0.5;

/// Dielectric rule with λ̄ the log-potential eigenvalue divided by δ²|log δ|:
/// ω_0² − ω² = c_freq δ²|log δ| λ̄ μ_m ω_0², γω = c_damp δ²|log δ|^{1−h−s}(λ̄ μ_m ω_0²)².
pub fn select_dielectric_frequency(
    mat: &LorentzMaterial,
    medium: &HostMedium,
    lambda_bar_n0: f64,
    delta: f64,
    choice: &RegimeChoice,
) -> Result<Frequency> {
    if !(lambda_bar_n0 > 0.0) {
        return Err(Error::Domain(format!("lambda_bar_n0 must be > 0, got {lambda_bar_n0}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0,1), got {delta}")));
    }
    let w0sq = mat.omega_0 * mat.omega_0;
    let l = delta.ln().abs();
    let q = lambda_bar_n0 * medium.mu_m * w0sq;
    let gap = choice.c_freq * delta * delta * l * q;
    let w2 = w0sq - gap;
    if !(w2 > 0.0) {
        return Err(Error::Regime(format!("selected omega^2 = {w2} is not positive")));
    }
    let gw = choice.c_damp * delta * delta * l.powf(1.0 - choice.h - choice.s) * q * q;
    if !(gap > 0.0) || gw >= DIELECTRIC_DAMPING_RATIO_MAX * gap {
        return Err(Error::Assumption(format!(
            "damping gamma*omega = {gw:e} is not small against omega_0^2 - omega^2 = {gap:e}"
        )));
    }
    let omega = w2.sqrt();
    Ok(Frequency { omega, gamma_damp: gw / omega })
}

/// |1 − αλ| for the TM contrast at the given frequency.
pub fn plasmonic_diagnostic(mat: &LorentzMaterial, medium: &HostMedium, f: &Frequency, lambda_n0: f64) -> Result<f64> {
    let eps = permittivity(mat, f.omega, f.gamma_damp)?;
    Ok((1.0 - tm_contrast(eps, medium.eps_m)? * lambda_n0).norm())
}

/// |1 − ω² μ_m ε_p λ| with λ the (unnormalised) log-potential eigenvalue.
pub fn dielectric_diagnostic(mat: &LorentzMaterial, medium: &HostMedium, f: &Frequency, lambda_n0: f64) -> Result<f64> {
    let eps = permittivity(mat, f.omega, f.gamma_damp)?;
    Ok((1.0 - f.omega * f.omega * medium.mu_m * eps * lambda_n0).norm())
}
