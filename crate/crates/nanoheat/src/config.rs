//! Flat `key = value` experiment configuration with dotted section keys.
//!
//! Lines starting with `#` are comments; lists are comma separated. Every
//! key has a default, so an empty file is a valid plasmonic configuration.

use crate::asymptotics::check_exponents;
use crate::error::{Error, Result};
use crate::geometry::{Shape, Vec2};
use crate::heatref::HeatCoefficients;
use crate::material::{HostMedium, LorentzMaterial, RegimeChoice, RegimeKind};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    /// Target particle cell count (rounded to whole polar rings).
    pub cells: usize,
    pub boundary_nodes: usize,
    /// Highest degree of the harmonic-gradient basis (plasmonic eigen-solve).
    pub basis_degree: usize,
    /// FD core spacing is δ / grid_cells_per_delta.
    pub grid_cells_per_delta: f64,
    pub grid_stretch: f64,
    /// FD half-width is grid_l_factor · max(δ, |ξ − z|).
    pub grid_l_factor: f64,
    pub dt: f64,
    pub fd: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSpec {
    /// |ξ − z| = δ^p.
    pub p: f64,
    pub r: f64,
    pub t: f64,
    pub direction: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub regime: RegimeChoice,
    pub material: LorentzMaterial,
    pub medium: HostMedium,
    pub kappa_bar_p: f64,
    pub rho_c_p: f64,
    pub shape: Shape,
    pub center: Vec2,
    pub deltas: Vec<f64>,
    pub incident_direction: Vec2,
    pub discretization: Discretization,
    pub probe: ProbeSpec,
    pub t0: f64,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            regime: RegimeChoice::plasmonic(0.6),
            material: LorentzMaterial { omega_p: 2.0, omega_0: 1.0, gamma_damp: 0.0, eps_inf: 1.0 },
            medium: HostMedium { eps_m: 1.0, mu_m: 0.1, rho_m: 1.0, c_m: 1.0, kappa_m: 1.0, alpha_m: 1.0 },
            kappa_bar_p: 4.0,
            rho_c_p: 1.0,
            shape: Shape::Disc,
            center: [0.0, 0.0],
            deltas: vec![0.2, 0.1, 0.05],
            incident_direction: [1.0, 0.0],
            discretization: Discretization {
                cells: 784,
                boundary_nodes: 256,
                basis_degree: 4,
                grid_cells_per_delta: 8.0,
                grid_stretch: 1.04,
                grid_l_factor: 20.0,
                dt: 0.00125,
                fd: true,
            },
            probe: ProbeSpec { p: 0.1, r: 0.25, t: 0.5, direction: [1.0, 0.0] },
            t0: 1.0,
            output: PathBuf::from("out"),
        }
    }
}

/// Material defaults of the dielectric regime: ε_∞ ω_p² = ½ c_freq.
pub fn dielectric_material() -> LorentzMaterial {
    LorentzMaterial { omega_p: 0.5f64.sqrt(), omega_0: 1.0, gamma_damp: 0.0, eps_inf: 1.0 }
}

fn num(key: &str, v: &str) -> Result<f64> {
    v.trim().parse::<f64>().map_err(|_| Error::Config(format!("{key}: expected a number, got {v:?}")))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|x| num(key, x)).collect()
}

fn pair(key: &str, v: &str) -> Result<Vec2> {
    match list(key, v)?.as_slice() {
        [a, b] => Ok([*a, *b]),
        _ => Err(Error::Config(format!("{key}: expected two comma-separated numbers"))),
    }
}

fn count(key: &str, v: &str) -> Result<usize> {
    v.trim().parse::<usize>().map_err(|_| Error::Config(format!("{key}: expected a non-negative integer, got {v:?}")))
}

fn flag(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got {v:?}"))),
    }
}

/// Parses `key = value` lines into an ordered map; duplicate keys are errors.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
        let k = k.trim().to_string();
        if out.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key {k}", n + 1)));
        }
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let pairs = parse_pairs(text)?;
        let mut c = Self::default();
        let kind = match pairs.get("regime") {
            Some(v) => RegimeKind::parse(v.trim())?,
            None => RegimeKind::Plasmonic,
        };
        if kind == RegimeKind::Dielectric {
            c.regime = RegimeChoice::dielectric(0.6, 0.3);
            c.material = dielectric_material();
        }
        let (mut ga, mut gb) = (2.0, 1.0);
        let mut shape_name = "disc".to_string();
        let (mut h_x, mut l_abs) = (None, None);
        let mut t_end = None;
        for (k, v) in &pairs {
            let k = k.as_str();
            match k {
                "regime" => {}
                "regime.h" | "h" => c.regime.h = num(k, v)?,
                "regime.s" | "s" => c.regime.s = num(k, v)?,
                "regime.n0" => c.regime.n0 = Some(count(k, v)?),
                "regime.c_freq" => c.regime.c_freq = num(k, v)?,
                "regime.c_damp" => c.regime.c_damp = num(k, v)?,
                "material.omega_p" => c.material.omega_p = num(k, v)?,
                "material.omega_0" => c.material.omega_0 = num(k, v)?,
                "material.gamma" => c.material.gamma_damp = num(k, v)?,
                "material.eps_inf" => c.material.eps_inf = num(k, v)?,
                "medium.eps_m" => c.medium.eps_m = num(k, v)?,
                "medium.mu_m" => c.medium.mu_m = num(k, v)?,
                "medium.rho_m" => c.medium.rho_m = num(k, v)?,
                "medium.c_m" => c.medium.c_m = num(k, v)?,
                "medium.kappa_m" => c.medium.kappa_m = num(k, v)?,
                "heat.kappa_bar_p" => c.kappa_bar_p = num(k, v)?,
                "heat.rho_c_p" => c.rho_c_p = num(k, v)?,
                "geometry.shape" => shape_name = v.trim().to_string(),
                "geometry.a" => ga = num(k, v)?,
                "geometry.b" => gb = num(k, v)?,
                "geometry.center" => c.center = pair(k, v)?,
                "geometry.deltas" => c.deltas = list(k, v)?,
                "delta" => c.deltas = vec![num(k, v)?],
                "incident.direction" => c.incident_direction = pair(k, v)?,
                "discretization.cells" => c.discretization.cells = count(k, v)?,
                "discretization.boundary_nodes" => c.discretization.boundary_nodes = count(k, v)?,
                "discretization.basis_degree" => c.discretization.basis_degree = count(k, v)?,
                "grid.cells_per_delta" => c.discretization.grid_cells_per_delta = num(k, v)?,
                "grid.stretch" => c.discretization.grid_stretch = num(k, v)?,
                "grid.l_factor" => c.discretization.grid_l_factor = num(k, v)?,
                "grid.h_x" => h_x = Some(num(k, v)?),
                "grid.L" => l_abs = Some(num(k, v)?),
                "time.dt" => c.discretization.dt = num(k, v)?,
                "time.T0" => c.t0 = num(k, v)?,
                "time.T" => t_end = Some(num(k, v)?),
                "fd.enabled" => c.discretization.fd = flag(k, v)?,
                "probe.p" => c.probe.p = num(k, v)?,
                "probe.r" => c.probe.r = num(k, v)?,
                "probe.t" | "probes" => c.probe.t = num(k, v)?,
                "probe.direction" => c.probe.direction = pair(k, v)?,
                "output.dir" => c.output = PathBuf::from(v.trim()),
                _ => return Err(Error::Config(format!("unknown key {k}"))),
            }
        }
        c.regime.kind = kind;
        c.shape = match shape_name.as_str() {
            "disc" => Shape::Disc,
            "ellipse" => Shape::Ellipse { a: ga, b: gb },
            other => return Err(Error::Config(format!("unknown shape {other:?}"))),
        };
        if let Some(t) = t_end {
            c.probe.t = t;
        }
        if let (Some(h), Some(&d)) = (h_x, c.deltas.first()) {
            c.discretization.grid_cells_per_delta = d / h;
        }
        if let (Some(l), Some(&d)) = (l_abs, c.deltas.first()) {
            c.discretization.grid_l_factor = l / d.powf(c.probe.p).max(d);
        }
        c.medium = HostMedium::new(c.medium.eps_m, c.medium.mu_m, c.medium.rho_m, c.medium.c_m, c.medium.kappa_m)?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Checks everything except the distance-exponent constraint.
    pub fn validate_structure(&self) -> Result<()> {
        self.regime.validate()?;
        self.material.validate()?;
        self.medium.validate()?;
        if let Shape::Ellipse { a, b } = self.shape {
            if !(a > 0.0 && b > 0.0) {
                return Err(Error::Config("ellipse semi-axes must be positive".into()));
            }
        }
        if self.deltas.iter().any(|d| !(*d > 0.0 && *d < 1.0)) {
            return Err(Error::Config("every delta must lie in (0, 1)".into()));
        }
        if self.deltas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("deltas must be strictly decreasing".into()));
        }
        let n = (self.incident_direction[0].powi(2) + self.incident_direction[1].powi(2)).sqrt();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::Config("incident.direction must be a unit vector".into()));
        }
        let n = (self.probe.direction[0].powi(2) + self.probe.direction[1].powi(2)).sqrt();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::Config("probe.direction must be a unit vector".into()));
        }
        let d = &self.discretization;
        if d.cells < 4 || d.boundary_nodes < 8 || d.basis_degree == 0 {
            return Err(Error::Config("discretization too coarse".into()));
        }
        if !(d.grid_cells_per_delta >= 2.0 && d.grid_stretch >= 1.0 && d.grid_l_factor >= 10.0 && d.dt > 0.0) {
            return Err(Error::Config("grid: need cells_per_delta >= 2, stretch >= 1, l_factor >= 10, dt > 0".into()));
        }
        if !(self.probe.p > 0.0 && self.probe.p <= 1.0 && self.probe.t > 0.0 && self.t0 > 0.0) {
            return Err(Error::Config("probe.p must lie in (0, 1] and times must be positive".into()));
        }
        if self.probe.t > self.t0 {
            return Err(Error::Config("probe time must not exceed the source window T0".into()));
        }
        for &delta in &self.deltas {
            if delta.powf(self.probe.p) <= delta * self.shape.axes().0.max(self.shape.axes().1) {
                return Err(Error::Config(format!("probe at delta^p lies inside the particle for delta = {delta}")));
            }
            self.heat(delta)?.check_admissible()?;
        }
        Ok(())
    }

    /// Full validation, including (1 + 2p(1−r))/2 < h < 1.
    pub fn validate(&self) -> Result<()> {
        self.validate_structure()?;
        check_exponents(self.probe.p, self.probe.r, self.regime.h)
    }

    pub fn heat(&self, delta: f64) -> Result<HeatCoefficients> {
        HeatCoefficients::scaled(self.kappa_bar_p, self.rho_c_p, self.medium.rho_c(), self.medium.kappa_m, delta)
    }

    /// Canonical text form; `parse(to_text())` reproduces the config.
    pub fn to_text(&self) -> String {
        let f = |v: f64| format!("{v:.17e}");
        let l = |v: &[f64]| v.iter().map(|x| f(*x)).collect::<Vec<_>>().join(", ");
        let mut s = String::new();
        let mut put = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        put("regime", self.regime.kind.name().into());
        put("regime.h", f(self.regime.h));
        put("regime.s", f(self.regime.s));
        if let Some(n0) = self.regime.n0 {
            put("regime.n0", n0.to_string());
        }
        put("regime.c_freq", f(self.regime.c_freq));
        put("regime.c_damp", f(self.regime.c_damp));
        put("material.omega_p", f(self.material.omega_p));
        put("material.omega_0", f(self.material.omega_0));
        put("material.gamma", f(self.material.gamma_damp));
        put("material.eps_inf", f(self.material.eps_inf));
        put("medium.eps_m", f(self.medium.eps_m));
        put("medium.mu_m", f(self.medium.mu_m));
        put("medium.rho_m", f(self.medium.rho_m));
        put("medium.c_m", f(self.medium.c_m));
        put("medium.kappa_m", f(self.medium.kappa_m));
        put("heat.kappa_bar_p", f(self.kappa_bar_p));
        put("heat.rho_c_p", f(self.rho_c_p));
        match self.shape {
            Shape::Disc => put("geometry.shape", "disc".into()),
            Shape::Ellipse { a, b } => {
                put("geometry.shape", "ellipse".into());
                put("geometry.a", f(a));
                put("geometry.b", f(b));
            }
        }
        put("geometry.center", l(&self.center));
        put("geometry.deltas", l(&self.deltas));
        put("incident.direction", l(&self.incident_direction));
        let d = &self.discretization;
        put("discretization.cells", d.cells.to_string());
        put("discretization.boundary_nodes", d.boundary_nodes.to_string());
        put("discretization.basis_degree", d.basis_degree.to_string());
        put("grid.cells_per_delta", f(d.grid_cells_per_delta));
        put("grid.stretch", f(d.grid_stretch));
        put("grid.l_factor", f(d.grid_l_factor));
        put("time.dt", f(d.dt));
        put("time.T0", f(self.t0));
        put("fd.enabled", d.fd.to_string());
        put("probe.p", f(self.probe.p));
        put("probe.r", f(self.probe.r));
        put("probe.t", f(self.probe.t));
        put("probe.direction", l(&self.probe.direction));
        put("output.dir", self.output.display().to_string());
        s
    }
}
