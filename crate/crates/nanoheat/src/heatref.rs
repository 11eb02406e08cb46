//! Finite-volume reference solver for the transient heat transmission
//! problem ρc ∂_tU = ∇·(κ∇U) + q χ_Ω χ_(0,T0) on a truncated square with
//! homogeneous Dirichlet data and zero initial temperature.
//!
//! Backward Euler in time, five-point fluxes with harmonic-mean face
//! conductances on a tensor grid that is uniform over the particle and
//! geometrically stretched outside. Each step is solved by Jacobi-PCG.

use crate::error::{Error, Result};
use crate::geometry::{ParticleMesh, Shape, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatCoefficients {
    pub rho_c_p: f64,
    pub rho_c_m: f64,
    /// κ_p = κ̄_p δ^{-2}.
    pub kappa_p: f64,
    pub kappa_m: f64,
    pub delta: f64,
}

impl HeatCoefficients {
    pub fn new(rho_c_p: f64, rho_c_m: f64, kappa_p: f64, kappa_m: f64, delta: f64) -> Result<Self> {
        for (name, v) in [("rho_c_p", rho_c_p), ("rho_c_m", rho_c_m), ("kappa_p", kappa_p), ("kappa_m", kappa_m), ("delta", delta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Coefficient(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { rho_c_p, rho_c_m, kappa_p, kappa_m, delta })
    }

    /// Particle conductivity given through its scaled value κ̄_p.
    pub fn scaled(kappa_bar_p: f64, rho_c_p: f64, rho_c_m: f64, kappa_m: f64, delta: f64) -> Result<Self> {
        Self::new(rho_c_p, rho_c_m, kappa_bar_p / (delta * delta), kappa_m, delta)
    }

    pub fn kappa_bar_p(&self) -> f64 {
        self.kappa_p * self.delta * self.delta
    }

    pub fn alpha_p(&self) -> f64 {
        self.rho_c_p / self.kappa_p
    }

    pub fn alpha_m(&self) -> f64 {
        self.rho_c_m / self.kappa_m
    }

    /// κ_m < √(κ̄_p ρ_p c_p), required by the dominant-term analysis.
    pub fn check_admissible(&self) -> Result<()> {
        let bound = (self.kappa_bar_p() * self.rho_c_p).sqrt();
        if self.kappa_m < bound {
            Ok(())
        } else {
            Err(Error::Assumption(format!("kappa_m = {} must be below sqrt(kappa_bar_p * rho_c_p) = {bound}", self.kappa_m)))
        }
    }
}

/// Volumetric power density on the particle cells, switched on for t ∈ (0, T0).
#[derive(Debug, Clone, PartialEq)]
pub struct SourceField {
    pub shape: Shape,
    pub delta: f64,
    pub center: Vec2,
    pub centroids: Vec<Vec2>,
    pub areas: Vec<f64>,
    pub values: Vec<f64>,
    pub t0: f64,
}

impl SourceField {
    pub fn from_mesh(mesh: &ParticleMesh, values: Vec<f64>, t0: f64) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(Error::Shape(format!("{} source values for {} cells", values.len(), mesh.len())));
        }
        if !(t0 > 0.0) {
            return Err(Error::Domain(format!("source window T0 must be positive, got {t0}")));
        }
        Ok(Self {
            shape: mesh.shape,
            delta: mesh.delta,
            center: mesh.center_z,
            centroids: mesh.cells.iter().map(|c| c.centroid).collect(),
            areas: mesh.areas(),
            values,
            t0,
        })
    }

    pub fn uniform(mesh: &ParticleMesh, value: f64, t0: f64) -> Result<Self> {
        Self::from_mesh(mesh, vec![value; mesh.len()], t0)
    }

    pub fn contains(&self, x: Vec2) -> bool {
        let (a, b) = self.shape.axes();
        let p = [(x[0] - self.center[0]) / self.delta, (x[1] - self.center[1]) / self.delta];
        (p[0] / a).powi(2) + (p[1] / b).powi(2) < 1.0
    }

    /// Value of the nearest mesh cell; zero outside Ω.
    pub fn value_at(&self, x: Vec2) -> f64 {
        if !self.contains(x) {
            return 0.0;
        }
        let mut best = (f64::INFINITY, 0.0);
        for (c, v) in self.centroids.iter().zip(&self.values) {
            let d = (c[0] - x[0]).powi(2) + (c[1] - x[1]).powi(2);
            if d < best.0 {
                best = (d, *v);
            }
        }
        best.1
    }

    pub fn total_power(&self) -> f64 {
        self.values.iter().zip(&self.areas).map(|(v, a)| v * a).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * s).collect(), ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub h_core: f64,
    /// Half-width of the uniform block around z.
    pub core_half_width: f64,
    /// Half-width L of the truncated domain.
    pub half_width: f64,
    /// Width ratio of neighbouring cells outside the core.
    pub stretch: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Each base cell is split into 2^refine cells per direction.
    pub refine: u32,
}

impl GridSpec {
    /// h = δ/8 on [−1.5δ, 1.5δ], stretch 1.08, L = 20·max(δ, |ξ − z|).
    pub fn for_probes(delta: f64, center: Vec2, probes: &[Vec2], dt: f64, t_end: f64) -> Self {
        let far = probes.iter().map(|p| crate::geometry::dist(*p, center)).fold(delta, f64::max);
        Self {
            h_core: delta / 8.0,
            core_half_width: 1.5 * delta,
            half_width: 20.0 * far,
            stretch: 1.08,
            dt,
            t_end,
            refine: 0,
        }
    }

    pub fn refined(self, refine: u32) -> Self {
        Self { refine, ..self }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.h_core > 0.0
            && self.core_half_width > 0.0
            && self.half_width > self.core_half_width
            && self.stretch >= 1.0
            && self.dt > 0.0
            && self.t_end > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid grid spec {self:?}")))
        }
    }

    /// Face coordinates of one axis, relative to the particle centre.
    pub fn faces(&self) -> Vec<f64> {
        let m = (self.core_half_width / self.h_core).ceil() as usize;
        let mut half = vec![0.0];
        for k in 1..=m {
            half.push(k as f64 * self.h_core);
        }
        let mut w = self.h_core;
        while *half.last().unwrap() < self.half_width {
            w *= self.stretch;
            half.push(half.last().unwrap() + w);
        }
        let mut faces: Vec<f64> = half.iter().rev().map(|x| -x).collect();
        faces.extend_from_slice(&half[1..]);
        let parts = 1usize << self.refine;
        let mut out = Vec::with_capacity((faces.len() - 1) * parts + 1);
        for pair in faces.windows(2) {
            for p in 0..parts {
                out.push(pair[0] + (pair[1] - pair[0]) * p as f64 / parts as f64);
            }
        }
        out.push(*faces.last().unwrap());
        out
    }
}

/// Grid, time levels and the stored temperature at every level.
#[derive(Debug, Clone)]
pub struct HeatRun {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub widths_x: Vec<f64>,
    pub widths_y: Vec<f64>,
    pub dt: f64,
    pub half_width: f64,
    /// Snapshot n is the temperature at t = nΔt; snapshot 0 is zero.
    pub snapshots: Vec<Vec<f64>>,
    pub cg_iterations: usize,
}

impl HeatRun {
    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.snapshots.len() - 1)
    }

    pub fn value(&self, n: usize, i: usize, j: usize) -> f64 {
        self.snapshots[n][j * self.xs.len() + i]
    }

    /// Σ ρc U V at level n.
    pub fn heat_content(&self, n: usize, rho_c: &[f64]) -> f64 {
        let nx = self.xs.len();
        self.snapshots[n]
            .iter()
            .enumerate()
            .map(|(k, u)| rho_c[k] * u * self.widths_x[k % nx] * self.widths_y[k / nx])
            .sum()
    }
}

fn bracket(c: &[f64], x: f64) -> Option<(usize, f64)> {
    if !(x >= c[0] && x <= c[c.len() - 1]) {
        return None;
    }
    let i = c.partition_point(|v| *v <= x).saturating_sub(1).min(c.len() - 2);
    Some((i, (x - c[i]) / (c[i + 1] - c[i])))
}

/// Bilinear in space between cell centres, linear in time.
pub fn probe(run: &HeatRun, xi: Vec2, t: f64) -> Result<f64> {
    let (i, wx) = bracket(&run.xs, xi[0]).ok_or_else(|| Error::Probe(format!("x = {} outside the grid", xi[0])))?;
    let (j, wy) = bracket(&run.ys, xi[1]).ok_or_else(|| Error::Probe(format!("y = {} outside the grid", xi[1])))?;
    if !(t >= 0.0 && t <= run.t_end() * (1.0 + 1e-12)) {
        return Err(Error::Probe(format!("t = {t} outside [0, {}]", run.t_end())));
    }
    let s = (t / run.dt).min((run.snapshots.len() - 1) as f64);
    let n = (s.floor() as usize).min(run.snapshots.len() - 2);
    let wt = s - n as f64;
    let at = |m: usize| {
        (1.0 - wx) * (1.0 - wy) * run.value(m, i, j)
            + wx * (1.0 - wy) * run.value(m, i + 1, j)
            + (1.0 - wx) * wy * run.value(m, i, j + 1)
            + wx * wy * run.value(m, i + 1, j + 1)
    };
    Ok((1.0 - wt) * at(n) + wt * at(n + 1))
}

struct System {
    nx: usize,
    ny: usize,
    /// Conductance to the east (i+1) and north (j+1) neighbour.
    east: Vec<f64>,
    north: Vec<f64>,
    /// Conductance to the Dirichlet boundary.
    boundary: Vec<f64>,
    capacity: Vec<f64>,
}

impl System {
    fn apply(&self, dt: f64, x: &[f64], y: &mut [f64]) {
        let nx = self.nx;
        for k in 0..x.len() {
            y[k] = (self.capacity[k] / dt + self.boundary[k]) * x[k];
        }
        for j in 0..self.ny {
            for i in 0..nx {
                let k = j * nx + i;
                if i + 1 < nx {
                    let t = self.east[k];
                    let d = t * (x[k] - x[k + 1]);
                    y[k] += d;
                    y[k + 1] -= d;
                }
                if j + 1 < self.ny {
                    let t = self.north[k];
                    let d = t * (x[k] - x[k + nx]);
                    y[k] += d;
                    y[k + nx] -= d;
                }
            }
        }
    }

    fn diagonal(&self, dt: f64) -> Vec<f64> {
        let nx = self.nx;
        let mut d: Vec<f64> = (0..self.capacity.len()).map(|k| self.capacity[k] / dt + self.boundary[k]).collect();
        for k in 0..d.len() {
            let (i, j) = (k % nx, k / nx);
            if i + 1 < nx {
                d[k] += self.east[k];
                d[k + 1] += self.east[k];
            }
            if j + 1 < self.ny {
                d[k] += self.north[k];
                d[k + nx] += self.north[k];
            }
        }
        d
    }
}

fn pcg(sys: &System, dt: f64, diag: &[f64], b: &[f64], x: &mut [f64], tol: f64) -> Result<usize> {
    let n = b.len();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(0);
    }
    let mut ax = vec![0.0; n];
    sys.apply(dt, x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    for it in 0..20 * n.max(100) {
        let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm <= tol * bnorm {
            return Ok(it);
        }
        sys.apply(dt, &p, &mut ax);
        let pap: f64 = p.iter().zip(&ax).map(|(a, b)| a * b).sum();
        let a = rz / pap;
        for k in 0..n {
            x[k] += a * p[k];
            r[k] -= a * ax[k];
            z[k] = r[k] / diag[k];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    Err(Error::Assembly("conjugate gradients did not converge".into()))
}

/// Per-cell heat capacity ρc of the rasterised problem (row-major, x fastest).
pub fn rho_c_field(coeffs: &HeatCoefficients, source: &SourceField, spec: &GridSpec) -> Vec<f64> {
    let (xs, ys, _, _) = axes(spec);
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    for y in &ys {
        for x in &xs {
            let p = [source.center[0] + x, source.center[1] + y];
            out.push(if source.contains(p) { coeffs.rho_c_p } else { coeffs.rho_c_m });
        }
    }
    out
}

fn axes(spec: &GridSpec) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let f = spec.faces();
    let c: Vec<f64> = f.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let w: Vec<f64> = f.windows(2).map(|w| w[1] - w[0]).collect();
    (c.clone(), c, w.clone(), w)
}

/// Runs the transmission problem to `spec.t_end`; grid coordinates in the
/// returned run are absolute (the grid is centred on the particle).
pub fn solve_transmission(coeffs: &HeatCoefficients, source: &SourceField, spec: &GridSpec) -> Result<HeatRun> {
    spec.validate()?;
    let (cx, cy, wx, wy) = axes(spec);
    let (nx, ny) = (cx.len(), cy.len());
    let z = source.center;
    let n = nx * ny;
    let mut kappa = vec![coeffs.kappa_m; n];
    let mut capacity = vec![0.0; n];
    let mut q = vec![0.0; n];
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            let p = [z[0] + cx[i], z[1] + cy[j]];
            let inside = source.contains(p);
            if inside {
                kappa[k] = coeffs.kappa_p;
                q[k] = source.value_at(p);
            }
            capacity[k] = if inside { coeffs.rho_c_p } else { coeffs.rho_c_m } * wx[i] * wy[j];
        }
    }
    // rasterisation changes the heated area; restore the mesh's total power
    let raster: f64 = (0..n).map(|k| q[k] * wx[k % nx] * wy[k / nx]).sum();
    let power = source.total_power();
    if raster > 0.0 {
        q.iter_mut().for_each(|v| *v *= power / raster);
    } else if power != 0.0 {
        return Err(Error::Mesh("the grid resolves no cell inside the particle".into()));
    }
    let mut east = vec![0.0; n];
    let mut north = vec![0.0; n];
    let mut boundary = vec![0.0; n];
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            if i + 1 < nx {
                east[k] = wy[j] / (0.5 * wx[i] / kappa[k] + 0.5 * wx[i + 1] / kappa[k + 1]);
            }
            if j + 1 < ny {
                north[k] = wx[i] / (0.5 * wy[j] / kappa[k] + 0.5 * wy[j + 1] / kappa[k + nx]);
            }
            if i == 0 || i + 1 == nx {
                boundary[k] += wy[j] * kappa[k] / (0.5 * wx[i]);
            }
            if j == 0 || j + 1 == ny {
                boundary[k] += wx[i] * kappa[k] / (0.5 * wy[j]);
            }
        }
    }
    let sys = System { nx, ny, east, north, boundary, capacity };
    let steps = (spec.t_end / spec.dt).round().max(1.0) as usize;
    let dt = spec.t_end / steps as f64;
    let diag = sys.diagonal(dt);
    let mut snapshots = vec![vec![0.0; n]];
    let mut u = vec![0.0; n];
    let mut b = vec![0.0; n];
    let mut iterations = 0;
    for step in 1..=steps {
        let on = (step as f64 - 0.5) * dt < source.t0;
        for k in 0..n {
            let area = wx[k % nx] * wy[k / nx];
            b[k] = sys.capacity[k] / dt * u[k] + if on { q[k] * area } else { 0.0 };
        }
        iterations += pcg(&sys, dt, &diag, &b, &mut u, 1e-11)?;
        snapshots.push(u.clone());
    }
    Ok(HeatRun {
        xs: cx.iter().map(|x| x + z[0]).collect(),
        ys: cy.iter().map(|y| y + z[1]).collect(),
        widths_x: wx,
        widths_y: wy,
        dt,
        half_width: spec.half_width,
        snapshots,
        cg_iterations: iterations,
    })
}

/// Heat flux out through the Dirichlet boundary during step n (rate).
pub fn boundary_flux(run: &HeatRun, kappa_m: f64, n: usize) -> f64 {
    let nx = run.xs.len();
    let ny = run.ys.len();
    let u = &run.snapshots[n];
    let mut f = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            if i == 0 || i + 1 == nx {
                f += run.widths_y[j] * kappa_m / (0.5 * run.widths_x[i]) * u[k];
            }
            if j == 0 || j + 1 == ny {
                f += run.widths_x[i] * kappa_m / (0.5 * run.widths_y[j]) * u[k];
            }
        }
    }
    f
}
