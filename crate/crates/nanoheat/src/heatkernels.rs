//! Heat fundamental solution Φ of α∂_t − Δ (normalised to unit spatial
//! mass), its closed-form time integral, boundary layer potentials on a
//! circle, volume and initial potentials, and identity checks.
//!
//! Layer potentials use product integration in time: densities are linear
//! between grid levels and each kernel is integrated exactly over every
//! step, so the endpoint singularity of the last step is exact. In space the
//! kernel is averaged over each node's arc cell. On a circle every operator
//! is circulant and is applied through the FFT.

use crate::error::{Error, Result};
use crate::geometry::{ParticleMesh, Shape, Vec2};
use crate::quad;
use crate::specfun::{e1_unchecked, EULER_GAMMA};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelRole {
    Interior,
    Exterior,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatKernelParams {
    pub alpha: f64,
    pub role: KernelRole,
}

impl HeatKernelParams {
    pub fn new(alpha: f64, role: KernelRole) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::Domain(format!("diffusion constant must be positive, got {alpha}")));
        }
        Ok(Self { alpha, role })
    }
}

/// Φ(x,t;y,τ) = α/(4π(t−τ)) exp(−α|x−y|²/(4(t−τ))) for t > τ, else 0.
pub fn heat_kernel(alpha: f64, x: Vec2, t: f64, y: Vec2, tau: f64) -> f64 {
    let s = t - tau;
    if s <= 0.0 {
        return 0.0;
    }
    let r2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
    alpha / (4.0 * PI * s) * (-alpha * r2 / (4.0 * s)).exp()
}

/// ∂_t Φ(x,t;y,τ).
pub fn heat_kernel_dt(alpha: f64, x: Vec2, t: f64, y: Vec2, tau: f64) -> f64 {
    let s = t - tau;
    if s <= 0.0 {
        return 0.0;
    }
    let r2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
    heat_kernel(alpha, x, t, y, tau) * (alpha * r2 / (4.0 * s * s) - 1.0 / s)
}

/// ∫_{R²} Φ dx by radial quadrature.
pub fn spatial_mass(alpha: f64, s: f64) -> f64 {
    quad::adaptive_semi_infinite(|r| 2.0 * PI * r * heat_kernel(alpha, [r, 0.0], s, [0.0, 0.0], 0.0), 0.0, 1e-13)
}

/// ∫_0^t Φ dτ at distance r = (α/4π) E1(αr²/(4t)).
pub fn time_integral_point(alpha: f64, r: f64, t: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("time integral diverges at r = {r}")));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    Ok(alpha / (4.0 * PI) * e1_unchecked(alpha * r * r / (4.0 * t)))
}

/// Adaptive quadrature of ∫_0^t Φ dτ, the oracle for `time_integral_point`.
pub fn time_integral_quadrature(alpha: f64, r: f64, t: f64) -> f64 {
    // substitute s = t − τ; split geometrically towards s = 0
    let f = |s: f64| heat_kernel(alpha, [r, 0.0], s, [0.0, 0.0], 0.0);
    let mut total = 0.0f64;
    let mut hi = t;
    let floor = (alpha * r * r / 4.0 / 800.0).min(t);
    while hi > floor {
        let lo = (hi * 0.25).max(floor);
        total += quad::adaptive(f, lo, hi, 1e-14);
        hi = lo;
        if lo == floor {
            break;
        }
    }
    total
}

/// The form ½ Γ(0, r²/(4t)) quoted in the source derivation; reported only.
pub fn time_integral_quoted(r: f64, t: f64) -> f64 {
    0.5 * e1_unchecked(r * r / (4.0 * t))
}

/// Small-argument form (α/4π)(−γ − ln(αr²/(4t))).
pub fn time_integral_log_form(alpha: f64, r: f64, t: f64) -> f64 {
    alpha / (4.0 * PI) * (-EULER_GAMMA - (alpha * r * r / (4.0 * t)).ln())
}

/// sup_t ∫_0^{T0} (t−τ)^{−2r} dτ = T0^{1−2r}/(1−2r), finite only for r < ½.
pub fn kr_diagnostic(r: f64, t0: f64) -> Result<f64> {
    if !(r > 0.0 && r < 0.5) {
        return Err(Error::Domain(format!("kernel exponent r must lie in (0, 1/2), got {r}")));
    }
    if !(t0 > 0.0) {
        return Err(Error::Domain(format!("T0 must be positive, got {t0}")));
    }
    Ok(t0.powf(1.0 - 2.0 * r) / (1.0 - 2.0 * r))
}

// ---------------------------------------------------------------------------
// Time moments over one step s = t − τ ∈ [a, b]

fn e1_ratio(c: f64, s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if c == 0.0 {
        f64::INFINITY
    } else {
        e1_unchecked(c / s)
    }
}

fn exp_ratio(c: f64, s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-c / s).exp()
    }
}

/// (1/α)∫_a^b Φ ds and (1/α)∫_a^b Φ s ds at distance r.
pub fn single_moments(alpha: f64, r: f64, a: f64, b: f64) -> (f64, f64) {
    let c = alpha * r * r / 4.0;
    let f = |s: f64| if s <= 0.0 { 0.0 } else { s * exp_ratio(c, s) - c * e1_ratio(c, s) };
    let i0 = if c == 0.0 { (b / a).ln() } else { e1_ratio(c, b) - e1_ratio(c, a) };
    let i1 = if c == 0.0 { b - a } else { f(b) - f(a) };
    (i0 / (4.0 * PI), i1 / (4.0 * PI))
}

/// (1/α)∫_a^b ∂_{n_y}Φ ds and the s-weighted moment, d = (x−y)·n_y.
pub fn double_moments(alpha: f64, r: f64, d: f64, a: f64, b: f64) -> (f64, f64) {
    let c = alpha * r * r / 4.0;
    let i0 = d / (2.0 * PI * r * r) * (exp_ratio(c, b) - exp_ratio(c, a));
    let i1 = d * alpha / (8.0 * PI) * (e1_ratio(c, b) - e1_ratio(c, a));
    (i0, i1)
}

/// Double-layer moments for x, y on a circle of radius R, where
/// d/r² = −1/(2R) and the kernel is bounded at r = 0.
fn double_moments_circle(alpha: f64, r: f64, radius: f64, a: f64, b: f64) -> (f64, f64) {
    let c = alpha * r * r / 4.0;
    let i0 = -(exp_ratio(c, b) - exp_ratio(c, a)) / (4.0 * PI * radius);
    let i1 = if r == 0.0 { 0.0 } else { -alpha * r * r / (16.0 * PI * radius) * (e1_ratio(c, b) - e1_ratio(c, a)) };
    (i0, i1)
}

// ---------------------------------------------------------------------------
// Space-time samples

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, steps: usize) -> Result<Self> {
        if !(t_end > 0.0) || steps == 0 {
            return Err(Error::Domain("time grid needs T > 0 and at least one step".into()));
        }
        Ok(Self { dt: t_end / steps as f64, steps })
    }

    pub fn levels(&self) -> usize {
        self.steps + 1
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }
}

/// Samples at `nodes` boundary nodes (or cells) on levels t_n = nΔt, n = 0..=steps.
/// The density is zero before t = 0 and linear between levels.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeDensity {
    pub nodes: usize,
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl SpaceTimeDensity {
    pub fn zeros(nodes: usize, grid: TimeGrid) -> Self {
        Self { nodes, grid, values: vec![0.0; nodes * grid.levels()] }
    }

    pub fn from_fn(nodes: usize, grid: TimeGrid, f: impl Fn(usize, f64) -> f64) -> Self {
        let mut d = Self::zeros(nodes, grid);
        for n in 0..grid.levels() {
            let t = grid.time(n);
            for i in 0..nodes {
                d.values[n * nodes + i] = f(i, t);
            }
        }
        d
    }

    pub fn level(&self, n: usize) -> &[f64] {
        &self.values[n * self.nodes..(n + 1) * self.nodes]
    }

    pub fn level_mut(&mut self, n: usize) -> &mut [f64] {
        &mut self.values[n * self.nodes..(n + 1) * self.nodes]
    }

    pub fn get(&self, n: usize, i: usize) -> f64 {
        self.values[n * self.nodes + i]
    }

    fn combine(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Self { values, ..self.clone() }
    }

    /// Discrete L²(∂Ω × (0,T)) norm with arc weight `w`.
    pub fn l2_norm(&self, w: f64) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * w * self.grid.dt).sqrt()
    }
}

/// Equispaced nodes on the circle |x − c| = R, node i at angle 2πi/N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleBoundary {
    pub center: Vec2,
    pub radius: f64,
    pub nodes: usize,
}

impl CircleBoundary {
    pub fn new(center: Vec2, radius: f64, nodes: usize) -> Result<Self> {
        if !(radius > 0.0) || nodes < 8 {
            return Err(Error::Mesh("circle needs R > 0 and at least 8 nodes".into()));
        }
        Ok(Self { center, radius, nodes })
    }

    /// The boundary of a disc mesh; other shapes are rejected.
    pub fn from_mesh(mesh: &ParticleMesh) -> Result<Self> {
        match mesh.shape {
            Shape::Disc => Self::new(mesh.center_z, mesh.delta, mesh.boundary.len()),
            Shape::Ellipse { .. } => Err(Error::Shape("heat layer potentials are implemented on circles only".into())),
        }
    }

    pub fn angle(&self, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.nodes as f64
    }

    pub fn node(&self, i: usize) -> Vec2 {
        let (s, c) = self.angle(i).sin_cos();
        [self.center[0] + self.radius * c, self.center[1] + self.radius * s]
    }

    pub fn arc_weight(&self) -> f64 {
        2.0 * PI * self.radius / self.nodes as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    S,
    K,
    Kstar,
    /// Hypersingular operator, evaluated through its weakly singular form.
    H,
}

struct Fourier {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fourier {
    fn new(n: usize) -> Self {
        let mut p = FftPlanner::new();
        Self { n, fwd: p.plan_fft_forward(n), inv: p.plan_fft_inverse(n) }
    }

    fn forward(&self, x: &[f64]) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = x.iter().map(|&a| Complex64::new(a, 0.0)).collect();
        self.fwd.process(&mut v);
        v
    }

    fn inverse(&self, mut v: Vec<Complex64>) -> Vec<f64> {
        self.inv.process(&mut v);
        let s = 1.0 / self.n as f64;
        v.iter().map(|c| c.re * s).collect()
    }

    /// Signed wavenumber of bin k, with the Nyquist bin mapped to 0.
    fn wavenumber(&self, k: usize) -> f64 {
        let n = self.n;
        if 2 * k == n {
            0.0
        } else if 2 * k < n {
            k as f64
        } else {
            k as f64 - n as f64
        }
    }
}

/// Per-lag circulant symbols multiplying the density at the newer (a) and
/// older (b) end of each step.
struct LagSymbols {
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
}

/// Single-layer, double-layer and normal-weighted single-layer operators of
/// α∂_t − Δ on a circle, precomputed for one time grid.
pub struct CircleHeatOperators {
    pub alpha: f64,
    pub circle: CircleBoundary,
    pub grid: TimeGrid,
    fourier: Fourier,
    s: LagSymbols,
    k: LagSymbols,
    s_nn: LagSymbols,
}

impl std::fmt::Debug for CircleHeatOperators {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CircleHeatOperators")
            .field("alpha", &self.alpha)
            .field("circle", &self.circle)
            .field("grid", &self.grid)
            .finish()
    }
}

impl CircleHeatOperators {
    pub fn new(params: HeatKernelParams, circle: CircleBoundary, grid: TimeGrid) -> Self {
        let alpha = params.alpha;
        let n = circle.nodes;
        let rr = circle.radius;
        let h = 2.0 * PI / n as f64;
        let fourier = Fourier::new(n);
        let gl = quad::rule(8);
        let gl_self = quad::rule(16);
        let steps = grid.steps;
        let dt = grid.dt;
        let mut tables = vec![vec![vec![0.0; n]; steps]; 6];
        for d in 0..=n / 2 {
            // cell-average sample points: (angle offset, weight)
            let pts: Vec<(f64, f64)> = if d == 0 {
                // σ = (h/2) v², log singularity removed
                gl_self
                    .nodes
                    .iter()
                    .zip(&gl_self.weights)
                    .flat_map(|(x, w)| {
                        let v = 0.5 * (x + 1.0);
                        let sig = 0.5 * h * v * v;
                        let wt = 0.5 * w * v;
                        [(sig, wt), (-sig, wt)]
                    })
                    .collect()
            } else {
                gl.nodes.iter().zip(&gl.weights).map(|(x, w)| (d as f64 * h + 0.5 * h * x, 0.5 * w)).collect()
            };
            for l in 1..=steps {
                let (a, b) = ((l - 1) as f64 * dt, l as f64 * dt);
                let mut acc = [0.0; 6];
                for &(sig, w) in &pts {
                    let r = 2.0 * rr * (0.5 * sig).sin().abs();
                    let (s0, s1) = single_moments(alpha, r, a, b);
                    let (k0, k1) = double_moments_circle(alpha, r, rr, a, b);
                    let cs = sig.cos();
                    acc[0] += w * (b * s0 - s1);
                    acc[1] += w * (s1 - a * s0);
                    acc[2] += w * (b * k0 - k1);
                    acc[3] += w * (k1 - a * k0);
                    acc[4] += w * cs * (b * s0 - s1);
                    acc[5] += w * cs * (s1 - a * s0);
                }
                let scale = rr * h / dt;
                for (t, v) in tables.iter_mut().zip(acc) {
                    t[l - 1][d] = v * scale;
                    if d > 0 {
                        t[l - 1][n - d] = v * scale;
                    }
                }
            }
        }
        let mut syms: Vec<Vec<Vec<f64>>> = tables
            .into_iter()
            .map(|t| t.into_iter().map(|row| fourier.forward(&row).into_iter().map(|c| c.re).collect()).collect())
            .collect();
        let nn_b = syms.pop().unwrap();
        let nn_a = syms.pop().unwrap();
        let k_b = syms.pop().unwrap();
        let k_a = syms.pop().unwrap();
        let s_b = syms.pop().unwrap();
        let s_a = syms.pop().unwrap();
        Self {
            alpha,
            circle,
            grid,
            fourier,
            s: LagSymbols { a: s_a, b: s_b },
            k: LagSymbols { a: k_a, b: k_b },
            s_nn: LagSymbols { a: nn_a, b: nn_b },
        }
    }

    fn check(&self, density: &SpaceTimeDensity) -> Result<()> {
        if density.nodes != self.circle.nodes || density.grid != self.grid {
            return Err(Error::Shape(format!(
                "density is {} nodes x {} levels, operator expects {} x {}",
                density.nodes,
                density.grid.levels(),
                self.circle.nodes,
                self.grid.levels()
            )));
        }
        Ok(())
    }

    fn convolve(&self, sym: &LagSymbols, density: &SpaceTimeDensity) -> SpaceTimeDensity {
        let n = self.circle.nodes;
        let levels = self.grid.levels();
        let hat: Vec<Vec<Complex64>> = (0..levels).map(|m| self.fourier.forward(density.level(m))).collect();
        let mut out = SpaceTimeDensity::zeros(n, self.grid);
        for lev in 1..levels {
            let mut acc = vec![Complex64::new(0.0, 0.0); n];
            for l in 1..=lev {
                let (sa, sb) = (&sym.a[l - 1], &sym.b[l - 1]);
                let (ha, hb) = (&hat[lev - l + 1], &hat[lev - l]);
                for k in 0..n {
                    acc[k] += ha[k] * sa[k] + hb[k] * sb[k];
                }
            }
            out.level_mut(lev).copy_from_slice(&self.fourier.inverse(acc));
        }
        out
    }

    pub fn apply(&self, kind: LayerKind, density: &SpaceTimeDensity) -> Result<SpaceTimeDensity> {
        self.check(density)?;
        Ok(match kind {
            LayerKind::S => self.convolve(&self.s, density),
            // on a circle (x−y)·n_y = (y−x)·n_x, so K and K* share a kernel
            LayerKind::K | LayerKind::Kstar => self.convolve(&self.k, density),
            LayerKind::H => self.hypersingular(density),
        })
    }

    /// n_x · S[n_y φ].
    pub fn apply_s_normal(&self, density: &SpaceTimeDensity) -> Result<SpaceTimeDensity> {
        self.check(density)?;
        Ok(self.convolve(&self.s_nn, density))
    }

    /// ∂_T along the circle, spectrally.
    pub fn tangential_derivative(&self, density: &SpaceTimeDensity) -> SpaceTimeDensity {
        let mut out = density.clone();
        for lev in 0..self.grid.levels() {
            let mut hat = self.fourier.forward(density.level(lev));
            for (k, h) in hat.iter_mut().enumerate() {
                *h *= Complex64::new(0.0, self.fourier.wavenumber(k) / self.circle.radius);
            }
            out.level_mut(lev).copy_from_slice(&self.fourier.inverse(hat));
        }
        out
    }

    /// ∂_t by backward differences (second order from level 2 on), so level
    /// n only reads levels ≤ n; level 0 borrows the first step's slope, which
    /// only enters outputs at levels ≥ 1.
    pub fn time_derivative(&self, density: &SpaceTimeDensity) -> SpaceTimeDensity {
        let levels = self.grid.levels();
        let dt = self.grid.dt;
        let mut out = density.clone();
        for lev in 0..levels {
            for i in 0..density.nodes {
                let g = |m: usize| density.get(m, i);
                out.values[lev * density.nodes + i] = match lev {
                    _ if levels < 2 => 0.0,
                    0 | 1 => (g(1) - g(0)) / dt,
                    _ => (3.0 * g(lev) - 4.0 * g(lev - 1) + g(lev - 2)) / (2.0 * dt),
                };
            }
        }
        out
    }

    /// H φ = α n·∂_t S[n φ] − ∂_T S[∂_T φ], with ∂_t moved onto the density
    /// (which vanishes before t = 0).
    fn hypersingular(&self, density: &SpaceTimeDensity) -> SpaceTimeDensity {
        let dphi = self.time_derivative(density);
        let first = self.convolve(&self.s_nn, &dphi);
        let tphi = self.tangential_derivative(density);
        let second = self.tangential_derivative(&self.convolve(&self.s, &tphi));
        let alpha = self.alpha;
        first.combine(&second, |a, b| alpha * a - b)
    }

    /// ‖S H φ − (½ − K)(½ + K) φ‖ / ‖φ‖.
    pub fn calderon_residual(&self, density: &SpaceTimeDensity) -> Result<f64> {
        self.check(density)?;
        let w = self.circle.arc_weight();
        let norm = density.l2_norm(w);
        if norm == 0.0 {
            return Ok(0.0);
        }
        let shp = self.convolve(&self.s, &self.hypersingular(density));
        let kp = self.convolve(&self.k, density);
        let p = density.combine(&kp, |a, b| 0.5 * a + b);
        let kq = self.convolve(&self.k, &p);
        let rhs = p.combine(&kq, |a, b| 0.5 * a - b);
        Ok(shp.combine(&rhs, |a, b| a - b).l2_norm(w) / norm)
    }

    /// Trigonometric interpolation of every level onto `factor`× more nodes.
    pub fn upsample(&self, density: &SpaceTimeDensity, factor: usize) -> SpaceTimeDensity {
        let n = self.circle.nodes;
        let m = n * factor;
        let fine = Fourier::new(m);
        let mut out = SpaceTimeDensity::zeros(m, self.grid);
        for lev in 0..self.grid.levels() {
            let hat = self.fourier.forward(density.level(lev));
            let mut big = vec![Complex64::new(0.0, 0.0); m];
            for k in 0..n {
                let kk = self.fourier.wavenumber(k);
                if 2 * k == n {
                    big[k] += hat[k] * 0.5;
                    big[m - k] += hat[k] * 0.5;
                } else if kk >= 0.0 {
                    big[k] = hat[k];
                } else {
                    big[m - (n - k)] = hat[k];
                }
            }
            let vals = fine.inverse(big);
            for (o, v) in out.level_mut(lev).iter_mut().zip(vals) {
                *o = v * factor as f64;
            }
        }
        out
    }

    /// Double-layer potential at an off-boundary point x and level n, by
    /// trapezoid on an upsampled density.
    pub fn double_layer_at(&self, fine: &SpaceTimeDensity, x: Vec2, lev: usize) -> f64 {
        let m = fine.nodes;
        let c = self.circle.center;
        let rr = self.circle.radius;
        let w = 2.0 * PI * rr / m as f64;
        let dt = self.grid.dt;
        let mut total = 0.0;
        for j in 0..m {
            let th = 2.0 * PI * j as f64 / m as f64;
            let (s, co) = th.sin_cos();
            let y = [c[0] + rr * co, c[1] + rr * s];
            let diff = [x[0] - y[0], x[1] - y[1]];
            let r = (diff[0] * diff[0] + diff[1] * diff[1]).sqrt();
            let d = diff[0] * co + diff[1] * s;
            for l in 1..=lev {
                let (a, b) = ((l - 1) as f64 * dt, l as f64 * dt);
                let (i0, i1) = double_moments(self.alpha, r, d, a, b);
                if i0 == 0.0 && i1 == 0.0 {
                    continue;
                }
                total += w * ((b * i0 - i1) * fine.get(lev - l + 1, j) + (i1 - a * i0) * fine.get(lev - l, j)) / dt;
            }
        }
        total
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpReport {
    /// max |(D_ext − D_int) − φ| / max |φ| over the sampled points.
    pub max_rel_error: f64,
    pub samples: usize,
}

/// Two-sided limits of the double-layer potential at `targets` nodes and
/// the given levels, by quadratic extrapolation from distances η, 2η, 3η
/// with η = 3 fine spacings. Checks D_ext − D_int = φ.
pub fn double_layer_jump(
    ops: &CircleHeatOperators,
    density: &SpaceTimeDensity,
    targets: usize,
    levels: &[usize],
    upsample: usize,
) -> Result<JumpReport> {
    ops.check(density)?;
    let fine = ops.upsample(density, upsample);
    let rr = ops.circle.radius;
    let eta = 3.0 * 2.0 * PI * rr / (ops.circle.nodes * upsample) as f64;
    let scale = density.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    let mut samples = 0;
    for t in 0..targets {
        let i = t * ops.circle.nodes / targets;
        let th = ops.circle.angle(i);
        let (s, c) = th.sin_cos();
        for &lev in levels {
            let side = |sign: f64| {
                let v: Vec<f64> = (1..=3)
                    .map(|k| {
                        let rad = rr + sign * eta * k as f64;
                        ops.double_layer_at(&fine, [ops.circle.center[0] + rad * c, ops.circle.center[1] + rad * s], lev)
                    })
                    .collect();
                3.0 * v[0] - 3.0 * v[1] + v[2]
            };
            let jump = side(1.0) - side(-1.0);
            worst = worst.max((jump - density.get(lev, i)).abs() / scale.max(f64::MIN_POSITIVE));
            samples += 1;
        }
    }
    Ok(JumpReport { max_rel_error: worst, samples })
}

// ---------------------------------------------------------------------------
// Laplace Neumann–Poincaré operator

/// K[φ](x) = Σ (x−v)·ν_v/(2π|x−v|²) φ_v w_v over the boundary nodes, with the
/// diagonal replaced by its limit −κ(x)/(4π).
pub fn np_laplace_apply(mesh: &ParticleMesh, density: &[f64]) -> Result<Vec<f64>> {
    let b = &mesh.boundary;
    if density.len() != b.len() {
        return Err(Error::Shape(format!("density has {} entries for {} boundary nodes", density.len(), b.len())));
    }
    let (ea, eb) = mesh.shape.axes();
    let map = mesh.scale_map();
    Ok((0..b.len())
        .map(|i| {
            let x = b[i].node;
            let mut s = 0.0;
            for (j, v) in b.iter().enumerate() {
                let k = if i == j {
                    let p = map.inverse(x);
                    let (c, sn) = (p[0] / ea, p[1] / eb);
                    let kappa = ea * eb / (mesh.delta * (ea * ea * sn * sn + eb * eb * c * c).powf(1.5));
                    -kappa / (4.0 * PI)
                } else {
                    let d = [x[0] - v.node[0], x[1] - v.node[1]];
                    (d[0] * v.normal[0] + d[1] * v.normal[1]) / (2.0 * PI * (d[0] * d[0] + d[1] * d[1]))
                };
                s += k * density[j] * v.arc_weight;
            }
            s
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Volume and initial potentials

/// V[f](x,t_n) = ∫_0^t ∫_Ω Φ f dy dτ with cells as point sources and
/// product integration in time. `f` has one node per cell.
pub fn volume_potential(alpha: f64, mesh: &ParticleMesh, f: &SpaceTimeDensity, targets: &[Vec2]) -> Result<Vec<Vec<f64>>> {
    if f.nodes != mesh.len() {
        return Err(Error::Shape("volume density needs one value per cell".into()));
    }
    let dt = f.grid.dt;
    Ok(targets
        .iter()
        .map(|&x| {
            (0..f.grid.levels())
                .map(|lev| {
                    let mut total = 0.0;
                    for (j, cell) in mesh.cells.iter().enumerate() {
                        let r = crate::geometry::dist(x, cell.centroid);
                        for l in 1..=lev {
                            let (a, b) = ((l - 1) as f64 * dt, l as f64 * dt);
                            let (i0, i1) = single_moments(alpha, r, a, b);
                            total += alpha * cell.area * ((b * i0 - i1) * f.get(lev - l + 1, j) + (i1 - a * i0) * f.get(lev - l, j)) / dt;
                        }
                    }
                    total
                })
                .collect()
        })
        .collect())
}

/// I0[ψ](x,t) = ∫_Ω Φ(x,t;y,0) ψ(y) dy.
pub fn initial_potential(alpha: f64, mesh: &ParticleMesh, psi: &[f64], x: Vec2, t: f64) -> Result<f64> {
    if psi.len() != mesh.len() {
        return Err(Error::Shape("initial density needs one value per cell".into()));
    }
    Ok(mesh.cells.iter().zip(psi).map(|(c, p)| heat_kernel(alpha, x, t, c.centroid, 0.0) * c.area * p).sum())
}

// ---------------------------------------------------------------------------
// Kernel-difference estimate and singular bounds

/// φ(v,y,t,τ) = ∫_0^τ (c/(τ−s)²) e^{−c/(τ−s)} Φ^e(ξ,t;z,s) ds, c = α|y−v|²/4,
/// computed with w = c/(τ−s). `phi_e(s)` evaluates Φ^e(ξ,t;z,s).
pub fn kernel_difference_phi(alpha: f64, dist_yv: f64, tau: f64, phi_e: impl Fn(f64) -> f64) -> f64 {
    if tau <= 0.0 {
        return 0.0;
    }
    let c = alpha * dist_yv * dist_yv / 4.0;
    let w0 = c / tau;
    let f = |w: f64| (-w).exp() * phi_e(tau - c / w);
    let mut total = 0.0;
    let mut lo = w0;
    let mut width = 0.5f64.max(w0);
    while lo < w0 + 45.0 {
        total += quad::adaptive(f, lo, lo + width, 1e-13);
        lo += width;
        width *= 2.0;
    }
    total
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelDifferenceReport {
    pub distances: Vec<f64>,
    /// max over τ of |φ − Φ^e(τ)| / (√α |y − v|) per distance.
    pub ratios: Vec<f64>,
    pub max_differences: Vec<f64>,
    /// Every finer ratio is at most twice the coarsest.
    pub bounded: bool,
}

/// Samples the kernel-difference difference at |y − v| ∈ {δ, δ/2, δ/4}.
pub fn kernel_difference_check(alpha: f64, alpha_m: f64, xi_z: f64, t: f64, delta: f64, taus: &[f64]) -> KernelDifferenceReport {
    let phi_e = |s: f64| heat_kernel(alpha_m, [xi_z, 0.0], t, [0.0, 0.0], s);
    let distances: Vec<f64> = [1.0, 0.5, 0.25].iter().map(|f| f * delta).collect();
    let mut ratios = Vec::new();
    let mut max_differences = Vec::new();
    for &d in &distances {
        let diff = taus.iter().map(|&tau| (kernel_difference_phi(alpha, d, tau, phi_e) - phi_e(tau)).abs()).fold(0.0, f64::max);
        max_differences.push(diff);
        ratios.push(diff / (alpha.sqrt() * d));
    }
    let bounded = ratios.iter().all(|r| *r <= 2.0 * ratios[0]);
    KernelDifferenceReport { distances, ratios, max_differences, bounded }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularBoundReport {
    pub r: f64,
    pub samples: usize,
    /// sup over u of the value and time-derivative ratios.
    pub c_value: f64,
    pub c_dt: f64,
    /// Largest ratios seen on the coarse half and on all samples.
    pub coarse_value: f64,
    pub max_value: f64,
    pub coarse_dt: f64,
    pub max_dt: f64,
    pub passed: bool,
}

fn sup_on(f: impl Fn(f64) -> f64) -> f64 {
    // dense log grid then golden-section refinement
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 0..=4000 {
        let u = 10f64.powf(-6.0 + 8.0 * k as f64 / 4000.0);
        let v = f(u);
        if v > best.1 {
            best = (u, v);
        }
    }
    let (mut a, mut b) = (best.0 / 1.01, best.0 * 1.01);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f(0.5 * (a + b)).max(best.1)
}

/// Checks |Φ| ≤ C α^r s^{−r} d^{−(2−2r)} and |∂_tΦ| ≤ C' α^{1−r} s^{−r} d^{−(4−2r)}
/// on a low-discrepancy sample of s ∈ [1e−4, 1], d ∈ [1e−3, 1]. The
/// constants are the exact suprema over u = αd²/(4s).
pub fn singular_bound_check(alpha: f64, r: f64, samples: usize) -> Result<SingularBoundReport> {
    if !(r > 0.0 && r < 0.5) {
        return Err(Error::Domain(format!("exponent r must lie in (0, 1/2), got {r}")));
    }
    let c_value = sup_on(|u| (4.0 * u).powf(1.0 - r) * (-u).exp() / (4.0 * PI));
    let c_dt = alpha.powf(2.0 * r - 2.0) * sup_on(|u| (4.0 * u).powf(2.0 - r) * (u - 1.0).abs() * (-u).exp() / (4.0 * PI));
    let g1 = 0.754_877_666_246_692_8;
    let g2 = 0.569_840_290_998_053_3;
    let (mut coarse_value, mut max_value, mut coarse_dt, mut max_dt) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k in 0..samples {
        let u1 = (0.5 + g1 * (k + 1) as f64).fract();
        let u2 = (0.5 + g2 * (k + 1) as f64).fract();
        let s = 10f64.powf(-4.0 + 4.0 * u1);
        let d = 10f64.powf(-3.0 + 3.0 * u2);
        let phi = heat_kernel(alpha, [d, 0.0], s, [0.0, 0.0], 0.0);
        let dphi = heat_kernel_dt(alpha, [d, 0.0], s, [0.0, 0.0], 0.0);
        let rv = phi.abs() / (alpha.powf(r) * s.powf(-r) * d.powf(-(2.0 - 2.0 * r)));
        let rd = dphi.abs() / (alpha.powf(1.0 - r) * s.powf(-r) * d.powf(-(4.0 - 2.0 * r)));
        if k < samples / 2 {
            coarse_value = coarse_value.max(rv);
            coarse_dt = coarse_dt.max(rd);
        }
        max_value = max_value.max(rv);
        max_dt = max_dt.max(rd);
    }
    let passed = max_value <= 1.01 * c_value && max_dt <= 1.01 * c_dt;
    Ok(SingularBoundReport { r, samples, c_value, c_dt, coarse_value, max_value, coarse_dt, max_dt, passed })
}
