//! Lippmann–Schwinger volume-integral solvers: TM for the field ∇H and TE for
//! the scalar field E, plus the dominant-term energy formulas.
//!
//! The TM operator is M_k = M_0 − ∫ Hess D with M_0 the magnetization
//! operator of the spectral module (spectrum in [0, 1] on harmonic gradients)
//! and D = G^k − G^0 the smooth remainder. The TE operator is
//! V_k = V_0 + ∫ D with V_0 the logarithmic potential.

use crate::error::{Error, Result};
use crate::geometry::{dist, ParticleMesh, Vec2};
use crate::kernels::{laplace_g0, log_self_integral, HelmholtzRemainder};
use crate::material::HostMedium;
use crate::spectral::MagnetizationOperator;
use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Condition numbers above this are reported as a resonance hit too exactly.
pub const CONDITION_MAX: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentWave {
    pub omega: f64,
    pub direction: Vec2,
    pub k: f64,
    pub amplitude: Complex64,
}

impl IncidentWave {
    pub fn new(omega: f64, direction: Vec2, medium: &HostMedium) -> Result<Self> {
        let norm = (direction[0] * direction[0] + direction[1] * direction[1]).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("incident direction must be a unit vector, |θ| = {norm}")));
        }
        if !(omega > 0.0) {
            return Err(Error::Domain(format!("frequency must be positive, got {omega}")));
        }
        Ok(Self { omega, direction, k: omega * (medium.mu_m * medium.eps_m).sqrt(), amplitude: Complex64::new(1.0, 0.0) })
    }

    pub fn with_amplitude(mut self, amplitude: Complex64) -> Self {
        self.amplitude = amplitude;
        self
    }

    /// H^in(x) = E^in(x) = A e^{ik θ·x}.
    pub fn scalar(&self, x: Vec2) -> Complex64 {
        let phase = self.k * (self.direction[0] * x[0] + self.direction[1] * x[1]);
        self.amplitude * Complex64::from_polar(1.0, phase)
    }

    /// ∇H^in(x) = ik θ H^in(x).
    pub fn gradient(&self, x: Vec2) -> [Complex64; 2] {
        let h = self.scalar(x) * Complex64::new(0.0, self.k);
        [h * self.direction[0], h * self.direction[1]]
    }

    /// |∇H^in(z)|² for TM, |E^in(z)|² for TE.
    pub fn intensity(&self, kind: FieldKind) -> f64 {
        let a = self.amplitude.norm_sqr();
        match kind {
            FieldKind::Tm => a * self.k * self.k,
            FieldKind::Te => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Tm,
    Te,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ComplexField {
    Vector(Vec<[Complex64; 2]>),
    Scalar(Vec<Complex64>),
}

impl ComplexField {
    /// |field|² per cell.
    pub fn intensity(&self) -> Vec<f64> {
        match self {
            ComplexField::Vector(v) => v.iter().map(|f| f[0].norm_sqr() + f[1].norm_sqr()).collect(),
            ComplexField::Scalar(v) => v.iter().map(|f| f.norm_sqr()).collect(),
        }
    }

    fn flat(&self) -> Vec<Complex64> {
        match self {
            ComplexField::Vector(v) => v.iter().flat_map(|f| [f[0], f[1]]).collect(),
            ComplexField::Scalar(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterSolution {
    pub field: ComplexField,
    /// ∫_Ω |E|².
    pub energy: f64,
    /// |1 − αλ|² (TM) or |1 − ω²μ τ λ|² (TE) when a resonance was supplied.
    pub resonance_factor: Option<f64>,
    /// ‖A u − b‖ / ‖b‖ of the discrete system.
    pub relative_residual: f64,
    /// 1-norm condition estimate of the discrete system.
    pub condition: f64,
}

impl ScatterSolution {
    pub fn with_resonance_factor(mut self, factor: f64) -> Self {
        self.resonance_factor = Some(factor);
        self
    }
}

fn energy_of(mesh: &ParticleMesh, field: &ComplexField) -> f64 {
    field.intensity().iter().zip(&mesh.cells).map(|(i, c)| i * c.area).sum()
}

/// Smooth part −∫ Hess D of the TM operator, 2N×2N.
fn tm_smooth(mesh: &ParticleMesh, rem: &HelmholtzRemainder) -> Mat<Complex64> {
    let n = mesh.len();
    let mut m = Mat::<Complex64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        let xi = mesh.cells[i].centroid;
        for j in 0..n {
            let cj = mesh.cells[j];
            let h = if i == j {
                let s = rem.hessian_self_integral((cj.area / PI).sqrt());
                [s, Complex64::new(0.0, 0.0), s]
            } else {
                let d = [xi[0] - cj.centroid[0], xi[1] - cj.centroid[1]];
                let h = rem.hessian(d);
                [h[0] * cj.area, h[1] * cj.area, h[2] * cj.area]
            };
            m[(2 * i, 2 * j)] = -h[0];
            m[(2 * i, 2 * j + 1)] = -h[1];
            m[(2 * i + 1, 2 * j)] = -h[1];
            m[(2 * i + 1, 2 * j + 1)] = -h[2];
        }
    }
    m
}

/// Dense TM operator M_k on cell-constant fields.
pub fn tm_operator(mesh: &ParticleMesh, k: f64) -> Mat<Complex64> {
    let m0 = MagnetizationOperator::new(mesh).assemble();
    let mut m = tm_smooth(mesh, &HelmholtzRemainder::new(k));
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            m[(i, j)] += m0[(i, j)];
        }
    }
    m
}

/// Dense TE operator V_k on cell-constant densities.
pub fn te_operator(mesh: &ParticleMesh, k: f64) -> Mat<Complex64> {
    let rem = HelmholtzRemainder::new(k);
    let n = mesh.len();
    let mut m = Mat::<Complex64>::zeros(n, n);
    for i in 0..n {
        let xi = mesh.cells[i].centroid;
        for j in 0..n {
            let cj = mesh.cells[j];
            m[(i, j)] = if i == j {
                let rho = (cj.area / PI).sqrt();
                rem.self_integral(rho) + log_self_integral(rho)
            } else {
                let r = dist(xi, cj.centroid);
                (rem.value(r) + laplace_g0(r)) * cj.area
            };
        }
    }
    m
}

fn matvec(a: &Mat<Complex64>, x: &[Complex64]) -> Vec<Complex64> {
    let mut y = vec![Complex64::new(0.0, 0.0); a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        let col = a.col(j);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += col[i] * xj;
        }
    }
    y
}

fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn norm1(a: &Mat<Complex64>) -> f64 {
    (0..a.ncols()).map(|j| a.col(j).iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn to_col(x: &[Complex64]) -> Mat<Complex64> {
    Mat::from_fn(x.len(), 1, |i, _| x[i])
}

// Hager–Higham estimate of ‖A^{-1}‖_1.
fn inverse_norm1(lu: &PartialPivLu<Complex64>, n: usize) -> f64 {
    let mut x = to_col(&vec![Complex64::new(1.0 / n as f64, 0.0); n]);
    let mut est = 0.0;
    for _ in 0..5 {
        lu.solve_in_place(x.as_mut());
        let y: Vec<Complex64> = (0..n).map(|i| x[(i, 0)]).collect();
        let new_est: f64 = y.iter().map(|v| v.norm()).sum();
        if new_est <= est {
            break;
        }
        est = new_est;
        let mut z = to_col(&y.iter().map(|v| if v.norm() > 0.0 { v / v.norm() } else { Complex64::new(1.0, 0.0) }).collect::<Vec<_>>());
        lu.solve_adjoint_in_place(z.as_mut());
        let (jmax, _) = (0..n).map(|i| (i, z[(i, 0)].norm())).fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        x = Mat::zeros(n, 1);
        x[(jmax, 0)] = Complex64::new(1.0, 0.0);
    }
    est
}

/// Solves (I − c·K) u = b densely, returning u, the relative residual and
/// the condition estimate. `factor` is reported with a too-exact resonance.
fn solve_dense(k: &Mat<Complex64>, c: Complex64, b: &[Complex64], factor: f64) -> Result<(Vec<Complex64>, f64, f64)> {
    let n = b.len();
    let mut a = Mat::<Complex64>::from_fn(n, n, |i, j| -c * k[(i, j)]);
    for i in 0..n {
        a[(i, i)] += 1.0;
    }
    if a.col_iter().any(|col| col.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())) {
        return Err(Error::Assembly("non-finite entry in the system matrix".into()));
    }
    let lu = a.partial_piv_lu();
    let cond = norm1(&a) * inverse_norm1(&lu, n);
    if !cond.is_finite() || cond > CONDITION_MAX {
        return Err(Error::ResonanceTooExact {
            factor,
            msg: format!("condition estimate {cond:.3e} exceeds {CONDITION_MAX:.0e}"),
        });
    }
    let mut x = to_col(b);
    lu.solve_in_place(x.as_mut());
    let u: Vec<Complex64> = (0..n).map(|i| x[(i, 0)]).collect();
    let au = matvec(&a, &u);
    let res: Vec<Complex64> = au.iter().zip(b).map(|(p, q)| p - q).collect();
    let rel = norm2(&res) / norm2(b).max(f64::MIN_POSITIVE);
    Ok((u, rel, cond))
}

/// ∇H^in sampled at the cell centroids.
pub fn tm_incident(mesh: &ParticleMesh, wave: &IncidentWave) -> ComplexField {
    ComplexField::Vector(mesh.cells.iter().map(|c| wave.gradient(c.centroid)).collect())
}

pub fn te_incident(mesh: &ParticleMesh, wave: &IncidentWave) -> ComplexField {
    ComplexField::Scalar(mesh.cells.iter().map(|c| wave.scalar(c.centroid)).collect())
}

/// Solves ∇H − α M_k ∇H = ∇H^in.
pub fn solve_tm(mesh: &ParticleMesh, alpha: Complex64, wave: &IncidentWave) -> Result<ScatterSolution> {
    solve_tm_with(mesh, &tm_operator(mesh, wave.k), alpha, wave)
}

/// As `solve_tm` with a precomputed operator from `tm_operator`.
pub fn solve_tm_with(mesh: &ParticleMesh, op: &Mat<Complex64>, alpha: Complex64, wave: &IncidentWave) -> Result<ScatterSolution> {
    check_dims(op, 2 * mesh.len())?;
    let b = tm_incident(mesh, wave).flat();
    let (u, rel, cond) = solve_dense(op, alpha, &b, f64::NAN)?;
    let field = ComplexField::Vector(u.chunks(2).map(|c| [c[0], c[1]]).collect());
    let energy = energy_of(mesh, &field);
    Ok(ScatterSolution { field, energy, resonance_factor: None, relative_residual: rel, condition: cond })
}

/// Solves E − ω²μ_m τ_p V_k E = E^in.
pub fn solve_te(mesh: &ParticleMesh, tau_p: Complex64, wave: &IncidentWave, mu_m: f64) -> Result<ScatterSolution> {
    solve_te_with(mesh, &te_operator(mesh, wave.k), tau_p, wave, mu_m)
}

pub fn solve_te_with(
    mesh: &ParticleMesh,
    op: &Mat<Complex64>,
    tau_p: Complex64,
    wave: &IncidentWave,
    mu_m: f64,
) -> Result<ScatterSolution> {
    check_dims(op, mesh.len())?;
    let b = te_incident(mesh, wave).flat();
    let c = tau_p * (wave.omega * wave.omega * mu_m);
    let (u, rel, cond) = solve_dense(op, c, &b, f64::NAN)?;
    let field = ComplexField::Scalar(u);
    let energy = energy_of(mesh, &field);
    Ok(ScatterSolution { field, energy, resonance_factor: None, relative_residual: rel, condition: cond })
}

fn check_dims(op: &Mat<Complex64>, n: usize) -> Result<()> {
    if op.nrows() != n || op.ncols() != n {
        return Err(Error::Shape(format!("operator is {}x{}, expected {n}x{n}", op.nrows(), op.ncols())));
    }
    Ok(())
}

/// First-order Born approximation u_in + c·K u_in.
pub fn born(op: &Mat<Complex64>, c: Complex64, incident: &ComplexField) -> ComplexField {
    let b = incident.flat();
    let kb = matvec(op, &b);
    let u: Vec<Complex64> = b.iter().zip(&kb).map(|(x, y)| x + c * y).collect();
    match incident {
        ComplexField::Vector(_) => ComplexField::Vector(u.chunks(2).map(|c| [c[0], c[1]]).collect()),
        ComplexField::Scalar(_) => ComplexField::Scalar(u),
    }
}

/// Area-weighted L² distance between two fields.
pub fn field_distance(mesh: &ParticleMesh, a: &ComplexField, b: &ComplexField) -> f64 {
    let (fa, fb) = (a.flat(), b.flat());
    let per = fa.len() / mesh.len();
    fa.iter()
        .zip(&fb)
        .enumerate()
        .map(|(i, (x, y))| (x - y).norm_sqr() * mesh.cells[i / per].area)
        .sum::<f64>()
        .sqrt()
}

/// |E^in(z)|²·(∫ e_{n0})² / resonance_factor.
pub fn dominant_energy(wave_at_z: f64, mean_sq: f64, resonance_factor: f64) -> Result<f64> {
    if !(resonance_factor > 0.0) {
        return Err(Error::Domain(format!("resonance factor must be positive, got {resonance_factor}")));
    }
    Ok(wave_at_z * mean_sq / resonance_factor)
}

/// |1 − αλ|².
pub fn tm_resonance_factor(alpha: Complex64, lambda: f64) -> f64 {
    (Complex64::new(1.0, 0.0) - alpha * lambda).norm_sqr()
}

/// |1 − ω²μ_m τ_p λ|².
pub fn te_resonance_factor(omega: f64, mu_m: f64, tau_p: Complex64, lambda: f64) -> f64 {
    (Complex64::new(1.0, 0.0) - tau_p * (omega * omega * mu_m * lambda)).norm_sqr()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AprioriNorms {
    /// ‖∇H‖_{L²(Ω)}, TM only.
    pub grad_h: Option<f64>,
    /// ‖|E|²‖_{L²(Ω)}.
    pub e_sq: f64,
}

pub fn apriori_norms(solution: &ScatterSolution, mesh: &ParticleMesh) -> AprioriNorms {
    let intensity = solution.field.intensity();
    let e_sq = intensity.iter().zip(&mesh.cells).map(|(i, c)| i * i * c.area).sum::<f64>().sqrt();
    let grad_h = match solution.field {
        ComplexField::Vector(_) => Some(solution.energy.sqrt()),
        ComplexField::Scalar(_) => None,
    };
    AprioriNorms { grad_h, e_sq }
}
