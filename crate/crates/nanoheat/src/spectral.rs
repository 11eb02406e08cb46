//! Logarithmic potential and magnetization operators on the particle mesh,
//! their eigen-decompositions and eigenfunction means.
//!
//! The magnetization operator M[F](x) = ∇∫_Ω ∇_y G0(x,y)·F(y) dy is applied to
//! piecewise-constant fields through the divergence theorem on every cell:
//! M[F](x) = Σ_edges ∫_edge ∇_x G0(x,y) (ν·(F_inner − F_outer))(y) ds_y.
//! The self cell needs no special rule and interior edges carry only the
//! jump of F, so constant fields leave charges on ∂Ω alone.

use crate::error::{Error, Result};
use crate::geometry::{dist, Curve, ParticleMesh, Vec2};
use crate::kernels::{laplace_g0, log_self_integral};
use crate::quad;
use faer::{Mat, Side};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorTag {
    LogPotential,
    Magnetization,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Samples {
    Scalar(Vec<f64>),
    Vector(Vec<Vec2>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mean {
    Scalar(f64),
    Vector(Vec2),
}

impl Mean {
    pub fn norm_sq(&self) -> f64 {
        match *self {
            Mean::Scalar(v) => v * v,
            Mean::Vector(v) => v[0] * v[0] + v[1] * v[1],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    /// Sorted descending.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Samples>,
    pub means: Vec<Mean>,
    pub operator_tag: OperatorTag,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Index of the eigenpair with the largest mean.
    pub fn dominant_index(&self) -> usize {
        let mut best = 0;
        for (i, m) in self.means.iter().enumerate() {
            if m.norm_sq() > self.means[best].norm_sq() * (1.0 + 1e-12) {
                best = i;
            }
        }
        best
    }

    /// (∫ e_{n0})² summed over eigenpairs whose eigenvalue equals λ_{n0} to
    /// relative tolerance `tol`. Vector means are projected on `direction`
    /// when given, which is the quantity that multiplies |E^in(z)|².
    pub fn resonant_mean_sq(&self, n0: usize, direction: Option<Vec2>, tol: f64) -> f64 {
        let l0 = self.eigenvalues[n0];
        let mut s = 0.0;
        for (l, m) in self.eigenvalues.iter().zip(&self.means) {
            if (l - l0).abs() > tol * l0.abs().max(f64::MIN_POSITIVE) {
                continue;
            }
            s += match (m, direction) {
                (Mean::Vector(v), Some(d)) => (v[0] * d[0] + v[1] * d[1]).powi(2),
                _ => m.norm_sq(),
            };
        }
        s
    }
}

// ---------------------------------------------------------------------------
// Logarithmic potential

/// Symmetrised Nyström matrix W^{1/2} K W^{1/2} of the volume log potential,
/// K_ij = −ln|x_i − x_j|/(2π) off the diagonal and the equivalent-disc self
/// integral divided by the cell area on it.
pub fn assemble_log_potential(mesh: &ParticleMesh) -> Result<Mat<f64>> {
    let n = mesh.len();
    let w: Vec<f64> = mesh.cells.iter().map(|c| c.area.sqrt()).collect();
    let mut m = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        let ci = mesh.cells[i];
        let rho = (ci.area / PI).sqrt();
        m[(i, i)] = log_self_integral(rho);
        for j in 0..i {
            let r = dist(ci.centroid, mesh.cells[j].centroid);
            if r == 0.0 {
                return Err(Error::Mesh(format!("cells {i} and {j} share a centroid")));
            }
            let v = laplace_g0(r) * w[i] * w[j];
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// Area-weighted log potential applied to a cell density, evaluated at an
/// arbitrary point (used by tests and diagnostics).
pub fn log_potential_at(mesh: &ParticleMesh, density: &[f64], x: Vec2) -> f64 {
    mesh.cells
        .iter()
        .zip(density)
        .map(|(c, u)| {
            let r = dist(c.centroid, x);
            if r < 1e-14 {
                log_self_integral((c.area / PI).sqrt()) * u
            } else {
                laplace_g0(r) * c.area * u
            }
        })
        .sum()
}

/// Full eigen-decomposition of a symmetrised operator W^{1/2} K W^{1/2}.
/// Returned eigenvectors are K-eigenfunctions normalised in the
/// area-weighted inner product, with non-negative means.
pub fn eigs(matrix: &Mat<f64>, weights: &[f64]) -> Result<EigenSystem> {
    let n = matrix.nrows();
    if matrix.ncols() != n || weights.len() != n {
        return Err(Error::Shape("eigs needs a square matrix and one weight per row".into()));
    }
    let scale = (0..n).map(|i| matrix[(i, i)].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for j in 0..n {
        for i in 0..j {
            if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-10 * scale {
                return Err(Error::Assembly(format!("matrix is not symmetric at ({i},{j})")));
            }
        }
    }
    let evd = matrix.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Assembly(format!("{e:?}")))?;
    let s = evd.S();
    let u = evd.U();
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Vec::with_capacity(n);
    let mut means = Vec::with_capacity(n);
    for col in (0..n).rev() {
        let mut v: Vec<f64> = (0..n).map(|i| u[(i, col)] / weights[i].sqrt()).collect();
        let mut mean: f64 = v.iter().zip(weights).map(|(a, w)| a * w).sum();
        if mean < 0.0 {
            v.iter_mut().for_each(|a| *a = -*a);
            mean = -mean;
        }
        eigenvalues.push(s[col]);
        eigenvectors.push(Samples::Scalar(v));
        means.push(Mean::Scalar(mean));
    }
    Ok(EigenSystem { eigenvalues, eigenvectors, means, operator_tag: OperatorTag::LogPotential })
}

/// Top eigenpair by shifted power iteration on the symmetrised matrix; an
/// independent check of `eigs`.
pub fn power_iteration(matrix: &Mat<f64>, iters: usize) -> (f64, Vec<f64>) {
    let n = matrix.nrows();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut lambda = 0.0;
    for _ in 0..iters {
        let mut w = vec![0.0; n];
        for j in 0..n {
            let vj = v[j];
            let col = matrix.col(j);
            for i in 0..n {
                w[i] += col[i] * vj;
            }
        }
        let norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        let next_lambda: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        v = w.into_iter().map(|a| a / norm).collect();
        if (next_lambda - lambda).abs() <= 1e-15 * next_lambda.abs() {
            lambda = next_lambda;
            break;
        }
        lambda = next_lambda;
    }
    (lambda, v)
}

// ---------------------------------------------------------------------------
// Magnetization

const ORDERS: [usize; 5] = [1, 2, 4, 8, 16];

#[derive(Debug, Clone, Copy)]
struct QPoint {
    y: Vec2,
    wn: Vec2,
}

#[derive(Debug, Clone)]
struct EdgeQuad {
    mid: Vec2,
    size: f64,
    /// Points for ORDERS[0..], concatenated.
    pts: Vec<QPoint>,
}

fn quad_points(c: &Curve, n: usize) -> Vec<QPoint> {
    let r = quad::rule(n);
    r.nodes
        .iter()
        .zip(&r.weights)
        .map(|(x, w)| {
            let (y, nd) = c.eval(0.5 * (1.0 + x));
            QPoint { y, wn: [0.5 * w * nd[0], 0.5 * w * nd[1]] }
        })
        .collect()
}

// Order index for a target at distance d from the edge midpoint, or None
// when the edge must be split.
#[inline]
fn order_index(d: f64, size: f64) -> Option<usize> {
    let q = d / size;
    if q > 16.0 {
        Some(0)
    } else if q > 8.0 {
        Some(1)
    } else if q > 4.0 {
        Some(2)
    } else if q > 2.0 {
        Some(3)
    } else if q > 1.0 {
        Some(4)
    } else {
        None
    }
}

fn offset(idx: usize) -> usize {
    ORDERS[..idx].iter().sum()
}

/// 2×2 block Σ ∇_xG0(x, y_q) ⊗ wn_q as [b00, b01, b10, b11].
#[inline]
fn accumulate(x: Vec2, pts: &[QPoint], b: &mut [f64; 4]) {
    for p in pts {
        let dx = x[0] - p.y[0];
        let dy = x[1] - p.y[1];
        let s = -1.0 / (2.0 * PI * (dx * dx + dy * dy));
        let gx = dx * s;
        let gy = dy * s;
        b[0] += gx * p.wn[0];
        b[1] += gx * p.wn[1];
        b[2] += gy * p.wn[0];
        b[3] += gy * p.wn[1];
    }
}

fn near_block(x: Vec2, c: &Curve, depth: u32, b: &mut [f64; 4]) {
    let d = dist(x, c.midpoint());
    let size = c.size();
    if d > size || depth >= 12 {
        let pts = quad_points(c, 16);
        accumulate(x, &pts, b);
    } else {
        near_block(x, &c.split(0.0, 0.5), depth + 1, b);
        near_block(x, &c.split(0.5, 1.0), depth + 1, b);
    }
}

/// Precomputed edge quadrature for repeated application of M on one mesh.
#[derive(Debug, Clone)]
pub struct MagnetizationOperator {
    targets: Vec<Vec2>,
    edges: Vec<(usize, Option<usize>)>,
    curves: Vec<Curve>,
    quads: Vec<EdgeQuad>,
}

impl MagnetizationOperator {
    pub fn new(mesh: &ParticleMesh) -> Self {
        let quads = mesh
            .edges
            .iter()
            .map(|e| {
                let mut pts = Vec::with_capacity(ORDERS.iter().sum());
                for &n in &ORDERS {
                    pts.extend(quad_points(&e.curve, n));
                }
                EdgeQuad { mid: e.curve.midpoint(), size: e.curve.size(), pts }
            })
            .collect();
        Self {
            targets: mesh.cells.iter().map(|c| c.centroid).collect(),
            edges: mesh.edges.iter().map(|e| (e.inner, e.outer)).collect(),
            curves: mesh.edges.iter().map(|e| e.curve).collect(),
            quads,
        }
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    fn block(&self, x: Vec2, e: usize) -> [f64; 4] {
        let q = &self.quads[e];
        let mut b = [0.0; 4];
        match order_index(dist(x, q.mid), q.size) {
            Some(k) => {
                let o = offset(k);
                accumulate(x, &q.pts[o..o + ORDERS[k]], &mut b);
            }
            None => near_block(x, &self.curves[e], 0, &mut b),
        }
        b
    }

    /// Applies M to several piecewise-constant fields at once.
    pub fn apply_batch(&self, fields: &[Vec<Vec2>]) -> Vec<Vec<Vec2>> {
        let nf = fields.len();
        let n = self.len();
        for f in fields {
            assert_eq!(f.len(), n, "field length must match the cell count");
        }
        // jump of each field across each edge
        let jumps: Vec<Vec2> = self
            .edges
            .iter()
            .flat_map(|&(a, b)| {
                fields.iter().map(move |f| match b {
                    Some(b) => [f[a][0] - f[b][0], f[a][1] - f[b][1]],
                    None => f[a],
                })
            })
            .collect();
        // scalar charges for the one-point rule
        let c1: Vec<f64> = self
            .quads
            .iter()
            .enumerate()
            .flat_map(|(e, q)| {
                let wn = q.pts[0].wn;
                let jumps = &jumps;
                (0..nf).map(move |f| {
                    let j = jumps[e * nf + f];
                    wn[0] * j[0] + wn[1] * j[1]
                })
            })
            .collect();
        let mut out = vec![vec![[0.0; 2]; n]; nf];
        let mut acc = vec![[0.0f64; 2]; nf];
        for (i, &x) in self.targets.iter().enumerate() {
            acc.iter_mut().for_each(|a| *a = [0.0; 2]);
            for (e, q) in self.quads.iter().enumerate() {
                let dx = x[0] - q.mid[0];
                let dy = x[1] - q.mid[1];
                let d2 = dx * dx + dy * dy;
                if d2 > 256.0 * q.size * q.size {
                    let y = q.pts[0].y;
                    let dx = x[0] - y[0];
                    let dy = x[1] - y[1];
                    let s = -1.0 / (2.0 * PI * (dx * dx + dy * dy));
                    let (gx, gy) = (dx * s, dy * s);
                    let c = &c1[e * nf..(e + 1) * nf];
                    for (a, &cf) in acc.iter_mut().zip(c) {
                        a[0] += gx * cf;
                        a[1] += gy * cf;
                    }
                } else {
                    let b = self.block(x, e);
                    for (f, a) in acc.iter_mut().enumerate() {
                        let j = jumps[e * nf + f];
                        a[0] += b[0] * j[0] + b[1] * j[1];
                        a[1] += b[2] * j[0] + b[3] * j[1];
                    }
                }
            }
            for (f, a) in acc.iter().enumerate() {
                out[f][i] = *a;
            }
        }
        out
    }

    pub fn apply(&self, field: &[Vec2]) -> Vec<Vec2> {
        self.apply_batch(&[field.to_vec()]).pop().unwrap()
    }

    /// Dense 2N×2N matrix of M; unknown 2i + c is component c of cell i.
    pub fn assemble(&self) -> Mat<f64> {
        let n = self.len();
        let mut m = Mat::<f64>::zeros(2 * n, 2 * n);
        for (i, &x) in self.targets.iter().enumerate() {
            for (e, &(a, b)) in self.edges.iter().enumerate() {
                let blk = self.block(x, e);
                let mut add = |col: usize, s: f64| {
                    m[(2 * i, 2 * col)] += s * blk[0];
                    m[(2 * i, 2 * col + 1)] += s * blk[1];
                    m[(2 * i + 1, 2 * col)] += s * blk[2];
                    m[(2 * i + 1, 2 * col + 1)] += s * blk[3];
                };
                add(a, 1.0);
                if let Some(b) = b {
                    add(b, -1.0);
                }
            }
        }
        m
    }
}

/// M[F] at the cell centroids.
pub fn apply_magnetization(mesh: &ParticleMesh, field: &[Vec2]) -> Vec<Vec2> {
    MagnetizationOperator::new(mesh).apply(field)
}

/// Gradients of the harmonic polynomials Re ζ^m, Im ζ^m, ζ = (x − z)/δ,
/// m = 1..degree_max, sampled at cell centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicGradientBasis {
    pub degree_max: usize,
    pub fields: Vec<Vec<Vec2>>,
}

impl HarmonicGradientBasis {
    pub fn new(mesh: &ParticleMesh, degree_max: usize) -> Result<Self> {
        if degree_max < 1 {
            return Err(Error::DegenerateBasis("degree_max must be at least 1".into()));
        }
        let map = mesh.scale_map();
        let mut fields = Vec::with_capacity(2 * degree_max);
        for m in 1..=degree_max {
            let (re, im): (Vec<Vec2>, Vec<Vec2>) = mesh
                .cells
                .iter()
                .map(|c| {
                    let z = map.inverse(c.centroid);
                    let p = num_complex::Complex64::new(z[0], z[1]).powu(m as u32 - 1) * (m as f64 / mesh.delta);
                    ([p.re, -p.im], [p.im, p.re])
                })
                .unzip();
            fields.push(re);
            fields.push(im);
        }
        Ok(Self { degree_max, fields })
    }

    /// Harmonic-gradient field at an arbitrary point (for finite-difference checks).
    pub fn eval(&self, mesh: &ParticleMesh, index: usize, x: Vec2) -> Vec2 {
        let m = index / 2 + 1;
        let z = mesh.scale_map().inverse(x);
        let p = num_complex::Complex64::new(z[0], z[1]).powu(m as u32 - 1) * (m as f64 / mesh.delta);
        if index % 2 == 0 {
            [p.re, -p.im]
        } else {
            [p.im, p.re]
        }
    }
}

fn weighted_dot(mesh: &ParticleMesh, a: &[Vec2], b: &[Vec2]) -> f64 {
    mesh.cells.iter().zip(a.iter().zip(b)).map(|(c, (u, v))| c.area * (u[0] * v[0] + u[1] * v[1])).sum()
}

/// Galerkin projection of M onto the harmonic-gradient basis and its
/// eigen-decomposition.
pub fn eigs_magnetization_harmonic(mesh: &ParticleMesh, basis: &HarmonicGradientBasis) -> Result<EigenSystem> {
    eigs_magnetization_with(&MagnetizationOperator::new(mesh), mesh, basis)
}

pub fn eigs_magnetization_with(
    op: &MagnetizationOperator,
    mesh: &ParticleMesh,
    basis: &HarmonicGradientBasis,
) -> Result<EigenSystem> {
    let nb = basis.fields.len();
    let images = op.apply_batch(&basis.fields);
    let mut a = Mat::<f64>::zeros(nb, nb);
    let mut g = Mat::<f64>::zeros(nb, nb);
    for i in 0..nb {
        for j in 0..nb {
            g[(i, j)] = weighted_dot(mesh, &basis.fields[i], &basis.fields[j]);
            a[(i, j)] = weighted_dot(mesh, &basis.fields[i], &images[j]);
        }
    }
    for i in 0..nb {
        for j in 0..i {
            let s = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = s;
            a[(j, i)] = s;
        }
    }
    let llt = g.llt(Side::Lower).map_err(|e| Error::DegenerateBasis(format!("Gram matrix: {e:?}")))?;
    let l = llt.L().to_owned();
    let gmax = (0..nb).map(|i| g[(i, i)]).fold(0.0, f64::max);
    let lmin = (0..nb).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
    if lmin < 1e-12 * gmax {
        return Err(Error::DegenerateBasis("Gram matrix is numerically singular".into()));
    }
    // C = L^{-1} A L^{-T}
    let mut c = a.clone();
    l.as_ref().solve_lower_triangular_in_place(c.as_mut());
    let mut ct = c.transpose().to_owned();
    l.as_ref().solve_lower_triangular_in_place(ct.as_mut());
    let c = Mat::<f64>::from_fn(nb, nb, |i, j| 0.5 * (ct[(i, j)] + ct[(j, i)]));
    let evd = c.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Assembly(format!("{e:?}")))?;
    let s = evd.S();
    let u = evd.U();
    let lt = l.transpose().to_owned();
    let mut eigenvalues = Vec::with_capacity(nb);
    let mut eigenvectors = Vec::with_capacity(nb);
    let mut means = Vec::with_capacity(nb);
    for col in (0..nb).rev() {
        // coefficients solve L^T c = u
        let mut coef = Mat::<f64>::from_fn(nb, 1, |i, _| u[(i, col)]);
        lt.as_ref().solve_upper_triangular_in_place(coef.as_mut());
        let mut e = vec![[0.0; 2]; mesh.len()];
        for (k, f) in basis.fields.iter().enumerate() {
            let ck = coef[(k, 0)];
            for (ei, fi) in e.iter_mut().zip(f) {
                ei[0] += ck * fi[0];
                ei[1] += ck * fi[1];
            }
        }
        let mut mean = [0.0; 2];
        for (ei, cell) in e.iter().zip(&mesh.cells) {
            mean[0] += ei[0] * cell.area;
            mean[1] += ei[1] * cell.area;
        }
        let lead = if mean[0].abs() >= mean[1].abs() { mean[0] } else { mean[1] };
        if lead < 0.0 {
            e.iter_mut().for_each(|v| *v = [-v[0], -v[1]]);
            mean = [-mean[0], -mean[1]];
        }
        eigenvalues.push(s[col]);
        eigenvectors.push(Samples::Vector(e));
        means.push(Mean::Vector(mean));
    }
    Ok(EigenSystem { eigenvalues, eigenvectors, means, operator_tag: OperatorTag::Magnetization })
}

/// Top log-potential eigenvalue of Ω = z + δB normalised by δ²|log δ|.
pub fn normalized_log_eigenvalue(eig: &EigenSystem, delta: f64) -> f64 {
    eig.eigenvalues[0] / (delta * delta * delta.ln().abs())
}
