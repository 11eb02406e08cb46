//! Particle domain Ω = z + δB: polar cell mesh, edge list for the
//! cell-boundary form of the magnetization operator, and boundary nodes.

use crate::error::{Error, Result};
use std::f64::consts::PI;

pub type Vec2 = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Disc,
    /// Semi-axes of the reference domain B.
    Ellipse { a: f64, b: f64 },
}

impl Shape {
    pub fn axes(&self) -> (f64, f64) {
        match *self {
            Shape::Disc => (1.0, 1.0),
            Shape::Ellipse { a, b } => (a, b),
        }
    }

    /// Area of B.
    pub fn area(&self) -> f64 {
        let (a, b) = self.axes();
        PI * a * b
    }

    /// Perimeter of B (Gauss–Legendre on the parametrisation for ellipses).
    pub fn perimeter(&self) -> f64 {
        let (a, b) = self.axes();
        if a == b {
            return 2.0 * PI * a;
        }
        let r = crate::quad::rule(32);
        let mut s = 0.0;
        for p in 0..8 {
            let t0 = p as f64 * PI / 4.0;
            for (x, w) in r.nodes.iter().zip(&r.weights) {
                let t = t0 + PI / 8.0 * (1.0 + x);
                s += w * PI / 8.0 * (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt();
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub centroid: Vec2,
    pub area: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryNode {
    pub node: Vec2,
    pub normal: Vec2,
    pub arc_weight: f64,
}

/// Geometry of an edge between cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curve {
    Segment { p0: Vec2, p1: Vec2 },
    /// y(θ) = c + (ax cos θ, by sin θ), θ ∈ [t0, t1].
    Arc { c: Vec2, ax: f64, by: f64, t0: f64, t1: f64 },
}

impl Curve {
    /// Point and normal·ds/dp at the local parameter p ∈ [0, 1]. The normal
    /// points to the right of the direction of travel.
    #[inline]
    pub fn eval(&self, p: f64) -> (Vec2, Vec2) {
        match *self {
            Curve::Segment { p0, p1 } => {
                let t = [p1[0] - p0[0], p1[1] - p0[1]];
                ([p0[0] + p * t[0], p0[1] + p * t[1]], [t[1], -t[0]])
            }
            Curve::Arc { c, ax, by, t0, t1 } => {
                let th = t0 + p * (t1 - t0);
                let (s, co) = th.sin_cos();
                let dt = t1 - t0;
                ([c[0] + ax * co, c[1] + by * s], [by * co * dt, ax * s * dt])
            }
        }
    }

    pub fn split(&self, p0: f64, p1: f64) -> Curve {
        match *self {
            Curve::Segment { .. } => Curve::Segment { p0: self.eval(p0).0, p1: self.eval(p1).0 },
            Curve::Arc { c, ax, by, t0, t1 } => {
                Curve::Arc { c, ax, by, t0: t0 + p0 * (t1 - t0), t1: t0 + p1 * (t1 - t0) }
            }
        }
    }

    pub fn midpoint(&self) -> Vec2 {
        self.eval(0.5).0
    }

    /// Chord length as a size proxy.
    pub fn size(&self) -> f64 {
        let (a, _) = self.eval(0.0);
        let (b, _) = self.eval(1.0);
        let (m, _) = self.eval(0.5);
        dist(a, m) + dist(m, b)
    }
}

/// An interface between two cells, or between a cell and the exterior.
/// The curve normal is outward for `inner` and inward for `outer`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub curve: Curve,
    pub inner: usize,
    pub outer: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleMap {
    pub delta: f64,
    pub center_z: Vec2,
}

impl ScaleMap {
    pub fn forward(&self, xi: Vec2) -> Vec2 {
        [self.delta * xi[0] + self.center_z[0], self.delta * xi[1] + self.center_z[1]]
    }

    pub fn inverse(&self, x: Vec2) -> Vec2 {
        [(x[0] - self.center_z[0]) / self.delta, (x[1] - self.center_z[1]) / self.delta]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleMesh {
    pub delta: f64,
    pub center_z: Vec2,
    pub shape: Shape,
    pub rings: usize,
    pub cells: Vec<Cell>,
    pub edges: Vec<Edge>,
    pub boundary: Vec<BoundaryNode>,
    /// Index of the first cell of each ring (ring 0 is the innermost).
    pub ring_start: Vec<usize>,
}

#[inline]
pub fn dist(a: Vec2, b: Vec2) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn sectors(ring: usize) -> usize {
    4 * (2 * ring + 1)
}

/// Default number of boundary nodes for a mesh with `rings` rings.
pub fn default_boundary_nodes(rings: usize) -> usize {
    (8 * rings).max(64)
}

/// Disc mesh of Ω = z + δB with about `target_cells` equal-area polar cells.
pub fn build_disc_mesh(delta: f64, z: Vec2, target_cells: usize) -> Result<ParticleMesh> {
    build_mesh(Shape::Disc, delta, z, target_cells)
}

/// Polar mesh of the reference disc mapped by (u, v) ↦ z + δ(a u, b v).
///
/// Ring k (k = 0..R-1) spans radii [k/R, (k+1)/R] with 4(2k+1) sectors, so
/// every cell has area π ab δ² / (4R²).
pub fn build_mesh(shape: Shape, delta: f64, z: Vec2, target_cells: usize) -> Result<ParticleMesh> {
    if target_cells < 16 {
        return Err(Error::Mesh(format!("target_cells = {target_cells} is below the minimum of 16")));
    }
    if !(delta > 0.0) {
        return Err(Error::Mesh(format!("delta must be positive, got {delta}")));
    }
    let (a, b) = shape.axes();
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Mesh("ellipse semi-axes must be positive".into()));
    }
    let rings = ((target_cells as f64 / 4.0).sqrt().round() as usize).max(2);
    let rf = rings as f64;
    let map = |u: f64, v: f64| -> Vec2 { [z[0] + delta * a * u, z[1] + delta * b * v] };
    let cell_area = PI * a * b * delta * delta / (4.0 * rf * rf);

    let mut cells = Vec::with_capacity(4 * rings * rings);
    let mut ring_start = Vec::with_capacity(rings + 1);
    for k in 0..rings {
        ring_start.push(cells.len());
        let n = sectors(k);
        let (r0, r1) = (k as f64 / rf, (k + 1) as f64 / rf);
        let dth = 2.0 * PI / n as f64;
        let rc = 2.0 / 3.0 * (r1.powi(3) - r0.powi(3)) / (r1 * r1 - r0 * r0) * (0.5 * dth).sin() / (0.5 * dth);
        for j in 0..n {
            let th = (j as f64 + 0.5) * dth;
            cells.push(Cell { centroid: map(rc * th.cos(), rc * th.sin()), area: cell_area });
        }
    }
    ring_start.push(cells.len());

    let mut edges = Vec::new();
    let arc = |r: f64, t0: f64, t1: f64| Curve::Arc { c: z, ax: delta * a * r, by: delta * b * r, t0, t1 };
    for k in 0..rings {
        let n = sectors(k);
        let (r0, r1) = (k as f64 / rf, (k + 1) as f64 / rf);
        let dth = 2.0 * PI / n as f64;
        // radial edges: the edge at angle θ_j separates sector j-1 (inner side) from sector j
        for j in 0..n {
            let th = j as f64 * dth;
            let (s, c) = th.sin_cos();
            // travelling inward puts the right-hand normal along increasing θ,
            // outward for sector j-1
            let curve = Curve::Segment { p0: map(r1 * c, r1 * s), p1: map(r0 * c, r0 * s) };
            let below = ring_start[k] + (j + n - 1) % n;
            let above = ring_start[k] + j;
            edges.push(Edge { curve, inner: below, outer: Some(above) });
        }
        // arcs on the outer radius of ring k
        if k + 1 < rings {
            let m = sectors(k + 1);
            let mut cuts: Vec<f64> = (0..=n).map(|j| j as f64 / n as f64).chain((0..=m).map(|j| j as f64 / m as f64)).collect();
            cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
            cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
            for w in cuts.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                let inner = ring_start[k] + ((mid * n as f64) as usize).min(n - 1);
                let outer = ring_start[k + 1] + ((mid * m as f64) as usize).min(m - 1);
                edges.push(Edge { curve: arc(r1, 2.0 * PI * w[0], 2.0 * PI * w[1]), inner, outer: Some(outer) });
            }
        } else {
            for j in 0..n {
                edges.push(Edge {
                    curve: arc(r1, j as f64 * dth, (j + 1) as f64 * dth),
                    inner: ring_start[k] + j,
                    outer: None,
                });
            }
        }
    }

    let boundary = boundary_nodes(shape, delta, z, default_boundary_nodes(rings));
    Ok(ParticleMesh { delta, center_z: z, shape, rings, cells, edges, boundary, ring_start })
}

/// Boundary nodes equispaced in the parameter of z + δ(a cos θ, b sin θ) with
/// trapezoid arc weights.
pub fn boundary_nodes(shape: Shape, delta: f64, z: Vec2, count: usize) -> Vec<BoundaryNode> {
    let (a, b) = shape.axes();
    (0..count)
        .map(|i| {
            let th = 2.0 * PI * i as f64 / count as f64;
            let (s, c) = th.sin_cos();
            let n = [b * c, a * s];
            let nn = (n[0] * n[0] + n[1] * n[1]).sqrt();
            BoundaryNode {
                node: [z[0] + delta * a * c, z[1] + delta * b * s],
                normal: [n[0] / nn, n[1] / nn],
                arc_weight: delta * nn * 2.0 * PI / count as f64,
            }
        })
        .collect()
}

impl ParticleMesh {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn scale_map(&self) -> ScaleMap {
        ScaleMap { delta: self.delta, center_z: self.center_z }
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }

    pub fn exact_area(&self) -> f64 {
        self.shape.area() * self.delta * self.delta
    }

    pub fn boundary_length(&self) -> f64 {
        self.boundary.iter().map(|b| b.arc_weight).sum()
    }

    pub fn areas(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.area).collect()
    }

    pub fn with_boundary_nodes(mut self, count: usize) -> Self {
        self.boundary = boundary_nodes(self.shape, self.delta, self.center_z, count);
        self
    }

    /// Mesh of B: δ = 1 and centre at the origin.
    pub fn scale_to_b(&self) -> ParticleMesh {
        let m = self.scale_map();
        let d = self.delta;
        let pt = |p: Vec2| m.inverse(p);
        let curve = |c: Curve| match c {
            Curve::Segment { p0, p1 } => Curve::Segment { p0: pt(p0), p1: pt(p1) },
            Curve::Arc { c, ax, by, t0, t1 } => Curve::Arc { c: pt(c), ax: ax / d, by: by / d, t0, t1 },
        };
        ParticleMesh {
            delta: 1.0,
            center_z: [0.0, 0.0],
            shape: self.shape,
            rings: self.rings,
            cells: self.cells.iter().map(|c| Cell { centroid: pt(c.centroid), area: c.area / (d * d) }).collect(),
            edges: self.edges.iter().map(|e| Edge { curve: curve(e.curve), ..*e }).collect(),
            boundary: self
                .boundary
                .iter()
                .map(|b| BoundaryNode { node: pt(b.node), normal: b.normal, arc_weight: b.arc_weight / d })
                .collect(),
            ring_start: self.ring_start.clone(),
        }
    }

    /// Multiplies values by δ^exponent.
    pub fn scale_field(&self, values: &[f64], exponent: f64) -> Vec<f64> {
        let f = self.delta.powf(exponent);
        values.iter().map(|v| v * f).collect()
    }

    /// Cell centroid and area as CSV with a schema line.
    pub fn dump_csv(&self) -> String {
        let mut s = String::from("# schema: nanoheat.mesh.v1\nx,y,area\n");
        for c in &self.cells {
            s.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", c.centroid[0], c.centroid[1], c.area));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_cell_is_closed_by_its_edges() {
        // Σ over the boundary of each cell of n ds must vanish.
        let m = build_mesh(Shape::Ellipse { a: 2.0, b: 1.0 }, 0.3, [0.1, -0.2], 400).unwrap();
        let mut acc = vec![[0.0f64; 2]; m.len()];
        let r = crate::quad::rule(16);
        for e in &m.edges {
            let mut v = [0.0; 2];
            for (x, w) in r.nodes.iter().zip(&r.weights) {
                let (_, n) = e.curve.eval(0.5 * (1.0 + x));
                v[0] += 0.5 * w * n[0];
                v[1] += 0.5 * w * n[1];
            }
            acc[e.inner][0] += v[0];
            acc[e.inner][1] += v[1];
            if let Some(o) = e.outer {
                acc[o][0] -= v[0];
                acc[o][1] -= v[1];
            }
        }
        for a in acc {
            assert!(a[0].abs() < 1e-12 && a[1].abs() < 1e-12, "{a:?}");
        }
    }

    #[test]
    fn divergence_of_position_gives_cell_area() {
        // ∮ x·n ds = 2|cell| for each cell.
        let m = build_disc_mesh(1.0, [0.0, 0.0], 100).unwrap();
        let mut acc = vec![0.0f64; m.len()];
        let r = crate::quad::rule(16);
        for e in &m.edges {
            let mut v = 0.0;
            for (x, w) in r.nodes.iter().zip(&r.weights) {
                let (p, n) = e.curve.eval(0.5 * (1.0 + x));
                v += 0.5 * w * (p[0] * n[0] + p[1] * n[1]);
            }
            acc[e.inner] += v;
            if let Some(o) = e.outer {
                acc[o] -= v;
            }
        }
        for (i, a) in acc.iter().enumerate() {
            assert!((a - 2.0 * m.cells[i].area).abs() < 1e-12);
        }
    }
}
