use nanoheat::geometry::*;
use proptest::prelude::*;
use std::f64::consts::PI;

#[test]
fn unit_disc_area_and_boundary() {
    let m = build_disc_mesh(1.0, [0.0, 0.0], 1000).unwrap();
    assert!((m.total_area() - PI).abs() < 5e-3 * PI);
    assert!((m.boundary_length() - 2.0 * PI).abs() < 5e-3 * 2.0 * PI);
    for b in &m.boundary {
        assert!((b.normal[0].hypot(b.normal[1]) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn area_weighted_centroid_is_centre() {
    let z = [0.3, -1.2];
    let d = 0.2;
    let m = build_disc_mesh(d, z, 1000).unwrap();
    let a = m.total_area();
    let cx: f64 = m.cells.iter().map(|c| c.centroid[0] * c.area).sum::<f64>() / a;
    let cy: f64 = m.cells.iter().map(|c| c.centroid[1] * c.area).sum::<f64>() / a;
    assert!(dist([cx, cy], z) < 1e-3 * d);
}

#[test]
fn ellipse_area_and_perimeter() {
    let shape = Shape::Ellipse { a: 2.0, b: 1.0 };
    let m = build_mesh(shape, 0.5, [0.0, 0.0], 2000).unwrap().with_boundary_nodes(512);
    assert!((m.total_area() - m.exact_area()).abs() < 5e-3 * m.exact_area());
    // Ramanujan's approximation, accurate far below the tolerance here.
    let (a, b) = (2.0f64, 1.0f64);
    let h = ((a - b) / (a + b)).powi(2);
    let p = PI * (a + b) * (1.0 + 3.0 * h / (10.0 + (4.0 - 3.0 * h).sqrt()));
    assert!((shape.perimeter() - p).abs() < 1e-6 * p);
    assert!((m.boundary_length() - 0.5 * p).abs() < 5e-3 * 0.5 * p);
}

#[test]
fn second_moment_quadrature_converges() {
    let exact = PI / 4.0;
    let err = |n| {
        let m = build_disc_mesh(1.0, [0.0, 0.0], n).unwrap();
        (m.cells.iter().map(|c| c.centroid[0].powi(2) * c.area).sum::<f64>() - exact).abs()
    };
    let (e1, e2) = (err(1000), err(4000));
    assert!(e2 * 2.0 <= e1, "{e1} {e2}");
}

#[test]
fn discrete_divergence_theorem() {
    for shape in [Shape::Disc, Shape::Ellipse { a: 2.0, b: 1.0 }] {
        let m = build_mesh(shape, 0.3, [0.1, 0.2], 1000).unwrap().with_boundary_nodes(256);
        let z = m.center_z;
        let flux: f64 = m
            .boundary
            .iter()
            .map(|b| ((b.node[0] - z[0]) * b.normal[0] + (b.node[1] - z[1]) * b.normal[1]) * b.arc_weight)
            .sum();
        assert!((flux - 2.0 * m.exact_area()).abs() < 0.01 * 2.0 * m.exact_area());
    }
}

#[test]
fn scaling_to_reference_domain() {
    let d = 0.05;
    let m = build_disc_mesh(d, [1.0, 2.0], 500).unwrap();
    let b = m.scale_to_b();
    assert!((b.total_area() - m.total_area() / (d * d)).abs() < 1e-12 * b.total_area());
    assert!((b.boundary_length() - m.boundary_length() / d).abs() < 1e-12 * b.boundary_length());
    let map = m.scale_map();
    for (c, cb) in m.cells.iter().zip(&b.cells) {
        let back = map.forward(cb.centroid);
        assert!(dist(back, c.centroid) < 1e-14);
    }
}

#[test]
fn invalid_inputs() {
    assert!(build_disc_mesh(0.0, [0.0, 0.0], 100).is_err());
    assert!(build_disc_mesh(0.1, [0.0, 0.0], 0).is_err());
    assert!(build_mesh(Shape::Ellipse { a: -1.0, b: 1.0 }, 0.1, [0.0, 0.0], 100).is_err());
}

#[test]
fn mesh_dump_has_schema_and_all_cells() {
    let m = build_disc_mesh(0.1, [0.0, 0.0], 100).unwrap();
    let csv = m.dump_csv();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# schema:"));
    assert_eq!(lines.next().unwrap(), "x,y,area");
    assert_eq!(lines.count(), m.len());
}

proptest! {
    #[test]
    fn cells_lie_inside_and_areas_are_positive(d in 0.01f64..2.0, zx in -3.0f64..3.0, n in 50usize..800) {
        let m = build_disc_mesh(d, [zx, 0.0], n).unwrap();
        for c in &m.cells {
            prop_assert!(c.area > 0.0);
            prop_assert!(dist(c.centroid, [zx, 0.0]) < d);
        }
        prop_assert!((m.total_area() - PI * d * d).abs() < 5e-3 * PI * d * d);
    }
}
