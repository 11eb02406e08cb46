use nanoheat::geometry::*;
use nanoheat::heatkernels::*;
use nanoheat::specfun::EULER_GAMMA;
use proptest::prelude::*;
use std::f64::consts::PI;

fn ops(n: usize) -> (CircleHeatOperators, CircleBoundary, TimeGrid) {
    let params = HeatKernelParams::new(1.0, KernelRole::Interior).unwrap();
    let circle = CircleBoundary::new([0.0, 0.0], 1.0, n).unwrap();
    let grid = TimeGrid::new(1.0, n).unwrap();
    (CircleHeatOperators::new(params, circle, grid), circle, grid)
}

fn smooth(circle: CircleBoundary, grid: TimeGrid, n: usize) -> SpaceTimeDensity {
    SpaceTimeDensity::from_fn(n, grid, |i, t| circle.angle(i).cos() * (PI * t).sin())
}

fn max_abs(d: &SpaceTimeDensity, levels: usize, nodes: usize) -> f64 {
    (0..levels).flat_map(|n| (0..nodes).map(move |i| (n, i))).map(|(n, i)| d.get(n, i).abs()).fold(0.0, f64::max)
}

#[test]
fn kernel_vanishes_before_source_time() {
    assert_eq!(heat_kernel(1.0, [0.1, 0.0], 0.5, [0.0, 0.0], 0.5), 0.0);
    assert_eq!(heat_kernel(1.0, [0.1, 0.0], 0.2, [0.0, 0.0], 0.5), 0.0);
    assert_eq!(heat_kernel_dt(1.0, [0.1, 0.0], 0.2, [0.0, 0.0], 0.5), 0.0);
}

#[test]
fn kernel_has_unit_mass() {
    for (a, t) in [(1.0, 1.0), (3.0, 0.2), (0.5, 4.0), (10.0, 1e-3)] {
        assert!((spatial_mass(a, t) - 1.0).abs() <= 1e-8);
    }
}

#[test]
fn kernel_solves_the_heat_equation() {
    let (a, x, t) = (1.0, [1.0, 0.0], 0.5);
    let h = 1e-3;
    let k = |p: Vec2, s: f64| heat_kernel(a, p, s, [0.0, 0.0], 0.0);
    let dt = (k(x, t + h) - k(x, t - h)) / (2.0 * h);
    let lap = (k([x[0] + h, x[1]], t) + k([x[0] - h, x[1]], t) + k([x[0], x[1] + h], t) + k([x[0], x[1] - h], t)
        - 4.0 * k(x, t))
        / (h * h);
    assert!((a * dt - lap).abs() <= 1e-6 * k(x, t).max(1.0));
    assert!((heat_kernel_dt(a, x, t, [0.0, 0.0], 0.0) - dt).abs() < 1e-6);
}

#[test]
fn time_integral_matches_quadrature() {
    let q = time_integral_quadrature(1.0, 1.0, 1.0);
    assert!((time_integral_point(1.0, 1.0, 1.0).unwrap() - q).abs() <= 1e-9 * q);
}

#[test]
fn time_integral_small_argument_form() {
    let (a, t) = (2.0, 0.5);
    let r = (1e-6 * 4.0 * t / a as f64).sqrt();
    let diff = time_integral_point(a, r, t).unwrap() - time_integral_log_form(a, r, t);
    assert!((diff / (a / (4.0 * PI))).abs() <= 2e-6);
    let l = time_integral_log_form(a, r, t) * 4.0 * PI / a;
    assert!((l + EULER_GAMMA + (a * r * r / (4.0 * t)).ln()).abs() < 1e-12);
}

#[test]
fn time_integral_decreases_with_distance() {
    let v: Vec<f64> = [0.01, 0.05, 0.1, 0.5, 1.0, 3.0].iter().map(|&r| time_integral_point(1.5, r, 0.7).unwrap()).collect();
    assert!(v.windows(2).all(|w| w[1] < w[0]));
    assert!(time_integral_point(1.0, 0.0, 1.0).is_err());
    assert!(time_integral_point(1.0, 1.0, 0.0).is_err());
}

#[test]
fn kr_diagnostic_domain() {
    assert!((kr_diagnostic(0.25, 1.0).unwrap() - 2.0).abs() < 1e-15);
    assert!(kr_diagnostic(0.5, 1.0).is_err());
    assert!(kr_diagnostic(0.7, 1.0).is_err());
}

#[test]
fn zero_density_gives_zero() {
    let (o, _, grid) = ops(32);
    let z = SpaceTimeDensity::zeros(32, grid);
    for k in [LayerKind::S, LayerKind::K, LayerKind::Kstar, LayerKind::H] {
        assert_eq!(max_abs(&o.apply(k, &z).unwrap(), grid.levels(), 32), 0.0);
    }
    assert_eq!(o.calderon_residual(&z).unwrap(), 0.0);
}

#[test]
fn single_layer_of_constant_is_constant_in_space() {
    let (o, _, grid) = ops(64);
    let c = SpaceTimeDensity::from_fn(64, grid, |_, t| 1.0 + t);
    let s = o.apply(LayerKind::S, &c).unwrap();
    for n in 0..grid.levels() {
        let l = s.level(n);
        let dev = l.iter().map(|v| (v - l[0]).abs()).fold(0.0, f64::max);
        assert!(dev <= 1e-8 * l[0].abs().max(1e-300), "level {n}: {dev}");
    }
}

#[test]
fn layer_operators_are_linear() {
    let (o, circle, grid) = ops(32);
    let a = smooth(circle, grid, 32);
    let b = SpaceTimeDensity::from_fn(32, grid, |i, t| (2.0 * circle.angle(i)).sin() * t * t);
    let ab = SpaceTimeDensity::from_fn(32, grid, |i, t| 2.0 * a_val(circle, i, t) - 0.5 * (2.0 * circle.angle(i)).sin() * t * t);
    fn a_val(c: CircleBoundary, i: usize, t: f64) -> f64 {
        c.angle(i).cos() * (PI * t).sin()
    }
    for k in [LayerKind::S, LayerKind::K, LayerKind::Kstar, LayerKind::H] {
        let (ra, rb, rab) = (o.apply(k, &a).unwrap(), o.apply(k, &b).unwrap(), o.apply(k, &ab).unwrap());
        let scale = max_abs(&ra, grid.levels(), 32).max(max_abs(&rb, grid.levels(), 32));
        for n in 0..grid.levels() {
            for i in 0..32 {
                assert!((rab.get(n, i) - (2.0 * ra.get(n, i) - 0.5 * rb.get(n, i))).abs() <= 1e-12 * scale);
            }
        }
    }
}

#[test]
fn layer_operators_are_causal() {
    let (o, circle, grid) = ops(32);
    let a = smooth(circle, grid, 32);
    let mut b = a.clone();
    let cut = 20;
    for n in cut..grid.levels() {
        b.level_mut(n).iter_mut().for_each(|v| *v += 3.0);
    }
    for k in [LayerKind::S, LayerKind::K, LayerKind::Kstar, LayerKind::H] {
        let (ra, rb) = (o.apply(k, &a).unwrap(), o.apply(k, &b).unwrap());
        for n in 0..cut {
            assert_eq!(ra.level(n), rb.level(n), "{k:?} level {n}");
        }
    }
}

#[test]
fn calderon_residual_decreases() {
    let r: Vec<f64> = [64, 128]
        .iter()
        .map(|&n| {
            let (o, c, g) = ops(n);
            o.calderon_residual(&smooth(c, g, n)).unwrap()
        })
        .collect();
    assert!(r[1] < r[0] && r[1] <= 0.10, "{r:?}");
}

#[test]
fn calderon_residual_is_rotation_invariant() {
    let n = 64;
    let (o, c, g) = ops(n);
    let shift = 5;
    let a = smooth(c, g, n);
    let b = SpaceTimeDensity::from_fn(n, g, |i, t| c.angle((i + shift) % n).cos() * (PI * t).sin());
    let (ra, rb) = (o.calderon_residual(&a).unwrap(), o.calderon_residual(&b).unwrap());
    assert!((ra - rb).abs() <= 1e-10 * ra);
}

#[test]
fn double_layer_jump_is_the_density() {
    let n = 64;
    let (o, c, g) = ops(n);
    let rep = double_layer_jump(&o, &smooth(c, g, n), 2, &[n / 2, n], 16).unwrap();
    assert!(rep.max_rel_error <= 0.03, "{}", rep.max_rel_error);
}

#[test]
fn neumann_poincare_ellipse_constant_density() {
    let m = build_mesh(Shape::Ellipse { a: 2.0, b: 1.0 }, 0.4, [0.5, 0.0], 200).unwrap().with_boundary_nodes(512);
    let v = np_laplace_apply(&m, &[1.0; 512]).unwrap();
    assert!(v.iter().all(|x| (x + 0.5).abs() <= 0.005 * 0.5));
}

#[test]
fn neumann_poincare_shape_mismatch() {
    let m = build_disc_mesh(0.4, [0.0, 0.0], 100).unwrap().with_boundary_nodes(64);
    assert!(np_laplace_apply(&m, &[1.0; 10]).is_err());
}

#[test]
fn kernel_difference_vanishes_with_distance() {
    let rep = kernel_difference_check(1.0, 1.0, 0.5, 0.5, 0.1, &[0.1, 0.2, 0.3, 0.4]);
    assert!(rep.bounded);
    assert!(rep.max_differences.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(kernel_difference_phi(1.0, 0.1, 0.0, |_| 1.0), 0.0);
}

#[test]
fn singular_bounds_hold() {
    let rep = singular_bound_check(1.0, 0.25, 100).unwrap();
    assert!(rep.passed && rep.max_value <= rep.c_value * 1.01 && rep.max_dt <= rep.c_dt * 1.01);
    assert!(singular_bound_check(1.0, 0.5, 10).is_err());
}

#[test]
fn kernel_underflows_as_time_gap_closes() {
    assert_eq!(heat_kernel(1.0, [0.5, 0.0], 1e-5, [0.0, 0.0], 0.0), 0.0);
}

#[test]
fn volume_potential_is_causal_in_the_source() {
    let m = build_disc_mesh(0.1, [0.0, 0.0], 60).unwrap();
    let g = TimeGrid::new(1.0, 20).unwrap();
    let f = SpaceTimeDensity::from_fn(m.len(), g, |_, t| if t < 0.5 { 1.0 } else { 0.0 });
    let f2 = SpaceTimeDensity::from_fn(m.len(), g, |_, t| if t < 0.5 { 1.0 } else { 5.0 });
    let x = [[0.3, 0.0]];
    let (a, b) = (volume_potential(1.0, &m, &f, &x).unwrap(), volume_potential(1.0, &m, &f2, &x).unwrap());
    for n in 0..10 {
        assert_eq!(a[0][n], b[0][n]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn neumann_poincare_circle_constant(rad in 0.05f64..3.0, cx in -2.0f64..2.0, nodes in 16usize..300) {
        let m = build_disc_mesh(rad, [cx, 0.3], 50).unwrap().with_boundary_nodes(nodes);
        let v = np_laplace_apply(&m, &vec![1.0; nodes]).unwrap();
        prop_assert!(v.iter().all(|x| (x + 0.5).abs() <= 1e-10));
    }

    #[test]
    fn neumann_poincare_linear(s in -3.0f64..3.0) {
        let m = build_mesh(Shape::Ellipse { a: 1.5, b: 1.0 }, 0.3, [0.0, 0.0], 50).unwrap().with_boundary_nodes(64);
        let a: Vec<f64> = (0..64).map(|i| (i as f64 * 0.3).sin()).collect();
        let b: Vec<f64> = (0..64).map(|i| (i as f64 * 0.7).cos()).collect();
        let ab: Vec<f64> = a.iter().zip(&b).map(|(x, y)| s * x + y).collect();
        let (ra, rb, rab) = (np_laplace_apply(&m, &a).unwrap(), np_laplace_apply(&m, &b).unwrap(), np_laplace_apply(&m, &ab).unwrap());
        for i in 0..64 {
            prop_assert!((rab[i] - (s * ra[i] + rb[i])).abs() <= 1e-14 * (1.0 + s.abs()) * 64.0);
        }
    }

    #[test]
    fn time_integral_matches_oracle(r in 0.01f64..2.0, t in 0.05f64..3.0, a in 0.2f64..5.0) {
        let q = time_integral_quadrature(a, r, t);
        prop_assert!((time_integral_point(a, r, t).unwrap() - q).abs() <= 1e-9 * q);
    }
}
