use faer::Mat;
use nanoheat::geometry::*;
use nanoheat::spectral::*;
use proptest::prelude::*;

fn weighted_dot(mesh: &ParticleMesh, a: &[Vec2], b: &[Vec2]) -> f64 {
    mesh.cells.iter().zip(a.iter().zip(b)).map(|(c, (u, v))| c.area * (u[0] * v[0] + u[1] * v[1])).sum()
}

#[test]
fn constant_density_at_centre() {
    let m = build_disc_mesh(1.0, [0.0, 0.0], 4000).unwrap();
    let v = log_potential_at(&m, &vec![1.0; m.len()], [0.0, 0.0]);
    assert!((v - 0.25).abs() < 2e-3, "{v}");
}

#[test]
fn eigs_trivial_matrices() {
    let d = Mat::<f64>::from_fn(2, 2, |i, j| if i == j { [3.0, 1.0][i] } else { 0.0 });
    let e = eigs(&d, &[1.0, 1.0]).unwrap();
    assert!((e.eigenvalues[0] - 3.0).abs() < 1e-14 && (e.eigenvalues[1] - 1.0).abs() < 1e-14);
    let id = Mat::<f64>::identity(5, 5);
    let e = eigs(&id, &[1.0; 5]).unwrap();
    assert!(e.eigenvalues.iter().all(|l| (l - 1.0).abs() < 1e-14));
}

#[test]
fn eigs_rejects_bad_input() {
    let a = Mat::<f64>::from_fn(2, 2, |i, j| (i + 2 * j) as f64);
    assert!(eigs(&a, &[1.0, 1.0]).is_err());
    assert!(eigs(&Mat::<f64>::identity(2, 2), &[1.0]).is_err());
}

#[test]
fn top_log_eigenpair_matches_power_iteration() {
    let m = build_disc_mesh(0.1, [0.0, 0.0], 500).unwrap();
    let a = assemble_log_potential(&m).unwrap();
    let e = eigs(&a, &m.areas()).unwrap();
    let (l, _) = power_iteration(&a, 5000);
    assert!((l - e.eigenvalues[0]).abs() < 1e-8 * e.eigenvalues[0]);
}

#[test]
fn log_eigenvectors_are_orthonormal_and_positive() {
    for d in [0.5, 0.1] {
        let m = build_disc_mesh(d, [0.2, 0.0], 300).unwrap();
        let e = eigs(&assemble_log_potential(&m).unwrap(), &m.areas()).unwrap();
        assert!(e.eigenvalues.iter().all(|l| *l > 0.0));
        let vecs: Vec<&Vec<f64>> = e
            .eigenvectors
            .iter()
            .map(|s| match s {
                Samples::Scalar(v) => v,
                _ => panic!("scalar eigenvectors expected"),
            })
            .collect();
        for i in 0..6 {
            for j in 0..6 {
                let g: f64 = m.cells.iter().enumerate().map(|(k, c)| c.area * vecs[i][k] * vecs[j][k]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn first_log_eigenfunction_has_a_mean() {
    let m = build_disc_mesh(0.1, [0.0, 0.0], 400).unwrap();
    let e = eigs(&assemble_log_potential(&m).unwrap(), &m.areas()).unwrap();
    let mean = e.means[0].norm_sq().sqrt();
    assert!(mean > 0.1 * m.total_area().sqrt());
}

#[test]
fn log_eigenvalue_self_convergence() {
    let top = |n| {
        let m = build_disc_mesh(0.1, [0.0, 0.0], n).unwrap();
        power_iteration(&assemble_log_potential(&m).unwrap(), 5000).0
    };
    let l: Vec<f64> = [100, 400, 1600].iter().map(|&n| top(n)).collect();
    assert!((l[1] - l[2]).abs() < (l[0] - l[1]).abs(), "{l:?}");
}

#[test]
fn constant_field_is_halved_in_the_interior() {
    let m = build_disc_mesh(1.0, [0.0, 0.0], 8000).unwrap();
    let out = apply_magnetization(&m, &vec![[1.0, 0.0]; m.len()]);
    let cell = (std::f64::consts::PI / m.len() as f64).sqrt() * 2.0;
    let mut worst: f64 = 0.0;
    for (c, v) in m.cells.iter().zip(&out) {
        if dist(c.centroid, [0.0, 0.0]) < 1.0 - 3.0 * cell {
            worst = worst.max(((v[0] - 0.5).powi(2) + v[1].powi(2)).sqrt() / 0.5);
        }
    }
    assert!(worst <= 0.02, "{worst}");
}

#[test]
fn disc_harmonic_spectrum() {
    let m = build_disc_mesh(0.1, [0.0, 0.0], 2000).unwrap();
    let e = eigs_magnetization_harmonic(&m, &HarmonicGradientBasis::new(&m, 4).unwrap()).unwrap();
    assert_eq!(e.len(), 8);
    for l in &e.eigenvalues {
        assert!((l - 0.5).abs() < 0.01 && *l >= -1e-6 && *l <= 1.0 + 1e-6);
    }
}

#[test]
fn ellipse_depolarization_sum() {
    let m = build_mesh(Shape::Ellipse { a: 2.0, b: 1.0 }, 0.1, [0.0, 0.0], 2000).unwrap();
    let e = eigs_magnetization_harmonic(&m, &HarmonicGradientBasis::new(&m, 4).unwrap()).unwrap();
    let mut idx: Vec<usize> = (0..e.len()).collect();
    idx.sort_by(|&a, &b| e.means[b].norm_sq().total_cmp(&e.means[a].norm_sq()));
    let (l1, l2) = (e.eigenvalues[idx[0]], e.eigenvalues[idx[1]]);
    assert!((l1 - l2).abs() > 0.1);
    assert!((l1 + l2 - 1.0).abs() < 0.02, "{l1} {l2}");
    assert!(e.eigenvalues.iter().all(|l| *l >= -1e-6 && *l <= 1.0 + 1e-6));
}

#[test]
fn rotated_gradients_have_zero_mean() {
    let m = build_disc_mesh(1.0, [0.0, 0.0], 4000).unwrap();
    // psi = (1 - r^2)(1 + x + y^2) vanishes on the boundary; F = rot grad psi.
    let f: Vec<Vec2> = m
        .cells
        .iter()
        .map(|c| {
            let [x, y] = c.centroid;
            let g = 1.0 + x + y * y;
            let px = -2.0 * x * g + (1.0 - x * x - y * y);
            let py = -2.0 * y * g + (1.0 - x * x - y * y) * 2.0 * y;
            [-py, px]
        })
        .collect();
    let mean = [0usize, 1].map(|k| m.cells.iter().zip(&f).map(|(c, v)| c.area * v[k]).sum::<f64>());
    let norm = weighted_dot(&m, &f, &f).sqrt() * m.total_area().sqrt();
    assert!(mean[0].hypot(mean[1]) <= 0.01 * norm);
}

#[test]
fn magnetization_is_linear_and_symmetric_on_harmonic_gradients() {
    let m = build_disc_mesh(0.2, [0.0, 0.0], 800).unwrap();
    let op = MagnetizationOperator::new(&m);
    let b = HarmonicGradientBasis::new(&m, 3).unwrap();
    let comb = |c: &[f64]| -> Vec<Vec2> {
        (0..m.len())
            .map(|i| {
                let mut v = [0.0; 2];
                for (k, ck) in c.iter().enumerate() {
                    v[0] += ck * b.fields[k][i][0];
                    v[1] += ck * b.fields[k][i][1];
                }
                v
            })
            .collect()
    };
    let f = comb(&[1.0, -0.5, 0.3, 0.2, -0.7, 0.1]);
    let g = comb(&[0.2, 0.9, -0.4, 0.6, 0.05, -0.3]);
    let (mf, mg) = (op.apply(&f), op.apply(&g));
    let sum: Vec<Vec2> = f.iter().zip(&g).map(|(a, b)| [2.0 * a[0] - 3.0 * b[0], 2.0 * a[1] - 3.0 * b[1]]).collect();
    let msum = op.apply(&sum);
    let scale = mf.iter().chain(&mg).map(|v| v[0].abs().max(v[1].abs())).fold(0.0, f64::max);
    for i in 0..m.len() {
        for k in 0..2 {
            assert!((msum[i][k] - (2.0 * mf[i][k] - 3.0 * mg[i][k])).abs() <= 1e-12 * scale);
        }
    }
    let asym = (weighted_dot(&m, &mf, &g) - weighted_dot(&m, &f, &mg)).abs();
    let norms = weighted_dot(&m, &f, &f).sqrt() * weighted_dot(&m, &g, &g).sqrt();
    assert!(asym <= 1e-6 * norms, "{}", asym / norms);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn log_potential_is_positive_definite(d in 0.01f64..0.6, n in 30usize..200) {
        let m = build_disc_mesh(d, [0.0, 0.0], n).unwrap();
        let e = eigs(&assemble_log_potential(&m).unwrap(), &m.areas()).unwrap();
        prop_assert!(e.eigenvalues.iter().all(|l| *l > 0.0));
    }
}
