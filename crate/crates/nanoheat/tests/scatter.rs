use nanoheat::config::{dielectric_material, ExperimentConfig};
use nanoheat::geometry::*;
use nanoheat::material::*;
use nanoheat::pipeline::scatter_point;
use nanoheat::scatter::*;
use num_complex::Complex64;

fn medium() -> HostMedium {
    HostMedium::new(1.0, 0.1, 1.0, 1.0, 1.0).unwrap()
}

fn wave(dir: Vec2) -> IncidentWave {
    IncidentWave::new(2.0, dir, &medium()).unwrap()
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    sxy / lx.iter().map(|x| (x - mx).powi(2)).sum::<f64>()
}

#[test]
fn zero_contrast_returns_incident_field() {
    let m = build_disc_mesh(0.1, [0.0, 0.0], 200).unwrap();
    let w = wave([1.0, 0.0]);
    let tm = solve_tm(&m, Complex64::new(0.0, 0.0), &w).unwrap();
    assert_eq!(tm.field, tm_incident(&m, &w));
    let te = solve_te(&m, Complex64::new(0.0, 0.0), &w, 0.1).unwrap();
    assert_eq!(te.field, te_incident(&m, &w));
}

#[test]
fn born_error_is_quadratic_in_contrast() {
    let m = build_disc_mesh(0.1, [0.0, 0.0], 300).unwrap();
    let w = wave([0.6, 0.8]);
    let op = tm_operator(&m, w.k);
    let inc = tm_incident(&m, &w);
    let amps = [1e-3, 1e-2, 1e-1];
    let errs: Vec<f64> = amps
        .iter()
        .map(|&a| {
            let alpha = Complex64::new(a, 0.3 * a);
            let sol = solve_tm_with(&m, &op, alpha, &w).unwrap();
            field_distance(&m, &sol.field, &born(&op, alpha, &inc))
        })
        .collect();
    assert!((slope(&amps, &errs) - 2.0).abs() < 0.2, "{errs:?}");
}

#[test]
fn residual_and_energy_consistency() {
    let m = build_disc_mesh(0.05, [0.3, 0.1], 400).unwrap();
    let w = wave([1.0, 0.0]);
    for sol in [
        solve_tm(&m, Complex64::new(-0.7, 0.05), &w).unwrap(),
        solve_te(&m, Complex64::new(30.0, 0.5), &w, 0.1).unwrap(),
    ] {
        assert!(sol.relative_residual <= 1e-10);
        let e: f64 = sol.field.intensity().iter().zip(&m.cells).map(|(i, c)| i * c.area).sum();
        assert!((e - sol.energy).abs() <= 1e-12 * e);
    }
}

#[test]
fn energy_is_quadratic_in_amplitude() {
    let m = build_disc_mesh(0.05, [0.0, 0.0], 300).unwrap();
    let w = wave([0.0, 1.0]);
    let w2 = w.with_amplitude(Complex64::new(2.0, 0.0));
    let a = Complex64::new(-0.6, 0.02);
    let (e1, e2) = (solve_tm(&m, a, &w).unwrap().energy, solve_tm(&m, a, &w2).unwrap().energy);
    assert!((e2 - 4.0 * e1).abs() <= 1e-12 * e2);
    let t = Complex64::new(20.0, 1.0);
    let (e1, e2) = (solve_te(&m, t, &w, 0.1).unwrap().energy, solve_te(&m, t, &w2, 0.1).unwrap().energy);
    assert!((e2 - 4.0 * e1).abs() <= 1e-12 * e2);
}

#[test]
fn disc_energy_is_rotation_invariant() {
    let m = build_disc_mesh(0.1, [0.0, 0.0], 400).unwrap();
    let a = Complex64::new(-0.6, 0.02);
    let (ex, ey) = (solve_tm(&m, a, &wave([1.0, 0.0])).unwrap().energy, solve_tm(&m, a, &wave([0.0, 1.0])).unwrap().energy);
    assert!((ex - ey).abs() <= 1e-10 * ex);
    let t = Complex64::new(20.0, 1.0);
    let (ex, ey) = (
        solve_te(&m, t, &wave([1.0, 0.0]), 0.1).unwrap().energy,
        solve_te(&m, t, &wave([0.0, -1.0]), 0.1).unwrap().energy,
    );
    assert!((ex - ey).abs() <= 1e-10 * ex);
}

#[test]
fn dominant_energy_edge_cases() {
    assert_eq!(dominant_energy(0.0, 1.0, 0.5).unwrap(), 0.0);
    assert!(dominant_energy(1.0, 1.0, 0.0).is_err());
}

#[test]
fn invalid_incident_direction() {
    assert!(IncidentWave::new(1.0, [1.0, 1.0], &medium()).is_err());
    assert!(IncidentWave::new(0.0, [1.0, 0.0], &medium()).is_err());
}

fn ratios(cfg: &ExperimentConfig, deltas: &[f64]) -> Vec<f64> {
    deltas.iter().map(|&d| scatter_point(cfg, d).unwrap().row.energy_ratio).collect()
}

#[test]
fn tm_energy_matches_resonant_term() {
    let r = ratios(&ExperimentConfig::default(), &[0.05, 0.025]);
    assert!((0.7..=1.3).contains(&r[0]) && (r[1] - 1.0).abs() < (r[0] - 1.0).abs(), "{r:?}");
}

fn dielectric() -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.regime = RegimeChoice::dielectric(0.6, 0.3);
    c.material = dielectric_material();
    c
}

#[test]
fn te_energy_matches_resonant_term() {
    let r = ratios(&dielectric(), &[0.05, 0.025]);
    assert!((0.5..=2.0).contains(&r[0]) && (r[1] - 1.0).abs() < (r[0] - 1.0).abs(), "{r:?}");
}

#[test]
fn resonant_mean_scales_like_area() {
    let cfg = ExperimentConfig::default();
    let v: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&d| scatter_point(&cfg, d).unwrap().row.mean_sq / (d * d)).collect();
    let (lo, hi) = v.iter().fold((f64::MAX, 0.0f64), |(a, b), x| (a.min(*x), b.max(*x)));
    assert!(lo > 0.0 && hi / lo < 1.01, "{v:?}");
}

#[test]
fn plasmonic_gradient_norm_slope() {
    let cfg = ExperimentConfig::default();
    let d = [0.1, 0.05, 0.025];
    let g: Vec<f64> = d.iter().map(|&x| scatter_point(&cfg, x).unwrap().row.grad_h.unwrap()).collect();
    assert!((slope(&d, &g) - 0.4).abs() <= 0.15);
}

#[test]
fn dielectric_intensity_norm_bounded() {
    let cfg = dielectric();
    let v: Vec<f64> = [0.05, 0.02, 0.01]
        .iter()
        .map(|&d| {
            let r = scatter_point(&cfg, d).unwrap().row;
            r.e_sq_norm / (d * d.ln().abs().powf(1.5 * 0.6))
        })
        .collect();
    let (lo, hi) = v.iter().fold((f64::MAX, 0.0f64), |(a, b), x| (a.min(*x), b.max(*x)));
    assert!(lo > 0.0 && hi / lo < 3.0, "{v:?}");
}
