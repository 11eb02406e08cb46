use nanoheat::asymptotics::*;
use nanoheat::config::{dielectric_material, ExperimentConfig};
use nanoheat::material::RegimeChoice;
use nanoheat::pipeline::run_point;
use proptest::prelude::*;

fn input() -> DominantHeatInput {
    DominantHeatInput {
        xi: [0.3, 0.0],
        t: 0.5,
        z: [0.0, 0.0],
        alpha_m: 1.0,
        kappa_p: 40.0,
        kappa_m: 1.0,
        omega: 2.5,
        im_eps_p: 0.1,
        energy: 0.02,
        p: 0.5,
        r: 0.25,
    }
}

fn corollary(distance: f64) -> CorollaryInput {
    CorollaryInput { omega: 2.5, im_eps_p: 0.1, rho_c_m: 1.0, e_in_sq: 6.0, mean_sq: 0.03, distance, h: 0.6, delta: 1e-3 }
}

#[test]
fn dominant_term_edge_cases() {
    assert_eq!(heat_dominant(&DominantHeatInput { energy: 0.0, ..input() }).unwrap(), 0.0);
    assert!(heat_dominant(&DominantHeatInput { xi: [0.0, 0.0], ..input() }).is_err());
    assert!(heat_dominant(&DominantHeatInput { t: 0.0, ..input() }).is_err());
    assert!(heat_dominant(&DominantHeatInput { r: 0.5, ..input() }).is_err());
}

#[test]
fn dominant_term_decreases_with_distance() {
    let v: Vec<f64> = [0.05, 0.1, 0.2, 0.4, 0.8].iter().map(|&x| heat_dominant(&DominantHeatInput { xi: [x, 0.0], ..input() }).unwrap()).collect();
    assert!(v.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn corollary_edge_cases() {
    assert_eq!(heat_corollary(CorollaryKind::Plasmonic, &CorollaryInput { e_in_sq: 0.0, ..corollary(0.1) }).unwrap(), 0.0);
    assert!(heat_corollary(CorollaryKind::Plasmonic, &corollary(1.0)).is_err());
    assert!(heat_corollary(CorollaryKind::Dielectric, &CorollaryInput { delta: 1.0, ..corollary(0.1) }).is_err());
}

#[test]
fn distance_effect_values() {
    assert!((distance_effect(0.1, 0.5, 1e-3).unwrap() - 0.2).abs() < 1e-15);
    assert_eq!(distance_effect(0.3, 0.3, 0.01).unwrap(), 1.0);
    assert!(distance_effect(0.0, 0.5, 0.1).is_err());
    let delta: f64 = 1e-3;
    let a = heat_corollary(CorollaryKind::Plasmonic, &corollary(delta.powf(0.1))).unwrap();
    let b = heat_corollary(CorollaryKind::Plasmonic, &corollary(delta.powf(0.5))).unwrap();
    assert!((a / b - 0.2).abs() <= 0.02);
}

#[test]
fn synthetic_fit_recovers_exponents() {
    let d = [0.2, 0.1, 0.05, 0.02, 0.01];
    let v: Vec<f64> = d.iter().map(|x: &f64| 3.0 * x.powf(1.4) * x.ln().abs()).collect();
    let f = fit_scaling(&d, &v, FitModel::PowerLogLaw).unwrap();
    assert!((f.exponent - 1.4).abs() < 1e-6 && (f.log_exponent - 1.0).abs() < 1e-6);
    let f = fit_scaling(&d, &v, FitModel::PowerLogLawFixed { log_exponent: 1.0 }).unwrap();
    assert!((f.exponent - 1.4).abs() < 1e-6 && f.residual < 1e-10);
    let f = fit_scaling(&d, &d.iter().map(|x| 2.0 * x * x).collect::<Vec<_>>(), FitModel::PowerLaw).unwrap();
    assert!((f.exponent - 2.0).abs() < 1e-12);
}

#[test]
fn fit_is_deterministic() {
    let d = [0.2, 0.1, 0.05, 0.025];
    let v = [1.3, 0.55, 0.21, 0.08];
    assert_eq!(fit_scaling(&d, &v, FitModel::PowerLogLaw).unwrap(), fit_scaling(&d, &v, FitModel::PowerLogLaw).unwrap());
}

#[test]
fn fit_input_errors() {
    assert!(fit_scaling(&[0.1, 0.05], &[1.0, 2.0], FitModel::PowerLaw).is_err());
    assert!(fit_scaling(&[0.05, 0.1, 0.2], &[1.0, 2.0, 3.0], FitModel::PowerLaw).is_err());
    assert!(fit_scaling(&[0.2, 0.1, 0.05], &[1.0, -2.0, 3.0], FitModel::PowerLaw).is_err());
}

#[test]
fn exponent_constraint() {
    assert!(check_exponents(0.1, 0.25, 0.6).is_ok());
    assert!(check_exponents(0.5, 0.25, 0.6).is_err());
    assert!(check_exponents(0.1, 0.25, 1.0).is_err());
}

#[test]
fn probe_point_distance() {
    let p = probe_point([1.0, 2.0], 0.01, 0.5, [0.6, 0.8]);
    assert!(((p[0] - 1.0).hypot(p[1] - 2.0) - 0.1).abs() < 1e-15);
}

fn point(cfg: &ExperimentConfig, d: f64) -> (f64, f64) {
    let r = run_point(cfg, d).unwrap().row;
    (r.dominant, r.corollary)
}

#[test]
fn plasmonic_corollary_tracks_dominant() {
    let mut cfg = ExperimentConfig::default();
    cfg.discretization.fd = false;
    cfg.discretization.cells = 400;
    let q: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&d| { let (a, b) = point(&cfg, d); b / a }).collect();
    let (lo, hi) = q.iter().fold((f64::MAX, 0.0f64), |(a, b), x| (a.min(*x), b.max(*x)));
    assert!(hi / lo <= 2.0, "{q:?}");
}

#[test]
fn dielectric_balanced_case_is_flat() {
    let mut cfg = ExperimentConfig::default();
    cfg.regime = RegimeChoice::dielectric(0.6, 0.6);
    cfg.material = dielectric_material();
    cfg.discretization.fd = false;
    cfg.discretization.cells = 400;
    let v: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&d| point(&cfg, d).1).collect();
    let (lo, hi) = v.iter().fold((f64::MAX, 0.0f64), |(a, b), x| (a.min(*x), b.max(*x)));
    assert!(hi / lo <= 3.0, "{v:?}");
}

proptest! {
    #[test]
    fn dominant_invariant_under_kappa_p_scaling(c in 0.01f64..100.0) {
        let a = heat_dominant(&input()).unwrap();
        let b = heat_dominant(&DominantHeatInput { kappa_p: input().kappa_p * c, ..input() }).unwrap();
        prop_assert!((a - b).abs() <= 1e-13 * a);
    }

    #[test]
    fn dominant_linear_in_energy(s in 0.0f64..50.0) {
        let a = heat_dominant(&input()).unwrap();
        let b = heat_dominant(&DominantHeatInput { energy: input().energy * s, ..input() }).unwrap();
        prop_assert!((b - s * a).abs() <= 1e-14 * s.max(1.0) * a);
    }
}
