use nanoheat::config::dielectric_material;
use nanoheat::material::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn medium() -> HostMedium {
    HostMedium::new(1.0, 0.1, 1.0, 1.0, 1.0).unwrap()
}

fn plasmonic() -> LorentzMaterial {
    LorentzMaterial::new(2.0, 1.0, 0.0, 1.0).unwrap()
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    sxy / lx.iter().map(|x| (x - mx).powi(2)).sum::<f64>()
}

const DECADES: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

#[test]
fn static_permittivity_is_real() {
    let m = plasmonic();
    let e = permittivity(&m, 0.0, 0.0).unwrap();
    assert_eq!(e.im, 0.0);
    assert!((e.re - m.eps_inf * (1.0 + m.omega_p.powi(2) / m.omega_0.powi(2))).abs() < 1e-15);
}

#[test]
fn plasma_zero() {
    let m = plasmonic();
    let w = (m.omega_0.powi(2) + m.omega_p.powi(2)).sqrt();
    assert!(permittivity(&m, w, 0.0).unwrap().norm() < 1e-14);
}

#[test]
fn undamped_pole_is_rejected() {
    assert!(permittivity(&plasmonic(), 1.0, 0.0).is_err());
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(LorentzMaterial::new(0.0, 1.0, 0.0, 1.0).is_err());
    assert!(LorentzMaterial::new(1.0, 1.0, -1.0, 1.0).is_err());
    assert!(HostMedium::new(1.0, 0.0, 1.0, 1.0, 1.0).is_err());
    let mut c = RegimeChoice::dielectric(0.6, -0.1);
    assert!(c.validate().is_err());
    c = RegimeChoice::plasmonic(1.0);
    assert!(c.validate().is_err());
}

#[test]
fn host_diffusion_constant_is_consistent() {
    let m = HostMedium::new(1.0, 0.1, 2.0, 3.0, 0.5).unwrap();
    assert_eq!(m.alpha_m, m.rho_m * m.c_m / m.kappa_m);
}

#[test]
fn disc_plasmonic_frequency_closed_form() {
    let (m, med) = (plasmonic(), medium());
    let d = 0.01;
    let f = select_plasmonic_frequency(&m, &med, 0.5, d, &RegimeChoice::plasmonic(0.6)).unwrap();
    let expect = m.omega_0.powi(2) + m.omega_p.powi(2) * (med.eps_m + 0.5) / med.eps_m + d.powf(0.6);
    assert!((f.omega.powi(2) - expect).abs() < 1e-12 * expect);
}

#[test]
fn plasmonic_im_eps_slope_is_h() {
    let (m, med) = (plasmonic(), medium());
    let im: Vec<f64> = DECADES
        .iter()
        .map(|&d| {
            let f = select_plasmonic_frequency(&m, &med, 0.5, d, &RegimeChoice::plasmonic(0.6)).unwrap();
            permittivity(&m, f.omega, f.gamma_damp).unwrap().im
        })
        .collect();
    assert!((slope(&DECADES, &im) - 0.6).abs() < 0.05);
}

#[test]
fn plasmonic_diagnostic_slope_is_h() {
    let (m, med) = (plasmonic(), medium());
    let v: Vec<f64> = DECADES
        .iter()
        .map(|&d| {
            let f = select_plasmonic_frequency(&m, &med, 0.5, d, &RegimeChoice::plasmonic(0.6)).unwrap();
            plasmonic_diagnostic(&m, &med, &f, 0.5).unwrap()
        })
        .collect();
    assert!((slope(&DECADES, &v) - 0.6).abs() < 0.05);
}

#[test]
fn exact_resonance_without_detuning() {
    let (m, med) = (plasmonic(), medium());
    let mut c = RegimeChoice::plasmonic(0.6);
    c.c_freq = 0.0;
    c.c_damp = 0.0;
    let f = select_plasmonic_frequency(&m, &med, 0.5, 1e-3, &c).unwrap();
    assert_eq!(f.gamma_damp, 0.0);
    assert!(plasmonic_diagnostic(&m, &med, &f, 0.5).unwrap() < 1e-12);
}

// The Lorentz model with eps_inf > 0 and the resonant frequency above the
// plasma zero gives eps_p = lambda/(1 + lambda) > 0 at lambda = 1/2; a
// negative real part cannot be reached with this frequency rule.
#[test]
#[ignore = "frequency rule yields Re eps_p = lambda/(1+lambda) > 0; see README"]
fn plasmonic_real_part_is_negative() {
    let (m, med) = (plasmonic(), medium());
    let f = select_plasmonic_frequency(&m, &med, 0.5, 1e-3, &RegimeChoice::plasmonic(0.6)).unwrap();
    assert!(permittivity(&m, f.omega, f.gamma_damp).unwrap().re < 0.0);
}

#[test]
fn plasmonic_real_part_limit() {
    let (m, med) = (plasmonic(), medium());
    let f = select_plasmonic_frequency(&m, &med, 0.5, 1e-6, &RegimeChoice::plasmonic(0.6)).unwrap();
    let e = permittivity(&m, f.omega, f.gamma_damp).unwrap();
    assert!((e.re - 0.5 / 1.5).abs() < 1e-3 && e.im > 0.0);
}

fn dielectric_sweep() -> Vec<(f64, Frequency)> {
    let (m, med) = (dielectric_material(), medium());
    [1e-2, 1e-3, 1e-4, 1e-5]
        .iter()
        .map(|&d| (d, select_dielectric_frequency(&m, &med, 0.35, d, &RegimeChoice::dielectric(0.6, 0.3)).unwrap()))
        .collect()
}

#[test]
fn dielectric_diagnostic_log_scaling() {
    let (m, med) = (dielectric_material(), medium());
    let v: Vec<f64> = dielectric_sweep()
        .iter()
        .map(|(d, f)| {
            let l = 0.35 * d * d * d.ln().abs();
            dielectric_diagnostic(&m, &med, f, l).unwrap() * d.ln().abs().powf(0.6)
        })
        .collect();
    let (lo, hi) = v.iter().fold((f64::MAX, 0.0f64), |(a, b), x| (a.min(*x), b.max(*x)));
    assert!(hi / lo <= 2.0, "{v:?}");
}

#[test]
fn dielectric_im_eps_scaling_and_ratio() {
    let m = dielectric_material();
    let mut scaled = Vec::new();
    let mut ratios = Vec::new();
    for (d, f) in dielectric_sweep() {
        let e = permittivity(&m, f.omega, f.gamma_damp).unwrap();
        scaled.push(e.im * d * d * d.ln().abs().powf(1.0 + 0.6 + 0.3));
        ratios.push(e.re / e.im);
    }
    let (lo, hi) = scaled.iter().fold((f64::MAX, 0.0f64), |(a, b), x| (a.min(*x), b.max(*x)));
    assert!(lo > 0.0 && hi / lo < 2.0, "{scaled:?}");
    assert!(ratios.windows(2).all(|w| w[1] > w[0]), "{ratios:?}");
}

#[test]
fn dielectric_damping_must_be_small() {
    let (m, med) = (dielectric_material(), medium());
    let mut c = RegimeChoice::dielectric(0.6, 0.3);
    c.c_damp = 1e6;
    assert!(matches!(select_dielectric_frequency(&m, &med, 0.35, 1e-2, &c), Err(nanoheat::Error::Assumption(_))));
}

#[test]
fn no_contrast() {
    assert_eq!(tm_contrast(Complex64::new(2.0, 0.0), 2.0).unwrap(), Complex64::new(0.0, 0.0));
    assert_eq!(te_contrast(Complex64::new(2.0, 0.0), 2.0).unwrap(), Complex64::new(0.0, 0.0));
}

proptest! {
    #[test]
    fn im_eps_nonnegative(w in 0.0f64..10.0, g in 0.0f64..2.0, wp in 0.1f64..5.0) {
        let m = LorentzMaterial::new(wp, 1.0, g, 1.3).unwrap();
        if let Ok(e) = permittivity(&m, w, g) {
            prop_assert!(e.im >= 0.0);
        }
    }

    #[test]
    fn contrast_identity(re in -5.0f64..5.0, im in 0.01f64..3.0, em in 0.5f64..4.0) {
        let e = Complex64::new(re, im);
        let a = tm_contrast(e, em).unwrap();
        prop_assert!((a * e * em - (em - e)).norm() <= 1e-14 * (1.0 + e.norm() * em));
    }

    #[test]
    fn plasmonic_rule_matches_beta_form(wp in 0.2f64..4.0, w0 in 0.2f64..3.0, einf in 0.5f64..5.0, em in 0.5f64..4.0, lam in 0.05f64..0.95) {
        let m = LorentzMaterial::new(wp, w0, 0.0, einf).unwrap();
        let med = HostMedium::new(em, 0.1, 1.0, 1.0, 1.0).unwrap();
        let mut c = RegimeChoice::plasmonic(0.6);
        c.c_freq = 0.0;
        c.c_damp = 0.0;
        let denom = lam * (1.0 - em / einf) + em;
        prop_assume!(denom.abs() > 1e-3);
        if let Ok(f) = select_plasmonic_frequency(&m, &med, lam, 0.1, &c) {
            let w2 = plasmonic_resonance_via_beta(&m, &med, lam);
            prop_assert!((f.omega * f.omega - w2).abs() <= 1e-12 * w2.abs().max(1.0));
        }
    }
}
