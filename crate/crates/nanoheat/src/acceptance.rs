//! The acceptance suite: thirteen numbered criteria, each returning a
//! pass/fail outcome with the measured numbers, elapsed time and budget.

use crate::asymptotics::{
    check_exponents, distance_effect, fit_scaling, heat_corollary, CorollaryInput, CorollaryKind, FitModel,
};
use crate::config::{dielectric_material, ExperimentConfig};
use crate::error::Result;
use crate::geometry::{build_disc_mesh, build_mesh, Shape};
use crate::heatkernels::{
    double_layer_jump, kr_diagnostic, kernel_difference_check, np_laplace_apply, singular_bound_check, spatial_mass,
    time_integral_point, time_integral_quadrature, time_integral_quoted, CircleBoundary, CircleHeatOperators,
    HeatKernelParams, KernelRole, SpaceTimeDensity, TimeGrid,
};
use crate::material::{plasmonic_diagnostic, select_plasmonic_frequency, LorentzMaterial, RegimeChoice};
use crate::oracle;
use crate::pipeline::{report_json, scatter_point, sweep, sweep_csv, SweepRow};
use crate::specfun::{exp_integral_e1, hankel1_0, upper_gamma_half};
use crate::spectral::{
    assemble_log_potential, eigs, eigs_magnetization_harmonic, normalized_log_eigenvalue, HarmonicGradientBasis,
};
use std::f64::consts::PI;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget: f64,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<20} {} ({:.1} s / {:.0} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds,
            self.budget
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AcceptanceOptions {
    /// Criterion numbers or names to run; all when empty.
    pub only: Vec<String>,
    /// Relative perturbation applied to E1 before comparison (negative control).
    pub e1_perturbation: f64,
}

/// (number, name, runtime budget in seconds).
pub const CRITERIA: [(usize, &str, f64); 13] = [
    (1, "specfun", 10.0),
    (2, "time-integral", 5.0),
    (3, "heat-mass", 1.0),
    (4, "magnetization", 120.0),
    (5, "log-spectrum", 180.0),
    (6, "plasmonic-slope", 5.0),
    (7, "tm-energy", 300.0),
    (8, "te-energy", 300.0),
    (9, "apriori-norms", 300.0),
    (10, "fd-trend", 600.0),
    (11, "scaling-laws", 900.0),
    (12, "identities", 300.0),
    (13, "determinism", 60.0),
];

pub fn selected(opts: &AcceptanceOptions, id: usize, name: &str) -> bool {
    opts.only.is_empty()
        || opts.only.iter().any(|o| {
            let o = o.trim();
            o == name || o.parse::<usize>().ok() == Some(id) || name.starts_with(o)
        })
}

type Check = (bool, String);

fn err(e: crate::Error) -> Check {
    (false, format!("error: {e}"))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub const E1_GRID: [f64; 11] = [1e-12, 1e-6, 1e-3, 0.5, 1.0, 1.5, 2.0, 10.0, 50.0, 200.0, 700.0];
pub const GAMMA_HALF_GRID: [f64; 5] = [0.0, 0.1, 1.0, 5.0, 20.0];
pub const HANKEL_GRID: [f64; 15] = [1e-8, 1e-6, 0.01, 0.5, 1.0, 2.0, 5.0, 8.0, 11.9, 12.1, 15.0, 20.0, 50.0, 200.0, 1e3];

fn c1_specfun(opts: &AcceptanceOptions) -> Result<Check> {
    let mut worst = [0.0f64; 3];
    for x in E1_GRID {
        worst[0] = worst[0].max(rel(exp_integral_e1(x)? * (1.0 + opts.e1_perturbation), oracle::e1(x)));
    }
    for x in GAMMA_HALF_GRID {
        worst[1] = worst[1].max(rel(upper_gamma_half(x)?, oracle::upper_gamma_half(x)));
    }
    for x in HANKEL_GRID {
        let h = hankel1_0(x)?;
        let (j, y) = (oracle::j0(x), oracle::y0(x));
        worst[2] = worst[2].max(((h.re - j).powi(2) + (h.im - y).powi(2)).sqrt() / (j * j + y * y).sqrt());
    }
    let ok = worst.iter().all(|w| *w <= 1e-9);
    Ok((ok, format!("max rel err E1 {:.1e}, Gamma(1/2) {:.1e}, H0 {:.1e} (tol 1e-9)", worst[0], worst[1], worst[2])))
}

fn c2_time_integral(opts: &AcceptanceOptions) -> Result<Check> {
    let alpha = 2.0;
    let mut worst = 0.0f64;
    let (mut qmin, mut qmax) = (f64::MAX, 0.0f64);
    for r in [0.01, 0.1, 0.5, 1.0, 2.0] {
        for t in [0.05, 0.2, 0.5, 1.0, 3.0] {
            let closed = time_integral_point(alpha, r, t)? * (1.0 + opts.e1_perturbation);
            let q = time_integral_quadrature(alpha, r, t);
            worst = worst.max(rel(closed, q));
            let ratio = time_integral_quoted(r, t) / q;
            qmin = qmin.min(ratio);
            qmax = qmax.max(ratio);
        }
    }
    Ok((
        worst <= 1e-9,
        format!("5x5 grid, alpha = {alpha}: max rel err {worst:.1e} (tol 1e-9); quoted 1/2*Gamma(0, r^2/4t) over closed form ranges {qmin:.3} to {qmax:.3e} (logged discrepancy, not asserted)"),
    ))
}

fn c3_mass() -> Result<Check> {
    let pairs = [(1.0, 1.0), (3.0, 0.2), (0.5, 4.0)];
    let worst = pairs.iter().map(|&(a, t)| (spatial_mass(a, t) - 1.0).abs()).fold(0.0, f64::max);
    Ok((worst <= 1e-8, format!("max |mass - 1| = {worst:.1e} over (alpha, t) = {pairs:?}")))
}

fn c4_magnetization() -> Result<Check> {
    let mesh = build_disc_mesh(0.1, [0.0, 0.0], 8000)?;
    let basis = HarmonicGradientBasis::new(&mesh, 4)?;
    let es = eigs_magnetization_harmonic(&mesh, &basis)?;
    let dev = es.eigenvalues.iter().map(|l| (l - 0.5).abs() / 0.5).fold(0.0, f64::max);
    let in_range = es.eigenvalues.iter().all(|l| (0.0..=1.0).contains(l));
    Ok((
        dev <= 0.02 && in_range,
        format!("{} cells, {} eigenvalues, max |lambda - 1/2|/(1/2) = {dev:.1e} (tol 2e-2), all in [0,1]: {in_range}", mesh.len(), es.len()),
    ))
}

fn c5_log_spectrum() -> Result<Check> {
    let mut vals = Vec::new();
    let mut mean_ok = true;
    for d in [0.5, 0.1, 0.02] {
        let mesh = build_disc_mesh(d, [0.0, 0.0], 1600)?;
        let es = eigs(&assemble_log_potential(&mesh)?, &mesh.areas())?;
        vals.push(normalized_log_eigenvalue(&es, d));
        mean_ok &= es.means[0].norm_sq().sqrt() > 1e-3 * (PI * d * d).sqrt();
    }
    let max = vals.iter().cloned().fold(f64::MIN, f64::max);
    let min = vals.iter().cloned().fold(f64::MAX, f64::min);
    let spread = (max - min) / max;
    Ok((
        spread <= 0.25 && mean_ok,
        format!(
            "lambda1/(delta^2|log delta|) = {:.4}, {:.4}, {:.4} at delta = 0.5, 0.1, 0.02; (max-min)/max = {spread:.3} (tol 0.25); int e1 != 0: {mean_ok}",
            vals[0], vals[1], vals[2]
        ),
    ))
}

fn c6_plasmonic_slope() -> Result<Check> {
    let cfg = ExperimentConfig::default();
    let deltas = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5];
    let mut diag = Vec::new();
    let choice = RegimeChoice::plasmonic(0.6);
    for d in deltas {
        let f = select_plasmonic_frequency(&cfg.material, &cfg.medium, 0.5, d, &choice)?;
        diag.push(plasmonic_diagnostic(&cfg.material, &cfg.medium, &f, 0.5)?);
    }
    let s = slope(&deltas, &diag);
    Ok(((s - 0.6).abs() <= 0.05, format!("slope of |1 - alpha*lambda| over delta = 1e-1..1e-5: {s:.4} (target 0.6 +- 0.05)")))
}

fn scatter_rows(cfg: &ExperimentConfig, deltas: &[f64]) -> Result<Vec<SweepRow>> {
    deltas.iter().map(|&d| scatter_point(cfg, d).map(|p| p.row)).collect()
}

fn dielectric_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.regime = RegimeChoice::dielectric(0.6, 0.3);
    cfg.material = dielectric_material();
    cfg.probe.p = 0.5;
    cfg.discretization.fd = false;
    cfg
}

fn energy_check(rows: &[SweepRow], lo: f64, hi: f64) -> Check {
    let (a, b) = (rows[0].energy_ratio, rows[1].energy_ratio);
    let ok = (lo..=hi).contains(&a) && (b - 1.0).abs() < (a - 1.0).abs();
    (ok, format!("ratio {a:.4} at delta = {} (band [{lo}, {hi}]), {b:.4} at delta = {} (must be closer to 1)", rows[0].delta, rows[1].delta))
}

fn c7_tm_energy() -> Result<Check> {
    Ok(energy_check(&scatter_rows(&ExperimentConfig::default(), &[0.05, 0.025])?, 0.7, 1.3))
}

fn c8_te_energy() -> Result<Check> {
    Ok(energy_check(&scatter_rows(&dielectric_config(), &[0.05, 0.025])?, 0.5, 2.0))
}

fn c9_apriori() -> Result<Check> {
    let deltas = [0.1, 0.05, 0.025];
    let rows = scatter_rows(&ExperimentConfig::default(), &deltas)?;
    let gh: Vec<f64> = rows.iter().map(|r| r.grad_h.unwrap_or(f64::NAN)).collect();
    let es: Vec<f64> = rows.iter().map(|r| r.e_sq_norm).collect();
    let (s1, s2) = (slope(&deltas, &gh), slope(&deltas, &es));
    let ok1 = (s1 - 0.4).abs() <= 0.15;
    let ok2 = (s2 + 1.0).abs() <= 0.2;
    Ok((
        ok1 && ok2,
        format!(
            "||grad H|| slope {s1:.3} (target 1-h = 0.4 +- 0.15: {}); |||E|^2|| slope {s2:.3} (target -1 +- 0.2: {})",
            if ok1 { "ok" } else { "off" },
            if ok2 { "ok" } else { "off" }
        ),
    ))
}

/// Plasmonic sweep at p = 1/2, r = 1/4, h = 0.6 with the FD probe.
pub fn fd_trend_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.probe.p = 0.5;
    cfg.probe.r = 0.25;
    cfg.deltas = vec![0.2, 0.1, 0.05];
    cfg
}

fn c10_fd_trend() -> Result<Check> {
    let cfg = fd_trend_config();
    cfg.validate_structure()?;
    let note = match check_exponents(cfg.probe.p, cfg.probe.r, cfg.regime.h) {
        Ok(()) => String::new(),
        Err(e) => format!("; warning: {e}"),
    };
    let rep = sweep(&cfg, 1);
    if let Some((d, e)) = rep.failures.first() {
        return Ok((false, format!("sweep failed at delta = {d}: {e}")));
    }
    let dev: Vec<f64> = rep.rows.iter().map(|r| r.deviation().unwrap_or(f64::NAN)).collect();
    let ok = dev.windows(2).all(|w| w[1] < w[0]);
    Ok((ok, format!("|dominant - FD|/FD = {:.2e}, {:.2e}, {:.2e} at delta = 0.2, 0.1, 0.05 (must decrease){note}", dev[0], dev[1], dev[2])))
}

fn c11_scaling() -> Result<Check> {
    let mut p = ExperimentConfig::default();
    p.probe.p = 0.5;
    p.discretization.fd = false;
    p.deltas = vec![0.2, 0.1, 0.05, 0.025];
    let rp = sweep(&p, 1);
    let d = dielectric_config();
    let mut d = d;
    d.deltas = vec![1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
    let rd = sweep(&d, 1);
    if let Some((dl, e)) = rp.failures.first().or(rd.failures.first()) {
        return Ok((false, format!("sweep failed at delta = {dl}: {e}")));
    }
    let (Some(fp), Some(fd)) = (&rp.fit_corollary, &rd.fit_corollary) else {
        return Ok((false, "fits unavailable".into()));
    };
    let ok_p = (fp.exponent - 1.4).abs() <= 0.2;
    let ok_d = (fd.log_exponent - 0.3).abs() <= 0.25 && fd.exponent.abs() <= 0.1;
    // distance effect from the corollary at two probe distances
    let delta = 1e-3;
    let pt = scatter_point(&p, delta)?;
    let r = &pt.row;
    let at = |pp: f64| {
        heat_corollary(
            CorollaryKind::Plasmonic,
            &CorollaryInput {
                omega: r.omega,
                im_eps_p: r.eps_im,
                rho_c_m: p.medium.rho_c(),
                e_in_sq: r.e_in_sq,
                mean_sq: r.mean_sq,
                distance: delta.powf(pp),
                h: p.regime.h,
                delta,
            },
        )
    };
    let measured = at(0.1)? / at(0.5)?;
    let predicted = distance_effect(0.1, 0.5, delta)?;
    let ok_r = (measured - 0.2).abs() <= 0.02 && (predicted - 0.2).abs() <= 1e-12;
    let dom = rp.fit_dominant.as_ref().map(|f| f.exponent).unwrap_or(f64::NAN);
    Ok((
        ok_p && ok_d && ok_r,
        format!(
            "plasmonic delta-exponent {:.3} (target 1.4 +- 0.2; dominant column {dom:.3}); dielectric |log delta|-exponent {:.3} (0.3 +- 0.25), delta-exponent {:.3} (0 +- 0.1); distance ratio {measured:.4} (1/5 +- 10%)",
            fp.exponent, fd.log_exponent, fd.exponent
        ),
    ))
}

fn c12_identities() -> Result<Check> {
    let params = HeatKernelParams::new(1.0, KernelRole::Interior)?;
    let mut cald = Vec::new();
    let mut jump = f64::NAN;
    for n in [128usize, 256] {
        let circle = CircleBoundary::new([0.0, 0.0], 1.0, n)?;
        let grid = TimeGrid::new(1.0, n)?;
        let ops = CircleHeatOperators::new(params, circle, grid);
        let phi = SpaceTimeDensity::from_fn(n, grid, |i, t| circle.angle(i).cos() * (PI * t).sin());
        cald.push(ops.calderon_residual(&phi)?);
        if n == 256 {
            jump = double_layer_jump(&ops, &phi, 4, &[n / 2, n], 16)?.max_rel_error;
        }
    }
    let mesh = build_disc_mesh(0.3, [0.2, -0.1], 400)?.with_boundary_nodes(256);
    let np = np_laplace_apply(&mesh, &vec![1.0; 256])?;
    let np_err = np.iter().map(|v| (v + 0.5).abs()).fold(0.0, f64::max);
    let ell = build_mesh(Shape::Ellipse { a: 2.0, b: 1.0 }, 0.3, [0.0, 0.0], 400)?.with_boundary_nodes(512);
    let np_e = np_laplace_apply(&ell, &vec![1.0; 512])?;
    let np_e_err = np_e.iter().map(|v| (v + 0.5).abs() / 0.5).fold(0.0, f64::max);
    let trace = kernel_difference_check(1.0, 1.0, 0.5, 0.5, 0.1, &[0.1, 0.2, 0.3, 0.4]);
    let sb = singular_bound_check(1.0, 0.25, 100)?;
    let kr_ok = kr_diagnostic(0.25, 1.0).is_ok() && kr_diagnostic(0.5, 1.0).is_err();
    let ok = cald[1] < cald[0]
        && cald[0] <= 0.10
        && cald[1] <= 0.05
        && np_err <= 1e-10
        && np_e_err <= 5e-3
        && jump <= 0.03
        && trace.bounded
        && sb.passed
        && kr_ok;
    Ok((
        ok,
        format!(
            "Calderon {:.1e} (128x128), {:.1e} (256x256); NP circle {np_err:.1e}, ellipse {np_e_err:.1e}; jump {jump:.1e} (256x256); kernel-difference ratios {:.3}/{:.3}/{:.3}; singular bounds {} (C = {:.4}, C_dt = {:.4}); K_r rejects r >= 1/2: {kr_ok}",
            cald[0],
            cald[1],
            trace.ratios[0],
            trace.ratios[1],
            trace.ratios[2],
            if sb.passed { "hold" } else { "violated" },
            sb.c_value,
            sb.c_dt
        ),
    ))
}

/// Small plasmonic pipeline run used by the determinism criterion.
pub fn determinism_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.deltas = vec![0.2, 0.1];
    cfg.discretization.cells = 196;
    cfg.discretization.dt = 0.01;
    cfg
}

fn c13_determinism() -> Result<Check> {
    let cfg = determinism_config();
    let a = sweep(&cfg, 1);
    let b = sweep(&cfg, 1);
    let same = sweep_csv(&a.rows) == sweep_csv(&b.rows) && report_json(&cfg, &a) == report_json(&cfg, &b);
    Ok((same && a.failures.is_empty(), format!("two runs of a {}-point sweep: CSV and JSON byte-identical: {same}", cfg.deltas.len())))
}

pub fn run_criterion(id: usize, opts: &AcceptanceOptions) -> CriterionOutcome {
    let (_, name, budget) = CRITERIA[id - 1];
    let start = Instant::now();
    let res = match id {
        1 => c1_specfun(opts),
        2 => c2_time_integral(opts),
        3 => c3_mass(),
        4 => c4_magnetization(),
        5 => c5_log_spectrum(),
        6 => c6_plasmonic_slope(),
        7 => c7_tm_energy(),
        8 => c8_te_energy(),
        9 => c9_apriori(),
        10 => c10_fd_trend(),
        11 => c11_scaling(),
        12 => c12_identities(),
        _ => c13_determinism(),
    };
    let (ok, detail) = res.unwrap_or_else(err);
    let seconds = start.elapsed().as_secs_f64();
    let within = seconds <= budget;
    let detail = if within { detail } else { format!("{detail}; over the runtime budget") };
    CriterionOutcome { id, name, passed: ok && within, detail, seconds, budget }
}

/// Runs the selected criteria in order, handing each outcome to `sink` as
/// soon as it is available.
pub fn run_acceptance(opts: &AcceptanceOptions, mut sink: impl FnMut(&CriterionOutcome)) -> Vec<CriterionOutcome> {
    let mut out = Vec::new();
    for (id, name, _) in CRITERIA {
        if selected(opts, id, name) {
            let o = run_criterion(id, opts);
            sink(&o);
            out.push(o);
        }
    }
    out
}

/// Material used by the plasmonic criteria, exposed for the CLI summary.
pub fn plasmonic_material() -> LorentzMaterial {
    ExperimentConfig::default().material
}

pub fn fit_model_plasmonic() -> FitModel {
    FitModel::PowerLogLawFixed { log_exponent: 1.0 }
}

/// Convenience for callers that only want the fitted exponents of a sweep.
pub fn fit_rows(rows: &[SweepRow], model: FitModel) -> Result<(f64, f64)> {
    let d: Vec<f64> = rows.iter().map(|r| r.delta).collect();
    let v: Vec<f64> = rows.iter().map(|r| r.corollary).collect();
    let f = fit_scaling(&d, &v, model)?;
    Ok((f.exponent, f.log_exponent))
}
