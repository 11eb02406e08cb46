//! δ-sweep orchestration: frequency selection, eigen-solve, scattering,
//! dominant heat and the finite-difference probe, written as CSV and JSON.

use crate::asymptotics::{
    fit_scaling, heat_corollary, heat_dominant, probe_point, CorollaryInput, CorollaryKind, DominantHeatInput, FitModel,
    ScalingFit,
};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::geometry::{build_mesh, ParticleMesh};
use crate::heatref::{probe, solve_transmission, GridSpec, SourceField};
use crate::material::{
    permittivity, select_dielectric_frequency, select_plasmonic_frequency, te_contrast, tm_contrast, RegimeKind,
};
use crate::scatter::{
    apriori_norms, dominant_energy, solve_te, solve_tm, te_resonance_factor, tm_resonance_factor, FieldKind,
    IncidentWave, ScatterSolution,
};
use crate::spectral::{assemble_log_potential, eigs, eigs_magnetization_harmonic, HarmonicGradientBasis};
use serde_json::json;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const SWEEP_SCHEMA: &str = "# schema: nanoheat.sweep.v1";
pub const ASYM_SCHEMA: &str = "# schema: nanoheat.heat-asym.v1";

/// One δ of a sweep. FD columns are `None` when the FD probe is disabled.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub delta: f64,
    pub omega: f64,
    pub gamma_damp: f64,
    pub eps_re: f64,
    pub eps_im: f64,
    pub lambda: f64,
    /// |1 − αλ| or |1 − ω²μτλ|.
    pub diagnostic: f64,
    pub mean_sq: f64,
    pub e_in_sq: f64,
    pub energy: f64,
    /// energy · resonance factor / (|E^in|² (∫e)²).
    pub energy_ratio: f64,
    pub grad_h: Option<f64>,
    pub e_sq_norm: f64,
    pub distance: f64,
    pub dominant: f64,
    pub corollary: f64,
    pub fd_probe: Option<f64>,
    pub condition: f64,
}

impl SweepRow {
    pub fn deviation(&self) -> Option<f64> {
        self.fd_probe.map(|fd| (self.dominant - fd).abs() / fd.abs())
    }
}

/// Everything computed for one δ, kept for callers that need fields.
pub struct SweepPoint {
    pub row: SweepRow,
    pub mesh: ParticleMesh,
    pub solution: ScatterSolution,
}

/// Scattering stage: frequency, eigenpair, solve and energy ratio.
pub fn scatter_point(cfg: &ExperimentConfig, delta: f64) -> Result<SweepPoint> {
    let d = &cfg.discretization;
    let mesh = build_mesh(cfg.shape, delta, cfg.center, d.cells)?.with_boundary_nodes(d.boundary_nodes);
    let med = &cfg.medium;
    let (omega, gamma, eps, lambda, mean_sq, wave, solution, factor, kind) = match cfg.regime.kind {
        RegimeKind::Plasmonic => {
            let basis = HarmonicGradientBasis::new(&mesh, d.basis_degree)?;
            let es = eigs_magnetization_harmonic(&mesh, &basis)?;
            let n0 = cfg.regime.n0.unwrap_or_else(|| es.dominant_index());
            if n0 >= es.len() {
                return Err(Error::Config(format!("regime.n0 = {n0} exceeds the {} computed eigenpairs", es.len())));
            }
            let lambda = es.eigenvalues[n0];
            let f = select_plasmonic_frequency(&cfg.material, med, lambda, delta, &cfg.regime)?;
            let eps = permittivity(&cfg.material, f.omega, f.gamma_damp)?;
            let alpha = tm_contrast(eps, med.eps_m)?;
            let wave = IncidentWave::new(f.omega, cfg.incident_direction, med)?;
            let sol = solve_tm(&mesh, alpha, &wave)?;
            let factor = tm_resonance_factor(alpha, lambda);
            let msq = es.resonant_mean_sq(n0, Some(cfg.incident_direction), 1e-3);
            (f.omega, f.gamma_damp, eps, lambda, msq, wave, sol, factor, FieldKind::Tm)
        }
        RegimeKind::Dielectric => {
            let es = eigs(&assemble_log_potential(&mesh)?, &mesh.areas())?;
            let n0 = cfg.regime.n0.unwrap_or_else(|| es.dominant_index());
            if n0 >= es.len() {
                return Err(Error::Config(format!("regime.n0 = {n0} exceeds the {} computed eigenpairs", es.len())));
            }
            let lambda = es.eigenvalues[n0];
            let lbar = lambda / (delta * delta * delta.ln().abs());
            let f = select_dielectric_frequency(&cfg.material, med, lbar, delta, &cfg.regime)?;
            let eps = permittivity(&cfg.material, f.omega, f.gamma_damp)?;
            let tau = te_contrast(eps, med.eps_m)?;
            let wave = IncidentWave::new(f.omega, cfg.incident_direction, med)?;
            let sol = solve_te(&mesh, tau, &wave, med.mu_m)?;
            let factor = te_resonance_factor(f.omega, med.mu_m, tau, lambda);
            let msq = es.resonant_mean_sq(n0, None, 1e-3);
            (f.omega, f.gamma_damp, eps, lambda, msq, wave, sol, factor, FieldKind::Te)
        }
    };
    let e_in_sq = wave.intensity(kind);
    let dom = dominant_energy(e_in_sq, mean_sq, factor)?;
    let norms = apriori_norms(&solution, &mesh);
    let row = SweepRow {
        delta,
        omega,
        gamma_damp: gamma,
        eps_re: eps.re,
        eps_im: eps.im,
        lambda,
        diagnostic: factor.sqrt(),
        mean_sq,
        e_in_sq,
        energy: solution.energy,
        energy_ratio: solution.energy / dom,
        grad_h: norms.grad_h,
        e_sq_norm: norms.e_sq,
        distance: delta.powf(cfg.probe.p),
        dominant: f64::NAN,
        corollary: f64::NAN,
        fd_probe: None,
        condition: solution.condition,
    };
    let solution = solution.with_resonance_factor(factor);
    Ok(SweepPoint { row, mesh, solution })
}

/// Heat stage on top of `scatter_point`: dominant term, corollary and
/// (optionally) the FD probe.
pub fn run_point(cfg: &ExperimentConfig, delta: f64) -> Result<SweepPoint> {
    let mut pt = scatter_point(cfg, delta)?;
    let heat = cfg.heat(delta)?;
    let xi = probe_point(cfg.center, delta, cfg.probe.p, cfg.probe.direction);
    let row = &mut pt.row;
    row.dominant = heat_dominant(&DominantHeatInput {
        xi,
        t: cfg.probe.t,
        z: cfg.center,
        alpha_m: cfg.medium.alpha_m,
        kappa_p: heat.kappa_p,
        kappa_m: heat.kappa_m,
        omega: row.omega,
        im_eps_p: row.eps_im,
        energy: row.energy,
        p: cfg.probe.p,
        r: cfg.probe.r,
    })?;
    let kind = match cfg.regime.kind {
        RegimeKind::Plasmonic => CorollaryKind::Plasmonic,
        RegimeKind::Dielectric => CorollaryKind::Dielectric,
    };
    row.corollary = heat_corollary(
        kind,
        &CorollaryInput {
            omega: row.omega,
            im_eps_p: row.eps_im,
            rho_c_m: cfg.medium.rho_c(),
            e_in_sq: row.e_in_sq,
            mean_sq: row.mean_sq,
            distance: row.distance,
            h: cfg.regime.h,
            delta,
        },
    )?;
    if cfg.discretization.fd {
        let d = &cfg.discretization;
        let q = row.omega * row.eps_im / (2.0 * PI);
        let values: Vec<f64> = pt.solution.field.intensity().iter().map(|i| q * i).collect();
        let source = SourceField::from_mesh(&pt.mesh, values, cfg.t0)?;
        let (a, b) = cfg.shape.axes();
        let spec = GridSpec {
            h_core: delta / d.grid_cells_per_delta,
            core_half_width: 1.5 * delta * a.max(b),
            half_width: d.grid_l_factor * row.distance.max(delta),
            stretch: d.grid_stretch,
            dt: d.dt,
            t_end: cfg.probe.t,
            refine: 0,
        };
        let run = solve_transmission(&heat, &source, &spec)?;
        row.fd_probe = Some(probe(&run, xi, cfg.probe.t)?);
    }
    Ok(pt)
}

fn g(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(g).unwrap_or_default()
}

pub const SWEEP_HEADER: &str = "delta,omega,gamma_damp,eps_re,eps_im,lambda,diagnostic,mean_sq,e_in_sq,energy,energy_ratio,grad_h,e_sq_norm,distance,dominant,corollary,fd_probe,deviation,condition";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = format!("{SWEEP_SCHEMA}\n{SWEEP_HEADER}\n");
    for r in rows {
        let cols = [
            g(r.delta),
            g(r.omega),
            g(r.gamma_damp),
            g(r.eps_re),
            g(r.eps_im),
            g(r.lambda),
            g(r.diagnostic),
            g(r.mean_sq),
            g(r.e_in_sq),
            g(r.energy),
            g(r.energy_ratio),
            opt(r.grad_h),
            g(r.e_sq_norm),
            g(r.distance),
            g(r.dominant),
            g(r.corollary),
            opt(r.fd_probe),
            opt(r.deviation()),
            g(r.condition),
        ];
        let _ = writeln!(s, "{}", cols.join(","));
    }
    s
}

/// δ, dominant, corollary, fd_probe, dominant/fd ratio.
pub fn asym_csv(rows: &[SweepRow]) -> String {
    let mut s = format!("{ASYM_SCHEMA}\ndelta,dominant,corollary,fd_probe,ratio\n");
    for r in rows {
        let ratio = r.fd_probe.map(|fd| r.dominant / fd);
        let _ = writeln!(s, "{},{},{},{},{}", g(r.delta), g(r.dominant), g(r.corollary), opt(r.fd_probe), opt(ratio));
    }
    s
}

/// Fit model used for the dominant-term columns of a regime:
/// δ^a |log δ| for plasmonic, δ^a |log δ|^b for dielectric.
pub fn regime_fit_model(kind: RegimeKind) -> FitModel {
    match kind {
        RegimeKind::Plasmonic => FitModel::PowerLogLawFixed { log_exponent: 1.0 },
        RegimeKind::Dielectric => FitModel::PowerLogLaw,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<(f64, String)>,
    pub fit_dominant: Option<ScalingFit>,
    pub fit_corollary: Option<ScalingFit>,
    pub fit_fd: Option<ScalingFit>,
}

impl PipelineReport {
    /// More than half of the sweep points failed.
    pub fn failed(&self) -> bool {
        2 * self.failures.len() > self.rows.len() + self.failures.len()
    }
}

fn fit_json(f: &Option<ScalingFit>) -> serde_json::Value {
    match f {
        Some(f) => json!({
            "exponent": f.exponent,
            "log_exponent": f.log_exponent,
            "log_prefactor": f.log_prefactor,
            "residual": f.residual,
        }),
        None => serde_json::Value::Null,
    }
}

pub fn report_json(cfg: &ExperimentConfig, report: &PipelineReport) -> String {
    let v = json!({
        "schema": "nanoheat.report.v1",
        "regime": cfg.regime.kind.name(),
        "h": cfg.regime.h,
        "s": cfg.regime.s,
        "p": cfg.probe.p,
        "r": cfg.probe.r,
        "t": cfg.probe.t,
        "deltas": report.rows.iter().map(|r| r.delta).collect::<Vec<_>>(),
        "energy_ratio": report.rows.iter().map(|r| r.energy_ratio).collect::<Vec<_>>(),
        "deviation": report.rows.iter().map(|r| r.deviation()).collect::<Vec<_>>(),
        "failures": report.failures.iter().map(|(d, e)| json!({"delta": d, "error": e})).collect::<Vec<_>>(),
        "fit_dominant": fit_json(&report.fit_dominant),
        "fit_corollary": fit_json(&report.fit_corollary),
        "fit_fd": fit_json(&report.fit_fd),
    });
    serde_json::to_string_pretty(&v).unwrap_or_default() + "\n"
}

/// Runs every δ (on `threads` workers, rows kept in δ order) and fits the
/// columns when at least three points succeed. Failures are reported with
/// their δ and the sweep continues.
pub fn sweep(cfg: &ExperimentConfig, threads: usize) -> PipelineReport {
    let threads = threads.max(1).min(cfg.deltas.len().max(1));
    let mut results: Vec<Option<Result<SweepRow>>> = vec![None; cfg.deltas.len()];
    std::thread::scope(|s| {
        let chunks: Vec<_> = results.chunks_mut(cfg.deltas.len().div_ceil(threads).max(1)).collect();
        let mut start = 0;
        for chunk in chunks {
            let off = start;
            start += chunk.len();
            s.spawn(move || {
                for (k, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(run_point(cfg, cfg.deltas[off + k]).map(|p| p.row));
                }
            });
        }
    });
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (d, r) in cfg.deltas.iter().zip(results) {
        match r.expect("every sweep slot is filled") {
            Ok(row) => rows.push(row),
            Err(e) => failures.push((*d, e.to_string())),
        }
    }
    let model = regime_fit_model(cfg.regime.kind);
    let deltas: Vec<f64> = rows.iter().map(|r| r.delta).collect();
    let col = |f: &dyn Fn(&SweepRow) -> Option<f64>| -> Option<ScalingFit> {
        let v: Option<Vec<f64>> = rows.iter().map(f).collect();
        fit_scaling(&deltas, &v?, model).ok()
    };
    let fit_dominant = col(&|r| Some(r.dominant));
    let fit_corollary = col(&|r| Some(r.corollary));
    let fit_fd = col(&|r| r.fd_probe);
    PipelineReport { rows, failures, fit_dominant, fit_corollary, fit_fd }
}

/// Validates, sweeps and writes `sweep.csv`, `heat_asym.csv`,
/// `report.json` and `config.txt` into `out`.
pub fn run_pipeline(cfg: &ExperimentConfig, out: &Path, threads: usize) -> Result<PipelineReport> {
    cfg.validate()?;
    let report = sweep(cfg, threads);
    write_artifacts(cfg, &report, out)?;
    Ok(report)
}

pub fn write_artifacts(cfg: &ExperimentConfig, report: &PipelineReport, out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out)?;
    let files = [
        ("sweep.csv", sweep_csv(&report.rows)),
        ("heat_asym.csv", asym_csv(&report.rows)),
        ("report.json", report_json(cfg, report)),
        ("config.txt", cfg.to_text()),
    ];
    let mut paths = Vec::new();
    for (name, body) in files {
        let p = out.join(name);
        std::fs::write(&p, body)?;
        paths.push(p);
    }
    Ok(paths)
}

/// Plain-text summary of a `report.json`.
pub fn render_report(json_text: &str) -> Result<String> {
    let v: serde_json::Value = serde_json::from_str(json_text).map_err(|e| Error::Config(format!("report.json: {e}")))?;
    let mut s = String::new();
    let _ = writeln!(s, "regime {}  h {}  s {}  p {}  r {}  t {}", v["regime"], v["h"], v["s"], v["p"], v["r"], v["t"]);
    let _ = writeln!(s, "{:>12} {:>14} {:>14}", "delta", "energy_ratio", "fd_deviation");
    let empty = Vec::new();
    let deltas = v["deltas"].as_array().unwrap_or(&empty);
    for (i, d) in deltas.iter().enumerate() {
        let _ = writeln!(
            s,
            "{:>12} {:>14} {:>14}",
            d.as_f64().map(|x| format!("{x:.4e}")).unwrap_or_default(),
            v["energy_ratio"][i].as_f64().map(|x| format!("{x:.4}")).unwrap_or_default(),
            v["deviation"][i].as_f64().map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into()),
        );
    }
    for key in ["fit_dominant", "fit_corollary", "fit_fd"] {
        let f = &v[key];
        if f.is_null() {
            let _ = writeln!(s, "{key:<14} (not enough points)");
        } else {
            let _ = writeln!(
                s,
                "{key:<14} delta-exponent {:.4}  log-exponent {:.4}  residual {:.2e}",
                f["exponent"].as_f64().unwrap_or(f64::NAN),
                f["log_exponent"].as_f64().unwrap_or(f64::NAN),
                f["residual"].as_f64().unwrap_or(f64::NAN)
            );
        }
    }
    for f in v["failures"].as_array().unwrap_or(&empty) {
        let _ = writeln!(s, "failed delta {}: {}", f["delta"], f["error"]);
    }
    Ok(s)
}
