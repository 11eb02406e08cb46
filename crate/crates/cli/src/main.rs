//! `nanoheat` command-line runner.

use clap::{Parser, Subcommand, ValueEnum};
use nanoheat::acceptance::{run_acceptance, AcceptanceOptions};
use nanoheat::config::{dielectric_material, ExperimentConfig};
use nanoheat::geometry::build_mesh;
use nanoheat::heatkernels::{
    double_layer_jump, np_laplace_apply, singular_bound_check, spatial_mass, time_integral_point,
    time_integral_quadrature, CircleBoundary, CircleHeatOperators, HeatKernelParams, KernelRole, SpaceTimeDensity,
    TimeGrid,
};
use nanoheat::material::{
    dielectric_diagnostic, permittivity, plasmonic_diagnostic, select_dielectric_frequency,
    select_plasmonic_frequency, te_contrast, tm_contrast, RegimeChoice,
};
use nanoheat::pipeline::{asym_csv, render_report, run_pipeline, run_point, scatter_point, sweep_csv, SweepRow};
use nanoheat::spectral::{assemble_log_potential, eigs, eigs_magnetization_harmonic, HarmonicGradientBasis};
use nanoheat::{oracle, specfun, Result};
use serde_json::json;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "nanoheat", version, about = "Photothermal heating of small 2D nanoparticles")]
struct Cli {
    /// Experiment configuration (flat `key = value` file).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Comma-separated acceptance criteria (numbers or names).
    #[arg(long, global = true, value_delimiter = ',')]
    only: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Regime {
    Plasmonic,
    Dielectric,
}

#[derive(Subcommand)]
enum Command {
    /// Special functions against their quadrature oracles (CSV).
    SelftestSpecfun,
    /// Resonant frequency, permittivity, contrast and diagnostic (JSON).
    Material {
        #[arg(long, value_enum)]
        regime: Regime,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        /// Eigenvalue (plasmonic) or normalised eigenvalue (dielectric); computed on a disc when omitted.
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Leading eigenpairs for each delta of the config (CSV).
    Spectral {
        /// Also write mesh_<k>.csv for every delta into the output directory.
        #[arg(long)]
        dump_mesh: bool,
        #[arg(long, default_value_t = 6)]
        count: usize,
    },
    /// Scattering stage of the sweep (CSV).
    Scatter,
    /// Heat-kernel identities.
    HeatKernels {
        /// Print the identity table.
        #[arg(long)]
        selftest: bool,
    },
    /// Finite-difference probe values for each delta; writes heat_ref.csv.
    HeatRef,
    /// Dominant and corollary heat terms for each delta; writes heat_asym.csv.
    HeatAsym,
    /// Full sweep; writes sweep.csv, heat_asym.csv, report.json, config.txt.
    Pipeline,
    /// Runs the acceptance criteria.
    Acceptance,
    /// Summarises report.json from the output directory.
    Report,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(o) = &cli.out {
        cfg.output = o.clone();
    }
    cfg.validate_structure()?;
    Ok(cfg)
}

fn selftest_specfun() -> Result<String> {
    let mut s = String::from("# schema: nanoheat.specfun.v1\nfunction,x,value,oracle,abs_diff\n");
    let mut row = |name: &str, x: f64, v: f64, o: f64| {
        let _ = writeln!(s, "{name},{x:.16e},{v:.16e},{o:.16e},{:.16e}", (v - o).abs());
    };
    for x in nanoheat::acceptance::E1_GRID {
        row("E1", x, specfun::exp_integral_e1(x)?, oracle::e1(x));
    }
    for x in nanoheat::acceptance::GAMMA_HALF_GRID {
        row("UpperGammaHalf", x, specfun::upper_gamma_half(x)?, oracle::upper_gamma_half(x));
    }
    for x in nanoheat::acceptance::HANKEL_GRID {
        let h = specfun::hankel1_0(x)?;
        row("J0", x, h.re, oracle::j0(x));
        row("Y0", x, h.im, oracle::y0(x));
    }
    Ok(s)
}

fn material(regime: Regime, delta: f64, h: f64, s: f64, lambda: Option<f64>) -> Result<String> {
    let base = ExperimentConfig::default();
    let medium = base.medium;
    let v = match regime {
        Regime::Plasmonic => {
            let mat = base.material;
            let lambda = match lambda {
                Some(l) => l,
                None => {
                    let mesh = build_mesh(base.shape, delta, base.center, 400)?;
                    let es = eigs_magnetization_harmonic(&mesh, &HarmonicGradientBasis::new(&mesh, 4)?)?;
                    es.eigenvalues[es.dominant_index()]
                }
            };
            let choice = RegimeChoice::plasmonic(h);
            let f = select_plasmonic_frequency(&mat, &medium, lambda, delta, &choice)?;
            let eps = permittivity(&mat, f.omega, f.gamma_damp)?;
            let a = tm_contrast(eps, medium.eps_m)?;
            json!({
                "regime": "plasmonic", "delta": delta, "h": h, "lambda": lambda,
                "omega": f.omega, "gamma": f.gamma_damp,
                "eps_p": [eps.re, eps.im], "alpha": [a.re, a.im],
                "diagnostic": plasmonic_diagnostic(&mat, &medium, &f, lambda)?,
            })
        }
        Regime::Dielectric => {
            let mat = dielectric_material();
            let scale = delta * delta * delta.ln().abs();
            let lbar = match lambda {
                Some(l) => l,
                None => {
                    let mesh = build_mesh(base.shape, delta, base.center, 400)?;
                    let es = eigs(&assemble_log_potential(&mesh)?, &mesh.areas())?;
                    es.eigenvalues[es.dominant_index()] / scale
                }
            };
            let choice = RegimeChoice::dielectric(h, s);
            let f = select_dielectric_frequency(&mat, &medium, lbar, delta, &choice)?;
            let eps = permittivity(&mat, f.omega, f.gamma_damp)?;
            let tau = te_contrast(eps, medium.eps_m)?;
            json!({
                "regime": "dielectric", "delta": delta, "h": h, "s": s, "lambda_bar": lbar,
                "omega": f.omega, "gamma": f.gamma_damp,
                "eps_p": [eps.re, eps.im], "tau_p": [tau.re, tau.im],
                "diagnostic": dielectric_diagnostic(&mat, &medium, &f, lbar * scale)?,
            })
        }
    };
    Ok(serde_json::to_string_pretty(&v).unwrap_or_default())
}

fn spectral(cfg: &ExperimentConfig, dump: bool, count: usize) -> Result<String> {
    let mut s = String::from("# schema: nanoheat.spectral.v1\ndelta,index,eigenvalue,mean_sq\n");
    for (k, &delta) in cfg.deltas.iter().enumerate() {
        let mesh = build_mesh(cfg.shape, delta, cfg.center, cfg.discretization.cells)?;
        if dump {
            write_out(&cfg.output, &format!("mesh_{k}.csv"), &mesh.dump_csv())?;
        }
        let es = match cfg.regime.kind {
            nanoheat::material::RegimeKind::Plasmonic => {
                eigs_magnetization_harmonic(&mesh, &HarmonicGradientBasis::new(&mesh, cfg.discretization.basis_degree)?)?
            }
            nanoheat::material::RegimeKind::Dielectric => eigs(&assemble_log_potential(&mesh)?, &mesh.areas())?,
        };
        for i in 0..count.min(es.len()) {
            let _ = writeln!(s, "{delta:.16e},{i},{:.16e},{:.16e}", es.eigenvalues[i], es.means[i].norm_sq());
        }
    }
    Ok(s)
}

fn rows_with(cfg: &ExperimentConfig, f: impl Fn(&ExperimentConfig, f64) -> Result<SweepRow>) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for &d in &cfg.deltas {
        match f(cfg, d) {
            Ok(r) => rows.push(r),
            Err(e) => eprintln!("delta = {d}: {e}"),
        }
    }
    rows
}

fn heat_selftest() -> Result<(String, bool)> {
    let mut s = format!("{:<34} {:>12} {:>10}  result\n", "identity", "residual", "tolerance");
    let mut all = true;
    let mut line = |name: &str, res: f64, tol: f64| {
        let ok = res <= tol;
        all &= ok;
        let _ = writeln!(s, "{name:<34} {res:>12.3e} {tol:>10.1e}  {}", if ok { "pass" } else { "fail" });
    };
    let mut worst: f64 = 0.0;
    for r in [0.01, 0.1, 0.5, 1.0, 2.0] {
        for t in [0.05, 0.2, 0.5, 1.0, 3.0] {
            let q = time_integral_quadrature(2.0, r, t);
            worst = worst.max((time_integral_point(2.0, r, t)? - q).abs() / q);
        }
    }
    line("time integral closed form", worst, 1e-9);
    let mass = [(1.0, 1.0), (3.0, 0.2), (0.5, 4.0)].iter().map(|&(a, t)| (spatial_mass(a, t) - 1.0).abs()).fold(0.0, f64::max);
    line("unit spatial mass", mass, 1e-8);
    let mesh = build_mesh(nanoheat::geometry::Shape::Disc, 0.3, [0.0, 0.0], 400)?.with_boundary_nodes(256);
    let np = np_laplace_apply(&mesh, &[1.0; 256])?.iter().map(|v| (v + 0.5).abs()).fold(0.0, f64::max);
    line("NP constant density -> -1/2", np, 1e-10);
    let params = HeatKernelParams::new(1.0, KernelRole::Interior)?;
    let n = 128;
    let circle = CircleBoundary::new([0.0, 0.0], 1.0, n)?;
    let grid = TimeGrid::new(1.0, n)?;
    let ops = CircleHeatOperators::new(params, circle, grid);
    let phi = SpaceTimeDensity::from_fn(n, grid, |i, t| circle.angle(i).cos() * (PI * t).sin());
    line("Calderon S H = (1/2-K)(1/2+K) 128", ops.calderon_residual(&phi)?, 0.10);
    line("double-layer jump 128", double_layer_jump(&ops, &phi, 2, &[n], 16)?.max_rel_error, 0.03);
    let sb = singular_bound_check(1.0, 0.25, 100)?;
    line("singular bound (t-tau)^-r |x-y|^-2+2r", if sb.passed { 0.0 } else { 1.0 }, 0.5);
    Ok((s, all))
}

fn write_out(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let p = dir.join(name);
    std::fs::write(&p, body)?;
    Ok(p)
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::SelftestSpecfun => print!("{}", selftest_specfun()?),
        Command::Material { regime, delta, h, s, lambda } => println!("{}", material(*regime, *delta, *h, *s, *lambda)?),
        Command::Spectral { dump_mesh, count } => print!("{}", spectral(&load_config(cli)?, *dump_mesh, *count)?),
        Command::Scatter => {
            let cfg = load_config(cli)?;
            print!("{}", sweep_csv(&rows_with(&cfg, |c, d| scatter_point(c, d).map(|p| p.row))));
        }
        Command::HeatKernels { selftest } => {
            if !selftest {
                eprintln!("nothing to do; pass --selftest");
                return Ok(true);
            }
            let (table, ok) = heat_selftest()?;
            print!("{table}");
            return Ok(ok);
        }
        Command::HeatRef => {
            let mut cfg = load_config(cli)?;
            cfg.discretization.fd = true;
            let rows = rows_with(&cfg, |c, d| run_point(c, d).map(|p| p.row));
            let mut s = String::from("# schema: nanoheat.heat-ref.v1\ndelta,distance,t,fd_probe,dominant,deviation\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    r.delta,
                    r.distance,
                    cfg.probe.t,
                    r.fd_probe.unwrap_or(f64::NAN),
                    r.dominant,
                    r.deviation().unwrap_or(f64::NAN)
                );
            }
            let p = write_out(&cfg.output, "heat_ref.csv", &s)?;
            print!("{s}");
            eprintln!("wrote {}", p.display());
            return Ok(rows.len() == cfg.deltas.len());
        }
        Command::HeatAsym => {
            let mut cfg = load_config(cli)?;
            cfg.discretization.fd = false;
            let rows = rows_with(&cfg, |c, d| run_point(c, d).map(|p| p.row));
            let s = asym_csv(&rows);
            let p = write_out(&cfg.output, "heat_asym.csv", &s)?;
            print!("{s}");
            eprintln!("wrote {}", p.display());
            return Ok(rows.len() == cfg.deltas.len());
        }
        Command::Pipeline => {
            let cfg = load_config(cli)?;
            let rep = run_pipeline(&cfg, &cfg.output, cli.threads)?;
            for (d, e) in &rep.failures {
                eprintln!("delta = {d}: {e}");
            }
            let json = std::fs::read_to_string(cfg.output.join("report.json"))?;
            print!("{}", render_report(&json)?);
            return Ok(!rep.failed());
        }
        Command::Acceptance => {
            let opts = AcceptanceOptions { only: cli.only.clone(), ..Default::default() };
            let out = run_acceptance(&opts, |o| println!("{}", o.line()));
            let failed = out.iter().filter(|o| !o.passed).count();
            println!("acceptance: {} passed, {} failed", out.len() - failed, failed);
            return Ok(failed == 0);
        }
        Command::Report => {
            let dir = match &cli.out {
                Some(o) => o.clone(),
                None => load_config(cli)?.output,
            };
            let json = std::fs::read_to_string(dir.join("report.json"))?;
            print!("{}", render_report(&json)?);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
