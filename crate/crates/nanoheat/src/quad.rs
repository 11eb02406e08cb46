//! Gauss–Legendre rules and adaptive quadrature used by the operators and
//! by the oracle checks.

use std::sync::OnceLock;

#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss–Legendre rule on [-1, 1] computed by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const CACHED: [usize; 8] = [1, 2, 4, 8, 10, 16, 20, 32];

/// Cached rule for the orders used in hot loops; other orders are built on demand.
pub fn rule(n: usize) -> &'static Rule {
    static RULES: OnceLock<Vec<Rule>> = OnceLock::new();
    let rules = RULES.get_or_init(|| CACHED.iter().map(|&k| gauss_legendre(k)).collect());
    match CACHED.iter().position(|&k| k == n) {
        Some(i) => &rules[i],
        None => panic!("no cached Gauss-Legendre rule of order {n}"),
    }
}

fn fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, r: &Rule) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    r.nodes.iter().zip(&r.weights).map(|(&x, &w)| w * f(c + h * x)).sum::<f64>() * h
}

/// Adaptive Gauss–Legendre (10 vs 20 points per panel) on a finite interval.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let lo = rule(10);
    let hi = rule(20);
    let mut total = 0.0f64;
    let mut stack = vec![(a, b, 0u32)];
    while let Some((x0, x1, depth)) = stack.pop() {
        let coarse = fixed(&f, x0, x1, lo);
        let fine = fixed(&f, x0, x1, hi);
        let scale = fine.abs().max(total.abs()).max(1e-300);
        if (fine - coarse).abs() <= tol * scale || depth >= 50 {
            total += fine;
        } else {
            let m = 0.5 * (x0 + x1);
            stack.push((m, x1, depth + 1));
            stack.push((x0, m, depth + 1));
        }
    }
    total
}

/// ∫_a^∞ f via t = a + s/(1-s), s ∈ [0, 1).
pub fn adaptive_semi_infinite<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> f64 {
    adaptive(
        |s| {
            if s >= 1.0 {
                return 0.0;
            }
            let u = 1.0 - s;
            let t = a + s / u;
            let v = f(t) / (u * u);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}
