//! Gauss–Legendre quadrature with order escalation and panel bisection.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const ORDERS: [usize; 5] = [8, 16, 32, 64, 128];
const MAX_DEPTH: usize = 30;

/// Nodes and weights of the `n`-point rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn rules() -> &'static [(Vec<f64>, Vec<f64>)] {
    static RULES: OnceLock<Vec<(Vec<f64>, Vec<f64>)>> = OnceLock::new();
    RULES.get_or_init(|| ORDERS.iter().map(|&n| gauss_legendre(n)).collect())
}

fn apply<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    rule.0.iter().zip(&rule.1).map(|(x, w)| w * f(c + r * x)).sum::<f64>() * r
}

/// `int_lo^hi f`, escalating the order until two successive rules agree to
/// `tol` (relative to the larger of 1 and the integral) and the same rule on
/// the two halves agrees as well, bisecting otherwise. Features narrower than
/// the node spacing must be split out by the caller.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    panel(&f, lo, hi, tol, 0)
}

fn panel<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64, depth: usize) -> Result<f64> {
    if lo == hi {
        return Ok(0.0);
    }
    let mut prev = apply(f, lo, hi, &rules()[0]);
    for rule in &rules()[1..] {
        let next = apply(f, lo, hi, rule);
        if !next.is_finite() {
            break;
        }
        let scale = tol * next.abs().max(1.0);
        if (next - prev).abs() <= scale {
            // successive orders can agree on a feature neither resolves
            let mid = 0.5 * (lo + hi);
            let split = apply(f, lo, mid, rule) + apply(f, mid, hi, rule);
            if (split - next).abs() <= scale {
                return Ok(next);
            }
            break;
        }
        prev = next;
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Quadrature { lo, hi });
    }
    let mid = 0.5 * (lo + hi);
    Ok(panel(f, lo, mid, tol, depth + 1)? + panel(f, mid, hi, tol, depth + 1)?)
}
