//! Independent checks on solution records.
//!
//! Nothing here touches solver state: a record is re-integrated as an initial
//! value problem with fixed-step RK4, and substituted into the Green's
//! function form of the problem,
//!
//! ```text
//! u(x) = int_{-1}^{1} G(x, y) lambda h(y) e^{u(y)} dy,
//! G(x, y) = (1 + min(x, y)) (1 - max(x, y)) / 2.
//! ```

use serde::{Deserialize, Serialize};

use crate::analytic::ProblemParams;
use crate::error::{Error, Result};
use crate::noneven::{matching_residual, PiecewiseSolution};
use crate::quadrature;

/// Largest RK4 step used when re-integrating.
pub const RK4_STEP: f64 = 1e-4;
/// Points at which the Green's function identity is checked.
pub const GREEN_GRID: usize = 200;
const SYMMETRY_GRID: usize = 2000;
const POSITIVITY_GRID: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyTolerances {
    pub ode: f64,
    pub green: f64,
    pub symmetry: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        VerifyTolerances {
            ode: 1e-7,
            green: 1e-7,
            symmetry: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub ode_residual_sup: f64,
    pub green_residual_sup: f64,
    pub boundary_error: f64,
    pub matching_residual: f64,
    /// `max |u(x) - u(-x)|`.
    pub symmetry_defect: f64,
    pub positivity_ok: bool,
}

impl VerificationReport {
    pub fn verified(&self, tol: &VerifyTolerances) -> bool {
        self.ode_residual_sup < tol.ode && self.green_residual_sup < tol.green && self.positivity_ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetry {
    Even,
    NonEven,
}

pub fn verify(sol: &PiecewiseSolution) -> Result<VerificationReport> {
    Ok(VerificationReport {
        ode_residual_sup: ode_residual(sol)?,
        green_residual_sup: green_residual(sol)?,
        boundary_error: sol.eval(-1.0).abs().max(sol.eval(1.0).abs()),
        matching_residual: matching_residual(sol).iter().fold(0.0, |m, r| m.max(r.abs())),
        symmetry_defect: symmetry_defect(sol),
        positivity_ok: sol.is_positive(POSITIVITY_GRID),
    })
}

/// Sup distance between the record and an RK4 solution of
/// `u'' + lambda h e^u = 0` started from `u(-1) = 0` with the record's slope.
pub fn ode_residual(sol: &PiecewiseSolution) -> Result<f64> {
    let alpha = sol.params.alpha();
    let lambda = sol.lambda;
    let mut y = [0.0, sol.derivative(-1.0)];
    let mut worst = sol.eval(-1.0).abs();
    for (lo, hi, weight) in [(-1.0, -alpha, 1.0), (-alpha, alpha, 0.0), (alpha, 1.0, 1.0)] {
        let f = |y: [f64; 2]| [y[1], -lambda * weight * y[0].exp()];
        let n = ((hi - lo) / RK4_STEP).ceil() as usize;
        let h = (hi - lo) / n as f64;
        for i in 0..n {
            let k1 = f(y);
            let k2 = f([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
            let k3 = f([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
            let k4 = f([y[0] + h * k3[0], y[1] + h * k3[1]]);
            for j in 0..2 {
                y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
            let x = if i + 1 == n { hi } else { lo + (i + 1) as f64 * h };
            if !y[0].is_finite() || !y[1].is_finite() {
                return Err(Error::Integration { x, reason: "re-integration overflowed" });
            }
            // at the joins compare against the side just integrated
            let exact = if x == -alpha {
                sol.left.value(x, lambda)
            } else if x == alpha {
                sol.a + sol.b * x
            } else {
                sol.eval(x)
            };
            worst = worst.max((y[0] - exact).abs());
        }
    }
    Ok(worst)
}

/// Green's function residual of a record.
pub fn green_residual(sol: &PiecewiseSolution) -> Result<f64> {
    let breaks = [sol.left.m, sol.right.m];
    green_residual_of(|x| sol.eval(x), sol.lambda, &sol.params, &breaks)
}

/// `max |u(x) - (T u)(x)|` on a uniform grid plus `+-alpha`, for any `u`.
/// `breaks` are extra points where the integrand is sharply peaked.
pub fn green_residual_of<U: Fn(f64) -> f64>(u: U, lambda: f64, params: &ProblemParams, breaks: &[f64]) -> Result<f64> {
    let alpha = params.alpha();
    let mut grid: Vec<f64> = (0..=GREEN_GRID).map(|i| -1.0 + 2.0 * i as f64 / GREEN_GRID as f64).collect();
    grid.extend([-alpha, alpha]);
    let mut worst: f64 = 0.0;
    for &x in &grid {
        let kernel = |y: f64| {
            let g = 0.5 * (1.0 + x.min(y)) * (1.0 - x.max(y));
            g * lambda * u(y).exp()
        };
        let mut integral = 0.0;
        for (lo, hi) in [(-1.0, -alpha), (alpha, 1.0)] {
            let mut cuts = vec![lo, hi];
            cuts.extend(std::iter::once(x).chain(breaks.iter().copied()).filter(|&c| c > lo && c < hi));
            cuts.sort_by(f64::total_cmp);
            for w in cuts.windows(2) {
                integral += quadrature::integrate(kernel, w[0], w[1], 1e-12)?;
            }
        }
        worst = worst.max((u(x) - integral).abs());
    }
    Ok(worst)
}

pub fn symmetry_defect(sol: &PiecewiseSolution) -> f64 {
    sol.symmetry_defect(SYMMETRY_GRID)
}

pub fn classify_symmetry(sol: &PiecewiseSolution, tol: f64) -> Symmetry {
    if symmetry_defect(sol) <= tol {
        Symmetry::Even
    } else {
        Symmetry::NonEven
    }
}

/// At most one distinct member of `solutions` at this `lambda` has sup-norm
/// at most one. Members are distinct when their states differ by more than
/// `1e-8` in some component.
pub fn check_small_amplitude_uniqueness(lambda: f64, params: &ProblemParams, solutions: &[PiecewiseSolution]) -> bool {
    let mut small: Vec<&PiecewiseSolution> = Vec::new();
    for s in solutions {
        let same_problem = s.params == *params && (s.lambda - lambda).abs() <= 1e-9 * lambda;
        if !same_problem || s.sup_norm() > 1.0 {
            continue;
        }
        let z = s.to_state();
        if small.iter().all(|t| (t.to_state() - z).amax() > 1e-8) {
            small.push(s);
        }
    }
    small.len() <= 1
}
