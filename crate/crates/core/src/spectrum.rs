//! Eigenvalues of the linearisation about an even solution,
//!
//! ```text
//! phi'' + Lambda(beta) h(x, alpha) e^{U(x; beta)} phi + mu phi = 0,  phi(-1) = phi(1) = 0,
//! ```
//!
//! by shooting in Prüfer variables `phi = r sin(theta)`, `phi' = r cos(theta)`.
//! The phase `theta(1; mu)` is continuous and strictly increasing in `mu`, and
//! `mu_k` is the unique `mu` with `theta(1; mu) = k pi`. On the middle interval
//! the potential vanishes and the solution is propagated in closed form; only
//! the two outer intervals are integrated numerically.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::ProblemParams;
use crate::error::{Error, Result};
use crate::ode::{self, Tolerances};
use crate::roots::brent_root;
use std::cell::RefCell;

/// A phase within this distance of `k pi` at `x = 1` is a zero at the
/// endpoint, not an interior zero.
const ENDPOINT_PHASE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootResult {
    /// `phi(1)` for the solution with `phi(-1) = 0`, `phi'(-1) = 1`.
    pub endpoint_value: f64,
    /// Sign changes of `phi` in the open interval `(-1, 1)`.
    pub interior_zero_count: usize,
    /// Prüfer phase at `x = 1`.
    pub phase: f64,
}

/// Prüfer state: phase and log-amplitude.
#[derive(Debug, Clone, Copy)]
struct Polar {
    theta: f64,
    log_r: f64,
}

impl Polar {
    fn value(&self) -> f64 {
        self.log_r.exp() * self.theta.sin()
    }
}

/// Angle of `(a, b) = (phi, phi')` reduced to `[0, pi)`.
fn reduced_angle(a: f64, b: f64) -> f64 {
    let mut t = a.atan2(b);
    if t < 0.0 {
        t += PI;
    }
    if t >= PI {
        t -= PI;
    }
    t
}

struct Shooter<'a> {
    params: &'a ProblemParams,
    beta: f64,
    tol: Tolerances,
}

impl<'a> Shooter<'a> {
    fn new(params: &'a ProblemParams, beta: f64) -> Self {
        Shooter {
            params,
            beta,
            tol: Tolerances::default(),
        }
    }

    /// Propagate between two points that lie in the closure of a single interval.
    fn propagate(&self, from: f64, to: f64, state: Polar, mu: f64) -> Result<Polar> {
        if from == to {
            return Ok(state);
        }
        let a = self.params.alpha();
        let mid = 0.5 * (from + to);
        if mid.abs() < a {
            Ok(propagate_free(state, mu, to - from))
        } else {
            let rhs = |x: f64, y: &[f64; 2]| {
                let q = self.params.potential_unchecked(x, self.beta) + mu;
                let (s, c) = y[0].sin_cos();
                [c * c + q * s * s, (1.0 - q) * s * c]
            };
            let y = ode::integrate(rhs, from, [state.theta, state.log_r], to, &self.tol, |_, _| {})?;
            Ok(Polar { theta: y[0], log_r: y[1] })
        }
    }

    /// Propagate from `-1` through every point of `stops` (sorted ascending,
    /// inside `[-1, 1]`), returning the state at each.
    fn sweep(&self, mu: f64, stops: &[f64]) -> Result<Vec<Polar>> {
        let a = self.params.alpha();
        let mut out = Vec::with_capacity(stops.len());
        let mut x = -1.0;
        let mut state = Polar { theta: 0.0, log_r: 0.0 };
        for &target in stops {
            for corner in [-a, a] {
                if x < corner && corner < target {
                    state = self.propagate(x, corner, state, mu)?;
                    x = corner;
                }
            }
            state = self.propagate(x, target, state, mu)?;
            x = target;
            out.push(state);
        }
        Ok(out)
    }

    fn shoot(&self, mu: f64) -> Result<ShootResult> {
        let end = self.sweep(mu, &[1.0])?[0];
        let zeros = ((end.theta - ENDPOINT_PHASE_TOL) / PI).ceil() - 1.0;
        Ok(ShootResult {
            endpoint_value: end.value(),
            interior_zero_count: zeros.max(0.0) as usize,
            phase: end.theta,
        })
    }
}

/// Closed-form propagation of `phi'' + mu phi = 0` over a length `len`.
fn propagate_free(state: Polar, mu: f64, len: f64) -> Polar {
    let (s0, c0) = state.theta.sin_cos();
    let block = (state.theta / PI).floor();
    let (a1, b1, log_gain, crossings);
    if mu > 0.0 {
        let w = mu.sqrt();
        let (sn, cs) = (w * len).sin_cos();
        let a1 = s0 * cs + c0 / w * sn;
        let b1 = -s0 * w * sn + c0 * cs;
        // phi ~ sin(chi), chi = w s + chi0, and theta shares its zeros with
        // chi; block and angle both come from chi so they cannot disagree
        let r0 = state.theta - block * PI;
        let chi0 = r0.sin().atan2(r0.cos() / w);
        let chi = chi0 + w * len;
        let turns = (chi / PI).floor();
        let rest = chi - turns * PI;
        return Polar {
            theta: (block + turns) * PI + rest.sin().atan2(w * rest.cos()),
            log_r: state.log_r + a1.hypot(b1).ln(),
        };
    } else if mu == 0.0 {
        a1 = s0 + c0 * len;
        b1 = c0;
        log_gain = 0.0;
        crossings = if s0 != 0.0 && s0 * a1 <= 0.0 { 1.0 } else { 0.0 };
    } else {
        // scaled by 2 e^{-k len} to keep large |mu| finite
        let k = (-mu).sqrt();
        let e = (-2.0 * k * len).exp();
        let (ch, sh) = (1.0 + e, 1.0 - e);
        a1 = s0 * ch + c0 / k * sh;
        b1 = s0 * k * sh + c0 * ch;
        log_gain = k * len - std::f64::consts::LN_2;
        crossings = if s0 != 0.0 && s0 * a1 <= 0.0 { 1.0 } else { 0.0 };
    }
    Polar {
        theta: (block + crossings) * PI + reduced_angle(a1, b1),
        log_r: state.log_r + log_gain + a1.hypot(b1).ln(),
    }
}

/// Shoot the linearised problem from `x = -1` with `phi(-1) = 0`, `phi'(-1) = 1`.
pub fn shoot_linearized(mu: f64, beta: f64, params: &ProblemParams) -> Result<ShootResult> {
    check_beta(beta)?;
    Shooter::new(params, beta).shoot(mu)
}

/// Options for the eigenvalue search.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpectrumOptions {
    /// Upper limit for the expanding search window in `mu`.
    pub max_window: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { max_window: 1e7 }
    }
}

/// The lowest eigenvalues at one even solution, with its Morse index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub beta: f64,
    pub params: ProblemParams,
    pub eigenvalues: Vec<f64>,
    pub morse_index: usize,
    pub degenerate: bool,
    pub degeneracy_tolerance: f64,
}

impl Spectrum {
    pub fn mu(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.eigenvalues.get(i).copied())
    }
}

/// `|mu| < 1e-8 (1 + |mu_2 - mu_1|)` flags a degenerate solution.
pub fn degeneracy_tolerance(mu1: f64, mu2: f64) -> f64 {
    1e-8 * (1.0 + (mu2 - mu1).abs())
}

/// The `count` smallest eigenvalues `mu_1 < ... < mu_count`.
pub fn eigenvalues(beta: f64, params: &ProblemParams, count: usize) -> Result<Spectrum> {
    eigenvalues_with(beta, params, count, &SpectrumOptions::default())
}

pub fn eigenvalues_with(
    beta: f64,
    params: &ProblemParams,
    count: usize,
    opts: &SpectrumOptions,
) -> Result<Spectrum> {
    check_beta(beta)?;
    if count == 0 {
        return Err(Error::Domain {
            name: "count",
            value: 0.0,
            domain: "count >= 1",
        });
    }
    let shooter = Shooter::new(params, beta);
    // every evaluation is kept so later roots start from the tightest bracket
    let seen: RefCell<Vec<(f64, f64)>> = RefCell::new(Vec::new());
    let phase = |mu: f64| -> Result<f64> {
        let t = shooter.shoot(mu)?.phase;
        seen.borrow_mut().push((mu, t));
        Ok(t)
    };

    // The potential is bounded by Lambda e^beta = (eta / (1 - alpha))^2,
    // so mu_1 lies above its negative.
    let peak = params.lambda_of_beta(beta)? * beta.exp();
    let mut lo = -peak - 1.0;
    while phase(lo)? >= PI {
        lo = 2.0 * lo - 1.0;
    }

    let wanted = count.max(2);
    let mut found = Vec::with_capacity(wanted);
    let mut window = 1.0_f64.max(lo + 1.0);
    for k in 1..=wanted {
        let target = k as f64 * PI;
        while phase(window)? <= target {
            window *= 2.0;
            if window > opts.max_window {
                return Err(Error::BracketExhausted {
                    found: found.len(),
                    wanted,
                    window: opts.max_window,
                });
            }
        }
        let mut failure = None;
        let (mut a, mut b) = (lo, window);
        for &(mu, t) in seen.borrow().iter() {
            if t <= target && mu > a {
                a = mu;
            } else if t > target && mu < b {
                b = mu;
            }
        }
        let root = brent_root(
            |mu| match phase(mu) {
                Ok(t) => t - target,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            a,
            b,
            0.0,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let root = root?;
        found.push(root.x);
        lo = root.x;
    }

    let tol = degeneracy_tolerance(found[0], found[1]);
    let degenerate = found.iter().any(|mu| mu.abs() < tol);
    let morse_index = found.iter().filter(|&&mu| mu < 0.0 && mu.abs() >= tol).count();
    found.truncate(count);
    Ok(Spectrum {
        beta,
        params: *params,
        eigenvalues: found,
        morse_index,
        degenerate,
        degeneracy_tolerance: tol,
    })
}

/// Number of negative eigenvalues; an error when the solution is degenerate
/// within tolerance.
pub fn morse_index(beta: f64, params: &ProblemParams) -> Result<usize> {
    // mu_3 > 0 always, so three eigenvalues decide the index.
    let spec = eigenvalues(beta, params, 3)?;
    if spec.degenerate {
        let min_abs_mu = spec.eigenvalues.iter().fold(f64::INFINITY, |m, mu| m.min(mu.abs()));
        return Err(Error::Degenerate {
            min_abs_mu,
            tolerance: spec.degeneracy_tolerance,
        });
    }
    Ok(spec.morse_index)
}

/// Eigenfunction for `mu_k`, sampled on `grid` (ascending, inside `[-1, 1]`),
/// scaled so the largest sample magnitude is 1 with `phi'(-1) > 0`.
pub fn eigenfunction(beta: f64, params: &ProblemParams, k: usize, grid: &[f64]) -> Result<Vec<f64>> {
    let spec = eigenvalues(beta, params, k)?;
    let mu = spec.eigenvalues[k - 1];
    eigenfunction_at(mu, beta, params, grid)
}

/// The shooting solution at a given `mu`, sampled and sup-normalised.
pub fn eigenfunction_at(mu: f64, beta: f64, params: &ProblemParams, grid: &[f64]) -> Result<Vec<f64>> {
    check_beta(beta)?;
    if grid.windows(2).any(|w| w[1] < w[0]) || grid.iter().any(|x| x.abs() > 1.0) {
        return Err(Error::Domain {
            name: "grid",
            value: f64::NAN,
            domain: "ascending points in [-1, 1]",
        });
    }
    let states = Shooter::new(params, beta).sweep(mu, grid)?;
    let values: Vec<f64> = states.iter().map(Polar::value).collect();
    let peak = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(values.into_iter().map(|v| v / peak).collect())
}

/// Finite-difference eigenvalues on `n_grid` uniform cells.
///
/// Second-order central differences for `-phi''` with the potential averaged
/// exactly over each node's dual cell; the jump of the weight then does not
/// spoil second-order convergence. Returns the `count` smallest eigenvalues of
/// the symmetric tridiagonal matrix.
pub fn eigenvalues_matrix(beta: f64, params: &ProblemParams, count: usize, n_grid: usize) -> Result<Vec<f64>> {
    check_beta(beta)?;
    if n_grid < 200 {
        return Err(Error::Domain {
            name: "n_grid",
            value: n_grid as f64,
            domain: "n_grid >= 200",
        });
    }
    let h = 2.0 / n_grid as f64;
    let inv_h2 = 1.0 / (h * h);
    let diag: Vec<f64> = (1..n_grid)
        .map(|i| {
            let x = -1.0 + i as f64 * h;
            let avg = params.potential_integral(x - 0.5 * h, x + 0.5 * h, beta) / h;
            2.0 * inv_h2 - avg
        })
        .collect();
    let off = vec![-inv_h2; n_grid - 2];
    Ok(tridiagonal_smallest(&diag, &off, count.min(diag.len())))
}

/// Smallest eigenvalues of a symmetric tridiagonal matrix by Sturm-sequence bisection.
pub(crate) fn tridiagonal_smallest(diag: &[f64], off: &[f64], count: usize) -> Vec<f64> {
    let n = diag.len();
    let below = |x: f64| -> usize {
        let mut neg = 0;
        let mut d = 1.0;
        for i in 0..n {
            let b2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
            d = diag[i] - x - b2 / d;
            if d == 0.0 {
                d = -f64::EPSILON * (diag[i].abs() + x.abs() + 1.0);
            }
            if d < 0.0 {
                neg += 1;
            }
        }
        neg
    };
    // Gershgorin
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (0..count)
        .map(|j| {
            let (mut a, mut b) = (lo, hi);
            while b - a > 4.0 * f64::EPSILON * (a.abs() + b.abs()) + f64::MIN_POSITIVE {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if below(m) > j {
                    b = m;
                } else {
                    a = m;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "beta",
            value: beta,
            domain: "beta > 0",
        })
    }
}
