//! Special amplitudes and inversion of `lambda = Lambda(beta)`.

use serde::{Deserialize, Serialize};

use crate::analytic::{eta_unchecked, lambda_unchecked, ProblemParams};
use crate::error::{Error, Result};

/// Default bracket for `beta1` and `beta2`.
pub const BETA_BRACKET: (f64, f64) = (1e-6, 50.0);

/// Largest amplitude tried when widening the upper inversion bracket;
/// `e^-beta` underflows shortly after.
const BETA_CEILING: f64 = 700.0;

/// A scalar root located by bisection, with the residual at the returned point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Bisection on a sign-changing bracket, run until the bracket can no longer
/// shrink in floating point or its width is below `tol`.
pub fn bracketed_root<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<Root>
where
    F: FnMut(f64) -> f64,
{
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(Root { x: lo, residual: 0.0, iterations: 0 });
    }
    if f_hi == 0.0 {
        return Ok(Root { x: hi, residual: 0.0, iterations: 0 });
    }
    if !(f_lo.signum() * f_hi.signum() < 0.0) {
        return Err(Error::NoSignChange { lo, hi, f_lo, f_hi });
    }
    let mut iterations = 0;
    let mut best = if f_lo.abs() < f_hi.abs() { (lo, f_lo) } else { (hi, f_hi) };
    while iterations < 400 {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid.abs() < best.1.abs() {
            best = (mid, f_mid);
        }
        if f_mid == 0.0 {
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol {
            break;
        }
    }
    Ok(Root {
        x: best.0,
        residual: best.1,
        iterations,
    })
}

/// Brent's method on a sign-changing bracket: inverse quadratic and secant
/// steps, falling back to bisection, until the bracket is below
/// `tol + 4 eps |x|`.
pub fn brent_root<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<Root>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(Root { x: a, residual: 0.0, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, residual: 0.0, iterations: 0 });
    }
    if !(fa.signum() * fb.signum() < 0.0) {
        return Err(Error::NoSignChange { lo, hi, f_lo: fa, f_hi: fb });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    let mut iterations = 0;
    while iterations < 200 {
        iterations += 1;
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            (a, b, c) = (b, c, b);
            (fa, fb, fc) = (fb, fc, fb);
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol1 || fb == 0.0 {
            break;
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * m * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::NoSignChange { lo, hi, f_lo: fa, f_hi: fb });
        }
    }
    Ok(Root { x: b, residual: fb, iterations })
}

/// Bisection followed by Newton steps, each kept only if it reduces `|f|`.
pub fn bracketed_root_polished<F, D>(mut f: F, mut df: D, lo: f64, hi: f64, tol: f64) -> Result<Root>
where
    F: FnMut(f64) -> f64,
    D: FnMut(f64) -> f64,
{
    let mut root = bracketed_root(&mut f, lo, hi, tol)?;
    for _ in 0..4 {
        let slope = df(root.x);
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let x = root.x - root.residual / slope;
        let r = f(x);
        if r.abs() < root.residual.abs() {
            root = Root { x, residual: r, iterations: root.iterations + 1 };
        } else {
            break;
        }
    }
    Ok(root)
}

fn beta1_equation(beta: f64) -> f64 {
    let s = (-(-beta).exp_m1()).sqrt();
    // artanh(s) = eta / sqrt 2
    s * eta_unchecked(beta) / std::f64::consts::SQRT_2 - 1.0
}

/// Residual of `sqrt(1 - e^-beta) artanh sqrt(1 - e^-beta) = 1`.
pub fn beta1_residual(beta: f64) -> f64 {
    beta1_equation(beta)
}

/// The fold amplitude: unique positive root of `s artanh s = 1`, `s = sqrt(1 - e^-beta)`.
/// Independent of alpha.
pub fn solve_beta1() -> Result<f64> {
    let (lo, hi) = BETA_BRACKET;
    Ok(bracketed_root(beta1_equation, lo, hi, 0.0)?.x)
}

/// The symmetry-breaking amplitude: unique root of `beta -> varphi(1; beta)`,
/// evaluated as `g(eta(beta) / sqrt 2)`.
pub fn solve_beta2(params: &ProblemParams) -> Result<f64> {
    let (lo, hi) = BETA_BRACKET;
    let f = |b: f64| beta2_residual(params, b);
    Ok(bracketed_root(f, lo, hi, 0.0)?.x)
}

pub fn beta2_residual(params: &ProblemParams, beta: f64) -> f64 {
    let x = eta_unchecked(beta) / std::f64::consts::SQRT_2;
    let a = params.alpha();
    2.0 * (1.0 - a - a * x * x) * x.tanh() / x + 2.0 * a
}

/// `beta1`, `beta2(alpha)` and the corresponding values of `Lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecialPoints {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub beta1_residual: f64,
    pub beta2_residual: f64,
}

impl SpecialPoints {
    pub fn compute(params: &ProblemParams) -> Result<Self> {
        let beta1 = solve_beta1()?;
        let beta2 = solve_beta2(params)?;
        Ok(SpecialPoints {
            alpha: params.alpha(),
            beta1,
            beta2,
            lambda1: lambda_unchecked(params, beta1),
            lambda2: lambda_unchecked(params, beta2),
            beta1_residual: beta1_residual(beta1),
            beta2_residual: beta2_residual(params, beta2),
        })
    }
}

/// The amplitudes of the even solutions at a given `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvenRoots {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl EvenRoots {
    pub fn count(&self) -> usize {
        self.lower.is_some() as usize + self.upper.is_some() as usize
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> {
        self.lower.into_iter().chain(self.upper)
    }
}

/// Solve `Lambda(beta) = lambda`: two roots below the fold value, the double
/// root `beta1` at it, none above.
pub fn invert_lambda(lambda: f64, params: &ProblemParams) -> Result<EvenRoots> {
    if !(lambda > 0.0) {
        return Err(Error::Domain {
            name: "lambda",
            value: lambda,
            domain: "lambda > 0",
        });
    }
    let beta1 = solve_beta1()?;
    let lambda1 = lambda_unchecked(params, beta1);
    if lambda > lambda1 {
        return Ok(EvenRoots { lower: None, upper: None });
    }
    if lambda == lambda1 {
        return Ok(EvenRoots { lower: Some(beta1), upper: Some(beta1) });
    }
    let f = |b: f64| lambda_unchecked(params, b) / lambda - 1.0;

    // Lambda(beta) ~ 2 beta / (1 - alpha)^2 near zero.
    let mut lo = beta1;
    while f(lo) > 0.0 {
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE {
            return Err(Error::NoSignChange { lo, hi: beta1, f_lo: f(lo), f_hi: f(beta1) });
        }
    }
    let lower = bracketed_root(f, lo, beta1, 0.0)?.x;

    let mut hi = BETA_BRACKET.1.max(2.0 * beta1);
    while f(hi) > 0.0 && hi < BETA_CEILING {
        hi = (2.0 * hi).min(BETA_CEILING);
    }
    let upper = bracketed_root(f, beta1, hi, 0.0)?.x;
    Ok(EvenRoots {
        lower: Some(lower),
        upper: Some(upper),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain bisection on `s artanh(s) = 1` in the variable `s`, using the
    /// library `atanh`, mapped back through `beta = -log(1 - s^2)`.
    fn beta1_oracle() -> f64 {
        let (mut lo, mut hi) = (0.5_f64, 0.99_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.atanh() - 1.0 < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = 0.5 * (lo + hi);
        -(1.0 - s * s).ln()
    }

    #[test]
    fn bracketed_root_basics() {
        let r = bracketed_root(|x| x - 1.0, 0.0, 2.0, 0.0).unwrap();
        assert_eq!(r.x, 1.0);
        let r = bracketed_root(|x| x * x - 2.0, 1.0, 2.0, 0.0).unwrap();
        assert!((r.x - 2f64.sqrt()).abs() < 1e-14);
        assert!(matches!(
            bracketed_root(|x| x * x + 1.0, -1.0, 1.0, 0.0),
            Err(Error::NoSignChange { .. })
        ));
        // reversed bracket is accepted
        let r = bracketed_root(|x| x - 0.25, 1.0, 0.0, 1e-12).unwrap();
        assert!((r.x - 0.25).abs() < 1e-12);
    }

    #[test]
    fn polish_never_makes_things_worse() {
        let r = bracketed_root_polished(|x| x.powi(3) - 3.0, |x| 3.0 * x * x, 0.0, 3.0, 1e-3).unwrap();
        assert!((r.x - 3f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn beta1_value() {
        let b1 = solve_beta1().unwrap();
        // "1.18..." read as a truncation: the root lies in [1.18, 1.19)
        assert!((1.18..1.19).contains(&b1));
        assert!(beta1_residual(b1).abs() < 1e-14);
        assert!((b1 - beta1_oracle()).abs() < 1e-12);
        // high precision: 1.186842168634389097
        assert!((b1 - 1.186842168634389097).abs() < 1e-14);
    }

    #[test]
    fn beta1_through_generic_bracketing_matches() {
        let r = bracketed_root(beta1_residual, 0.3, 4.0, 0.0).unwrap();
        assert!((r.x - solve_beta1().unwrap()).abs() < 1e-14);
        let r = bracketed_root(beta1_residual, 1.0, 20.0, 0.0).unwrap();
        assert!((r.x - solve_beta1().unwrap()).abs() < 1e-14);
    }

    #[test]
    fn beta2_exceeds_beta1() {
        let b1 = solve_beta1().unwrap();
        for alpha in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let params = ProblemParams::new(alpha).unwrap();
            let b2 = solve_beta2(&params).unwrap();
            assert!(b2 > b1, "alpha = {alpha}");
            assert!(params.varphi(1.0, b2).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn beta2_matches_bisection_oracle() {
        let params = ProblemParams::new(0.5).unwrap();
        // Independent bisection in x = eta / sqrt 2 on g, then beta = -w(sqrt 2 x),
        // with w written through cosh.
        let g = |x: f64| 2.0 * (0.5 - 0.5 * x * x) * x.tanh() / x + 1.0;
        let (mut lo, mut hi) = (1e-3_f64, 20.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = 0.5 * (lo + hi);
        let oracle = 2.0 * x.cosh().ln();
        let b2 = solve_beta2(&params).unwrap();
        assert!((b2 - oracle).abs() < 1e-10);
        // high precision: 2.026165662514002196
        assert!((b2 - 2.026165662514002196).abs() < 1e-12);
    }

    #[test]
    fn beta2_high_precision_across_alpha() {
        // tests/oracles/high_precision.py
        let table = [
            (0.1, 5.700096052327143212),
            (0.3, 2.894476736323249681),
            (0.7, 1.574409627893357672),
            (0.9, 1.292217763298952727),
        ];
        for (alpha, expected) in table {
            let b2 = solve_beta2(&ProblemParams::new(alpha).unwrap()).unwrap();
            assert!((b2 - expected).abs() < 1e-11, "alpha = {alpha}: {b2}");
        }
    }

    #[test]
    fn invert_lambda_cases() {
        let params = ProblemParams::new(0.5).unwrap();
        let b1 = solve_beta1().unwrap();
        let l1 = params.lambda_of_beta(b1).unwrap();
        let at_fold = invert_lambda(l1, &params).unwrap();
        assert_eq!((at_fold.lower, at_fold.upper), (Some(b1), Some(b1)));
        assert_eq!(invert_lambda(l1 + 0.1, &params).unwrap().count(), 0);
        assert!(invert_lambda(0.0, &params).is_err());
        assert!(invert_lambda(-1.0, &params).is_err());

        let lam = params.lambda_of_beta(0.5).unwrap();
        let roots = invert_lambda(lam, &params).unwrap();
        assert!((roots.lower.unwrap() - 0.5).abs() < 1e-10);
        let up = roots.upper.unwrap();
        assert!(up > b1);
        assert!((params.lambda_of_beta(up).unwrap() - lam).abs() < 1e-10 * lam);
    }

    #[test]
    fn invert_lambda_round_trip() {
        let b1 = solve_beta1().unwrap();
        for alpha in [0.2, 0.6] {
            let params = ProblemParams::new(alpha).unwrap();
            for beta in [1e-3, 0.05, 0.7, 1.1, 1.3, 3.0, 12.0, 45.0, 120.0] {
                let lam = params.lambda_of_beta(beta).unwrap();
                let roots = invert_lambda(lam, &params).unwrap();
                for r in roots.iter() {
                    let back = params.lambda_of_beta(r).unwrap();
                    assert!((back - lam).abs() < 1e-10 * lam.max(1e-300) + 1e-300);
                }
                let same = if beta < b1 { roots.lower } else { roots.upper }.unwrap();
                assert!((same - beta).abs() < 1e-8 * beta.max(1.0), "{beta} -> {same}");
            }
        }
    }

    #[test]
    fn beta1_does_not_depend_on_alpha() {
        let b1 = solve_beta1().unwrap();
        for alpha in [0.1, 0.9] {
            let sp = SpecialPoints::compute(&ProblemParams::new(alpha).unwrap()).unwrap();
            assert_eq!(sp.beta1, b1);
            assert!(sp.beta2_residual.abs() < 1e-12);
        }
    }
}
