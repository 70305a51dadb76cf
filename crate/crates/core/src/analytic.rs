//! Closed forms for the even family.
//!
//! The building block is the profile `w`, the solution of `w'' + e^w = 0`
//! with `w(0) = w'(0) = 0`:
//!
//! ```text
//! w(x) = log(1 - tanh^2(x / sqrt 2)) = -2 log cosh(x / sqrt 2)
//! ```
//!
//! `eta` inverts `beta = -w(x)` on `[0, inf)`. Every even positive solution
//! is a rescaled copy of `w` glued to a plateau of height `beta` on the
//! middle interval, and exists exactly at `lambda = Lambda(beta)`.

use std::f64::consts::{LN_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Value and first two derivatives of a scalar function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    fn mirrored_odd(self) -> Jet {
        Jet {
            value: -self.value,
            d1: self.d1,
            d2: -self.d2,
        }
    }

    fn mirrored_even(self) -> Jet {
        Jet {
            value: self.value,
            d1: -self.d1,
            d2: self.d2,
        }
    }
}

/// The weight parameter `alpha` of `h(x, alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ProblemParams {
    alpha: f64,
}

impl TryFrom<f64> for ProblemParams {
    type Error = Error;

    fn try_from(alpha: f64) -> Result<Self> {
        ProblemParams::new(alpha)
    }
}

impl From<ProblemParams> for f64 {
    fn from(p: ProblemParams) -> f64 {
        p.alpha
    }
}

impl ProblemParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(ProblemParams { alpha })
        } else {
            Err(Error::InvalidAlpha(alpha))
        }
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Length `1 - alpha` of each outer interval.
    #[inline]
    pub fn outer_len(&self) -> f64 {
        1.0 - self.alpha
    }

    /// The step weight: 0 on `|x| < alpha`, 1 on `alpha <= |x| <= 1`.
    #[inline]
    pub fn weight(&self, x: f64) -> f64 {
        if x.abs() < self.alpha {
            0.0
        } else {
            1.0
        }
    }

    /// `Lambda(beta) = (1 - alpha)^-2 e^-beta eta(beta)^2`.
    pub fn lambda_of_beta(&self, beta: f64) -> Result<f64> {
        check_positive("beta", beta)?;
        Ok(lambda_unchecked(self, beta))
    }

    /// `Lambda'(beta) = (1 - alpha)^-2 e^-beta eta (2 eta' - eta)`.
    pub fn d_lambda(&self, beta: f64) -> Result<f64> {
        check_positive("beta", beta)?;
        let e = eta_unchecked(beta);
        let ep = eta_prime_unchecked(beta);
        Ok((-beta).exp() * e * (2.0 * ep - e) / self.outer_len().powi(2))
    }

    /// Slope `eta(beta) / (1 - alpha)` of the rescaled profile on the outer intervals.
    pub(crate) fn scale(&self, beta: f64) -> f64 {
        eta_unchecked(beta) / self.outer_len()
    }

    /// `U(x; beta)`.
    pub fn u_even(&self, x: f64, beta: f64) -> Result<f64> {
        Ok(self.u_even_jet(x, beta)?.value)
    }

    /// `U'(x; beta)`; continuous across `+-alpha`.
    pub fn u_even_prime(&self, x: f64, beta: f64) -> Result<f64> {
        Ok(self.u_even_jet(x, beta)?.d1)
    }

    /// `U` with its first two derivatives. The second derivative is one-sided
    /// at `+-alpha`: the value from the interval containing `x` is returned.
    pub fn u_even_jet(&self, x: f64, beta: f64) -> Result<Jet> {
        check_unit(x)?;
        check_positive("beta", beta)?;
        Ok(self.u_even_jet_unchecked(x, beta))
    }

    fn u_even_jet_unchecked(&self, x: f64, beta: f64) -> Jet {
        if x < 0.0 {
            return self.u_even_jet_unchecked(-x, beta).mirrored_even();
        }
        if x < self.alpha {
            return Jet {
                value: beta,
                d1: 0.0,
                d2: 0.0,
            };
        }
        let k = self.scale(beta);
        let t = k * (x - self.alpha);
        Jet {
            value: w_profile(t) + beta,
            d1: k * w_prime(t),
            d2: k * k * w_second(t),
        }
    }

    /// `psi(x; beta)`: the null solution of the linearisation generated by
    /// the scaling symmetry of the outer profile. Even, equal to 2 on the
    /// middle interval.
    pub fn psi(&self, x: f64, beta: f64) -> Result<f64> {
        Ok(self.psi_jet(x, beta)?.value)
    }

    pub fn psi_jet(&self, x: f64, beta: f64) -> Result<Jet> {
        check_unit(x)?;
        check_positive("beta", beta)?;
        if x < 0.0 {
            return Ok(self.psi_jet(-x, beta)?.mirrored_even());
        }
        if x < self.alpha {
            return Ok(Jet {
                value: 2.0,
                d1: 0.0,
                d2: 0.0,
            });
        }
        let k = self.scale(beta);
        let t = k * (x - self.alpha);
        let (wp, ws, wt) = (w_prime(t), w_second(t), w_third(t));
        Ok(Jet {
            value: t * wp + 2.0,
            d1: k * (wp + t * ws),
            d2: k * k * (2.0 * ws + t * wt),
        })
    }

    /// `c1(beta) = -2 (1 - alpha)^2 / eta(beta)^2 - alpha^2`.
    pub fn c1(&self, beta: f64) -> Result<f64> {
        check_positive("beta", beta)?;
        let e = eta_unchecked(beta);
        Ok(-2.0 * self.outer_len().powi(2) / (e * e) - self.alpha * self.alpha)
    }

    /// `varphi(x; beta)`: the odd null solution of the linearisation. Equal to
    /// `2x` on the middle interval and `(c1 + alpha x) U' + 2 alpha` on the right.
    pub fn varphi(&self, x: f64, beta: f64) -> Result<f64> {
        Ok(self.varphi_jet(x, beta)?.value)
    }

    pub fn varphi_jet(&self, x: f64, beta: f64) -> Result<Jet> {
        check_unit(x)?;
        let c1 = self.c1(beta)?;
        if x < 0.0 {
            return Ok(self.varphi_jet(-x, beta)?.mirrored_odd());
        }
        if x < self.alpha {
            return Ok(Jet {
                value: 2.0 * x,
                d1: 2.0,
                d2: 0.0,
            });
        }
        let a = self.alpha;
        let k = self.scale(beta);
        let t = k * (x - a);
        let u1 = k * w_prime(t);
        let u2 = k * k * w_second(t);
        let u3 = k * k * k * w_third(t);
        let lead = c1 + a * x;
        Ok(Jet {
            value: lead * u1 + 2.0 * a,
            d1: a * u1 + lead * u2,
            d2: 2.0 * a * u2 + lead * u3,
        })
    }

    /// `g(x) = 2 (1 - alpha - alpha x^2) tanh(x) / x + 2 alpha`, which satisfies
    /// `varphi(1; beta) = g(eta(beta) / sqrt 2)`.
    pub fn g_fn(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain {
                name: "x",
                value: x,
                domain: "x > 0",
            });
        }
        let a = self.alpha;
        Ok(2.0 * (1.0 - a - a * x * x) * x.tanh() / x + 2.0 * a)
    }

    /// Coefficient `Lambda(beta) h(x, alpha) e^{U(x; beta)}` of the linearised
    /// problem, in the simplified form `k^2 sech^2(k (|x| - alpha) / sqrt 2)`
    /// with `k = eta(beta) / (1 - alpha)`.
    pub fn linearized_potential(&self, x: f64, beta: f64) -> Result<f64> {
        check_unit(x)?;
        check_positive("beta", beta)?;
        Ok(self.potential_unchecked(x, beta))
    }

    pub(crate) fn potential_unchecked(&self, x: f64, beta: f64) -> f64 {
        let ax = x.abs();
        if ax < self.alpha {
            return 0.0;
        }
        let k = self.scale(beta);
        k * k * exp_w(k * (ax - self.alpha))
    }

    /// Integral of the linearised potential over `[lo, hi]`, exact.
    pub(crate) fn potential_integral(&self, lo: f64, hi: f64, beta: f64) -> f64 {
        let k = self.scale(beta);
        // Antiderivative of k^2 sech^2(k (x - alpha) / sqrt 2) from alpha.
        let prim = |x: f64| -> f64 {
            let ax = x.abs();
            if ax < self.alpha {
                0.0
            } else {
                x.signum() * SQRT_2 * k * (k * (ax - self.alpha) / SQRT_2).tanh()
            }
        };
        prim(hi) - prim(lo)
    }
}

/// An even positive solution, parameterised by its amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvenSolution {
    pub params: ProblemParams,
    pub beta: f64,
    pub lambda: f64,
}

impl EvenSolution {
    pub fn new(params: ProblemParams, beta: f64) -> Result<Self> {
        let lambda = params.lambda_of_beta(beta)?;
        Ok(EvenSolution {
            params,
            beta,
            lambda,
        })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.params.u_even(x, self.beta)
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        self.params.u_even_prime(x, self.beta)
    }

    pub fn sup_norm(&self) -> f64 {
        self.beta
    }
}

/// `w(x) = log(1 - tanh^2(x / sqrt 2))`.
pub fn w_profile(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= 1.0 {
        let th = (x / SQRT_2).tanh();
        (-th * th).ln_1p()
    } else {
        // -2 log cosh(t) = -2|t| + 2 log 2 - 2 log(1 + e^{-2|t|})
        let two_t = SQRT_2 * ax;
        -two_t + 2.0 * LN_2 - 2.0 * (-two_t).exp().ln_1p()
    }
}

/// `w'(x) = -sqrt 2 tanh(x / sqrt 2)`.
pub fn w_prime(x: f64) -> f64 {
    -SQRT_2 * (x / SQRT_2).tanh()
}

/// `w''(x) = -e^{w(x)}`.
pub fn w_second(x: f64) -> f64 {
    -exp_w(x)
}

fn w_third(x: f64) -> f64 {
    -exp_w(x) * w_prime(x)
}

/// `e^{w(x)} = sech^2(x / sqrt 2)`.
pub(crate) fn exp_w(x: f64) -> f64 {
    w_profile(x).exp()
}

/// `eta(beta) = sqrt 2 artanh sqrt(1 - e^-beta)`, the inverse of `beta = -w(x)`.
///
/// Evaluated as `sqrt 2 (log(1 + s) + beta / 2)` with `s = sqrt(1 - e^-beta)`,
/// which is exact algebraically and never forms `1 - s`.
pub fn eta(beta: f64) -> Result<f64> {
    if beta < 0.0 || beta.is_nan() {
        return Err(Error::Domain {
            name: "beta",
            value: beta,
            domain: "beta >= 0",
        });
    }
    Ok(eta_unchecked(beta))
}

pub fn eta_prime(beta: f64) -> Result<f64> {
    check_positive("beta", beta)?;
    Ok(eta_prime_unchecked(beta))
}

pub(crate) fn eta_unchecked(beta: f64) -> f64 {
    let s = (-(-beta).exp_m1()).sqrt();
    SQRT_2 * (s.ln_1p() + 0.5 * beta)
}

fn eta_prime_unchecked(beta: f64) -> f64 {
    let s = (-(-beta).exp_m1()).sqrt();
    1.0 / (SQRT_2 * s)
}

pub(crate) fn lambda_unchecked(params: &ProblemParams, beta: f64) -> f64 {
    let e = eta_unchecked(beta);
    (-beta).exp() * e * e / params.outer_len().powi(2)
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value: v,
            domain: "> 0",
        })
    }
}

fn check_unit(x: f64) -> Result<()> {
    if x.abs() <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "x",
            value: x,
            domain: "|x| <= 1",
        })
    }
}
