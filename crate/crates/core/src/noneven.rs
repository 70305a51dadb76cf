//! General positive solutions and the branch of non-even solutions.
//!
//! Every solution is linear on the middle interval and a `sech^2` profile on
//! each outer interval:
//!
//! ```text
//! u(x) = A + B x                                   |x| < alpha
//! u(x) = log(2 d^2 / lambda) - 2 log cosh(d (x - m))   on each outer interval
//! ```
//!
//! Boundary values and `C^1` matching at `+-alpha` give six equations in the
//! seven unknowns `(lambda, A, B, d_L, m_L, d_R, m_R)`. Internally the unknowns
//! are carried as `z = (log lambda, A, B, log d_L, m_L, log d_R, m_R)`, which
//! keeps `lambda` and `d` positive and makes the arclength metric relative in
//! the quantities that span orders of magnitude along the branch.

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::analytic::{EvenSolution, ProblemParams};
use crate::error::{Error, Result};
use crate::roots::SpecialPoints;

pub const UNKNOWNS: usize = 7;
pub const EQUATIONS: usize = 6;

pub type State = SVector<f64, UNKNOWNS>;
type Square = SMatrix<f64, UNKNOWNS, UNKNOWNS>;
pub type Jacobian = SMatrix<f64, EQUATIONS, UNKNOWNS>;

const LAMBDA: usize = 0;
const AMPLITUDE: usize = 1;
const SLOPE: usize = 2;

/// `log cosh t` without overflow.
fn log_cosh(t: f64) -> f64 {
    let a = t.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// One outer segment `log(2 d^2 / lambda) - 2 log cosh(d (x - m))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterProfile {
    pub d: f64,
    pub m: f64,
}

impl OuterProfile {
    /// Height at the vertex `x = m`.
    pub fn peak(&self, lambda: f64) -> f64 {
        (2.0 * self.d * self.d / lambda).ln()
    }

    pub fn value(&self, x: f64, lambda: f64) -> f64 {
        self.peak(lambda) - 2.0 * log_cosh(self.d * (x - self.m))
    }

    pub fn slope(&self, x: f64) -> f64 {
        -2.0 * self.d * (self.d * (x - self.m)).tanh()
    }

    pub fn second(&self, x: f64) -> f64 {
        let c = (self.d * (x - self.m)).cosh();
        -2.0 * self.d * self.d / (c * c)
    }

    /// Derivatives of `(value, slope)` at `x` with respect to `(log d, m)`.
    fn partials(&self, x: f64) -> ([f64; 2], [f64; 2]) {
        let d = self.d;
        let tau = d * (x - self.m);
        let th = tau.tanh();
        let sech2 = 1.0 - th * th;
        let value = [2.0 - 2.0 * th * tau, 2.0 * d * th];
        let slope = [-2.0 * d * th - 2.0 * d * sech2 * tau, 2.0 * d * d * sech2];
        (value, slope)
    }
}

/// A positive solution in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseSolution {
    pub params: ProblemParams,
    pub lambda: f64,
    /// `u = a + b x` on the middle interval.
    pub a: f64,
    pub b: f64,
    pub left: OuterProfile,
    pub right: OuterProfile,
}

impl PiecewiseSolution {
    /// The even solution `U(.; beta)` written in piecewise form.
    pub fn from_even(even: &EvenSolution) -> Self {
        let alpha = even.params.alpha();
        let d = (0.5 * even.lambda * even.beta.exp()).sqrt();
        PiecewiseSolution {
            params: even.params,
            lambda: even.lambda,
            a: even.beta,
            b: 0.0,
            left: OuterProfile { d, m: -alpha },
            right: OuterProfile { d, m: alpha },
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let alpha = self.params.alpha();
        if x <= -alpha {
            self.left.value(x, self.lambda)
        } else if x >= alpha {
            self.right.value(x, self.lambda)
        } else {
            self.a + self.b * x
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let alpha = self.params.alpha();
        if x <= -alpha {
            self.left.slope(x)
        } else if x >= alpha {
            self.right.slope(x)
        } else {
            self.b
        }
    }

    /// Mirror image `x -> u(-x)`.
    pub fn reflect(&self) -> Self {
        PiecewiseSolution {
            params: self.params,
            lambda: self.lambda,
            a: self.a,
            b: -self.b,
            left: OuterProfile { d: self.right.d, m: -self.right.m },
            right: OuterProfile { d: self.left.d, m: -self.left.m },
        }
    }

    pub fn to_state(&self) -> State {
        State::from([
            self.lambda.ln(),
            self.a,
            self.b,
            self.left.d.ln(),
            self.left.m,
            self.right.d.ln(),
            self.right.m,
        ])
    }

    pub fn from_state(params: ProblemParams, z: &State) -> Self {
        PiecewiseSolution {
            params,
            lambda: z[0].exp(),
            a: z[1],
            b: z[2],
            left: OuterProfile { d: z[3].exp(), m: z[4] },
            right: OuterProfile { d: z[5].exp(), m: z[6] },
        }
    }

    /// Maximum of `u` and where it is attained.
    ///
    /// Outer segments peak at their vertex when it lies inside the segment,
    /// otherwise at the inner end; a tilted middle segment peaks at an end.
    /// Ties resolve to the right, so a plateau reports `alpha`.
    pub fn sup_norm_and_max_location(&self) -> (f64, f64) {
        let alpha = self.params.alpha();
        let mut best = (self.left.value(-alpha, self.lambda), -alpha);
        if (-1.0..=-alpha).contains(&self.left.m) {
            best = (self.left.peak(self.lambda), self.left.m);
        }
        let right = if (alpha..=1.0).contains(&self.right.m) {
            (self.right.peak(self.lambda), self.right.m)
        } else {
            (self.right.value(alpha, self.lambda), alpha)
        };
        if right.0 >= best.0 {
            best = right;
        }
        best
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm_and_max_location().0
    }

    /// `max |u(x) - u(-x)|` over `n + 1` points of `[0, 1]`.
    pub fn symmetry_defect(&self, n: usize) -> f64 {
        (0..=n)
            .map(|i| {
                let x = i as f64 / n as f64;
                (self.eval(x) - self.eval(-x)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `u > 0` at `n - 1` interior points.
    pub fn is_positive(&self, n: usize) -> bool {
        (1..n).all(|i| self.eval(-1.0 + 2.0 * i as f64 / n as f64) > 0.0)
    }
}

/// `[u_R(1), u_R(a) - (A + B a), u_R'(a) - B, u_L(-1), u_L(-a) - (A - B a), u_L'(-a) - B]`.
pub fn matching_residual(sol: &PiecewiseSolution) -> [f64; EQUATIONS] {
    let a = sol.params.alpha();
    let lam = sol.lambda;
    [
        sol.right.value(1.0, lam),
        sol.right.value(a, lam) - (sol.a + sol.b * a),
        sol.right.slope(a) - sol.b,
        sol.left.value(-1.0, lam),
        sol.left.value(-a, lam) - (sol.a - sol.b * a),
        sol.left.slope(-a) - sol.b,
    ]
}

fn residual_norm(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Analytic Jacobian of [`matching_residual`] with respect to the internal
/// state `(log lambda, A, B, log d_L, m_L, log d_R, m_R)`.
pub fn jacobian(sol: &PiecewiseSolution) -> Jacobian {
    let a = sol.params.alpha();
    let mut j = Jacobian::zeros();
    let (r1, _) = sol.right.partials(1.0);
    let (ra, rsa) = sol.right.partials(a);
    let (l1, _) = sol.left.partials(-1.0);
    let (la, lsa) = sol.left.partials(-a);

    // right boundary and matching
    j[(0, LAMBDA)] = -1.0;
    j[(0, 5)] = r1[0];
    j[(0, 6)] = r1[1];
    j[(1, LAMBDA)] = -1.0;
    j[(1, AMPLITUDE)] = -1.0;
    j[(1, SLOPE)] = -a;
    j[(1, 5)] = ra[0];
    j[(1, 6)] = ra[1];
    j[(2, SLOPE)] = -1.0;
    j[(2, 5)] = rsa[0];
    j[(2, 6)] = rsa[1];
    // left boundary and matching
    j[(3, LAMBDA)] = -1.0;
    j[(3, 3)] = l1[0];
    j[(3, 4)] = l1[1];
    j[(4, LAMBDA)] = -1.0;
    j[(4, AMPLITUDE)] = -1.0;
    j[(4, SLOPE)] = a;
    j[(4, 3)] = la[0];
    j[(4, 4)] = la[1];
    j[(5, SLOPE)] = -1.0;
    j[(5, 3)] = lsa[0];
    j[(5, 4)] = lsa[1];
    j
}

/// Central-difference Jacobian, for checking [`jacobian`].
pub fn jacobian_fd(sol: &PiecewiseSolution, h: f64) -> Jacobian {
    let z = sol.to_state();
    let mut j = Jacobian::zeros();
    for c in 0..UNKNOWNS {
        let mut zp = z;
        let mut zm = z;
        zp[c] += h;
        zm[c] -= h;
        let rp = matching_residual(&PiecewiseSolution::from_state(sol.params, &zp));
        let rm = matching_residual(&PiecewiseSolution::from_state(sol.params, &zm));
        for r in 0..EQUATIONS {
            j[(r, c)] = (rp[r] - rm[r]) / (2.0 * h);
        }
    }
    j
}

/// Smallest singular value of the 6x6 Jacobian with `lambda` held fixed.
pub fn min_singular_value_fixed_lambda(sol: &PiecewiseSolution) -> f64 {
    let j = jacobian(sol);
    let sq: SMatrix<f64, 6, 6> = j.fixed_columns::<6>(1).into_owned();
    sq.singular_values().min()
}

/// The scalar that closes the seven-unknown, six-equation system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    Lambda(f64),
    /// Middle slope `B`.
    Asymmetry(f64),
    SupNorm(f64),
    /// `<z - anchor, tangent> = step` in internal coordinates.
    Arclength { anchor: State, tangent: State, step: f64 },
}

impl Constraint {
    fn residual_and_gradient(&self, sol: &PiecewiseSolution) -> (f64, State) {
        let z = sol.to_state();
        let mut grad = State::zeros();
        match *self {
            Constraint::Lambda(lam) => {
                grad[LAMBDA] = 1.0;
                (z[LAMBDA] - lam.ln(), grad)
            }
            Constraint::Asymmetry(b) => {
                grad[SLOPE] = 1.0;
                (z[SLOPE] - b, grad)
            }
            Constraint::SupNorm(target) => {
                let alpha = sol.params.alpha();
                let (sup, loc) = sol.sup_norm_and_max_location();
                if loc == sol.right.m && loc > alpha || loc == sol.left.m && loc < -alpha {
                    // vertex height log 2 + 2 log d - log lambda
                    let col = if loc > 0.0 { 5 } else { 3 };
                    grad[LAMBDA] = -1.0;
                    grad[col] = 2.0;
                } else {
                    grad[AMPLITUDE] = 1.0;
                    grad[SLOPE] = loc;
                }
                (sup - target, grad)
            }
            Constraint::Arclength { anchor, tangent, step } => ((z - anchor).dot(&tangent) - step, tangent),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iterations: usize,
    /// Condition estimates above this are reported as a singular Jacobian.
    pub max_condition: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-12,
            max_iterations: 30,
            max_condition: 1e14,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOutcome {
    pub solution: PiecewiseSolution,
    pub iterations: usize,
    pub residual: f64,
    /// Condition estimate of the bordered Jacobian at the last iterate.
    pub condition: f64,
}

fn bordered(sol: &PiecewiseSolution, grad: &State) -> Square {
    let j = jacobian(sol);
    let mut m = Square::zeros();
    m.fixed_rows_mut::<6>(0).copy_from(&j);
    m.set_row(6, &grad.transpose());
    m
}

fn condition(m: &Square) -> f64 {
    let sv = m.singular_values();
    let (lo, hi) = (sv.min(), sv.max());
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Newton's method on the matching system closed by `frozen`.
pub fn newton_solve(initial: &PiecewiseSolution, frozen: &Constraint) -> Result<NewtonOutcome> {
    newton_solve_with(initial, frozen, &NewtonOptions::default())
}

pub fn newton_solve_with(
    initial: &PiecewiseSolution,
    frozen: &Constraint,
    opts: &NewtonOptions,
) -> Result<NewtonOutcome> {
    let params = initial.params;
    let mut sol = *initial;
    let mut cond = f64::NAN;
    for iterations in 0..=opts.max_iterations {
        let r = matching_residual(&sol);
        let (c, grad) = frozen.residual_and_gradient(&sol);
        let mut rhs = State::zeros();
        rhs.fixed_rows_mut::<6>(0).copy_from_slice(&r);
        rhs[6] = c;
        let norm = residual_norm(rhs.as_slice());
        if !norm.is_finite() {
            return Err(Error::Divergence { iterations, residual: norm });
        }
        if norm < opts.tol {
            return Ok(NewtonOutcome {
                solution: sol,
                iterations,
                residual: norm,
                condition: cond,
            });
        }
        if iterations == opts.max_iterations {
            return Err(Error::Divergence { iterations, residual: norm });
        }
        let m = bordered(&sol, &grad);
        cond = condition(&m);
        if !(cond < opts.max_condition) {
            return Err(Error::SingularJacobian { condition: cond });
        }
        let step = m
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularJacobian { condition: cond })?;
        let z = sol.to_state() - step;
        sol = PiecewiseSolution::from_state(params, &z);
    }
    unreachable!()
}

/// Step-size control for the continuation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StepControl {
    pub initial: f64,
    pub min: f64,
    pub max: f64,
    /// Newton iterations at or below which a step counts as easy.
    pub easy_iterations: usize,
    /// Corrector iterations before a step is rejected and halved.
    pub max_corrector_iterations: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            initial: 0.02,
            min: 1e-8,
            max: 0.1,
            easy_iterations: 3,
            max_corrector_iterations: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StopCriteria {
    pub max_supnorm: f64,
    pub min_lambda: f64,
    pub max_points: usize,
}

impl Default for StopCriteria {
    fn default() -> Self {
        StopCriteria {
            max_supnorm: 30.0,
            min_lambda: 1e-6,
            max_points: 5000,
        }
    }
}

/// The two-sided bound `Lambda(|u|) <= lambda < 4 Lambda(|u|)` and the
/// identity `lambda = ((1 - alpha) / (1 - |m|))^2 Lambda(|u|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsCheck {
    pub lambda_of_sup: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    /// Relative defect of the identity through the maximum location.
    pub identity_defect: f64,
}

impl BoundsCheck {
    pub fn holds(&self) -> bool {
        self.lower_ok && self.upper_ok
    }
}

pub fn bounds_check(sol: &PiecewiseSolution) -> BoundsCheck {
    let (sup, m) = sol.sup_norm_and_max_location();
    let lambda_of_sup = sol.params.lambda_of_beta(sup).unwrap_or(f64::NAN);
    let ratio = sol.params.outer_len() / (1.0 - m.abs());
    let predicted = ratio * ratio * lambda_of_sup;
    BoundsCheck {
        lambda_of_sup,
        // the lower bound is attained by even solutions; allow rounding
        lower_ok: sol.lambda >= lambda_of_sup * (1.0 - 1e-12),
        upper_ok: sol.lambda < 4.0 * lambda_of_sup,
        identity_defect: (sol.lambda - predicted).abs() / sol.lambda,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    /// Arclength from the first non-even point, in internal coordinates.
    pub s: f64,
    pub solution: PiecewiseSolution,
    pub sup_norm: f64,
    pub max_location: f64,
    /// `max |u(x) - u(-x)|`.
    pub asymmetry: f64,
    pub residual: f64,
    pub condition: f64,
    pub bounds: BoundsCheck,
}

impl BranchPoint {
    fn new(s: f64, solution: PiecewiseSolution, condition: f64) -> Self {
        let (sup_norm, max_location) = solution.sup_norm_and_max_location();
        BranchPoint {
            s,
            solution,
            sup_norm,
            max_location,
            asymmetry: solution.symmetry_defect(400),
            residual: residual_norm(&matching_residual(&solution)),
            condition,
            bounds: bounds_check(&solution),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum Termination {
    MaxSupNorm,
    MinLambda,
    MaxPoints,
    StepCollapse { step: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub origin: SpecialPoints,
    pub points: Vec<BranchPoint>,
    pub termination: Termination,
}

impl Branch {
    pub fn params(&self) -> ProblemParams {
        ProblemParams::new(self.origin.alpha).expect("branch built from valid params")
    }

    /// Non-even solutions at a given `lambda`, located by interpolating
    /// between bracketing branch points and solving with `lambda` frozen.
    pub fn solutions_at_lambda(&self, lambda: f64) -> Vec<PiecewiseSolution> {
        let target = lambda.ln();
        let mut out: Vec<PiecewiseSolution> = Vec::new();
        for pair in self.points.windows(2) {
            let (z0, z1) = (pair[0].solution.to_state(), pair[1].solution.to_state());
            let (l0, l1) = (z0[LAMBDA] - target, z1[LAMBDA] - target);
            if l0 * l1 > 0.0 || l0 == l1 {
                continue;
            }
            let t = l0 / (l0 - l1);
            let guess = PiecewiseSolution::from_state(self.params(), &(z0 + (z1 - z0) * t));
            if let Ok(found) = newton_solve(&guess, &Constraint::Lambda(lambda)) {
                let z = found.solution.to_state();
                if out.iter().all(|s| (s.to_state() - z).amax() > 1e-8) {
                    out.push(found.solution);
                }
            }
        }
        out
    }
}

/// Unit vector spanning the odd part of the two-dimensional kernel of the
/// Jacobian at the symmetry-breaking point, with positive `B` component.
fn odd_direction(sol: &PiecewiseSolution) -> State {
    let j = jacobian(sol);
    // square up with a zero row so the SVD returns the full right basis
    let mut sq = Square::zeros();
    sq.fixed_rows_mut::<6>(0).copy_from(&j);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..UNKNOWNS).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let v1: State = vt.row(order[0]).transpose();
    let v2: State = vt.row(order[1]).transpose();
    // the even tangent moves lambda, the odd mode does not
    let mut dir = v1 * v2[LAMBDA] - v2 * v1[LAMBDA];
    if dir[SLOPE] < 0.0 {
        dir = -dir;
    }
    dir.normalize()
}

fn tangent(sol: &PiecewiseSolution, previous: &State) -> Result<State> {
    let m = bordered(sol, previous);
    let mut rhs = State::zeros();
    rhs[6] = 1.0;
    let t = m
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularJacobian { condition: f64::INFINITY })?;
    Ok(t.normalize())
}

/// Trace the non-even branch from the even solution at `beta2`, stopping at
/// the first criterion met. A collapsed step ends the branch early and is
/// recorded in [`Branch::termination`].
pub fn continue_branch_partial(params: &ProblemParams, step: &StepControl, stop: &StopCriteria) -> Result<Branch> {
    let origin = SpecialPoints::compute(params)?;
    let even = EvenSolution::new(*params, origin.beta2)?;
    let base = PiecewiseSolution::from_even(&even);
    let dir = odd_direction(&base);

    let eps = 1e-3 * origin.beta2;
    let guess = PiecewiseSolution::from_state(*params, &(base.to_state() + dir * (eps / dir[SLOPE])));
    let first = newton_solve(&guess, &Constraint::Asymmetry(eps))?;
    let mut current = first.solution;
    let mut t = tangent(&current, &dir)?;
    let mut points = vec![BranchPoint::new(0.0, current, first.condition)];

    let opts = NewtonOptions {
        max_iterations: step.max_corrector_iterations,
        ..NewtonOptions::default()
    };
    let mut ds = step.initial;
    let mut s = 0.0;
    let mut easy = 0;
    let termination = loop {
        let last = points.last().expect("non-empty");
        if last.sup_norm >= stop.max_supnorm {
            break Termination::MaxSupNorm;
        }
        if last.solution.lambda <= stop.min_lambda {
            break Termination::MinLambda;
        }
        if points.len() >= stop.max_points {
            break Termination::MaxPoints;
        }
        if ds < step.min {
            break Termination::StepCollapse { step: ds };
        }
        let anchor = current.to_state();
        let predicted = PiecewiseSolution::from_state(*params, &(anchor + t * ds));
        let constraint = Constraint::Arclength { anchor, tangent: t, step: ds };
        let accepted = newton_solve_with(&predicted, &constraint, &opts)
            .ok()
            .filter(|o| residual_norm(&matching_residual(&o.solution)) < 1e-10 && o.solution.b > 0.0);
        match accepted {
            Some(outcome) => {
                let next_t = tangent(&outcome.solution, &t)?;
                current = outcome.solution;
                t = next_t;
                s += ds;
                points.push(BranchPoint::new(s, current, outcome.condition));
                if outcome.iterations <= step.easy_iterations {
                    easy += 1;
                    if easy >= 3 {
                        ds = (2.0 * ds).min(step.max);
                        easy = 0;
                    }
                } else {
                    easy = 0;
                }
            }
            None => {
                ds *= 0.5;
                easy = 0;
            }
        }
    };
    Ok(Branch {
        origin,
        points,
        termination,
    })
}

/// As [`continue_branch_partial`], but a collapsed step is an error.
pub fn continue_branch(params: &ProblemParams, step: &StepControl, stop: &StopCriteria) -> Result<Branch> {
    let branch = continue_branch_partial(params, step, stop)?;
    match branch.termination {
        Termination::StepCollapse { step: min_step } => Err(Error::StepCollapse {
            min_step,
            points: branch.points.len(),
        }),
        _ => Ok(branch),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::{solve_beta1, solve_beta2};

    fn half() -> ProblemParams {
        ProblemParams::new(0.5).unwrap()
    }

    fn embedding(params: ProblemParams, beta: f64) -> PiecewiseSolution {
        PiecewiseSolution::from_even(&EvenSolution::new(params, beta).unwrap())
    }

    #[test]
    fn even_embedding_satisfies_matching() {
        let params = half();
        for beta in [0.5, solve_beta1().unwrap(), solve_beta2(&params).unwrap()] {
            let sol = embedding(params, beta);
            assert!(residual_norm(&matching_residual(&sol)) < 1e-10);
            for i in 0..=50 {
                let x = -1.0 + i as f64 / 25.0;
                assert!((sol.eval(x) - params.u_even(x, beta).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn perturbation_scales_residual() {
        let params = half();
        let base = embedding(params, 1.4);
        let norms: Vec<f64> = [1e-3, 2e-3]
            .iter()
            .map(|da| {
                let mut s = base;
                s.a += da;
                residual_norm(&matching_residual(&s))
            })
            .collect();
        assert!(norms[0] > 5e-4 && norms[0] < 2e-3);
        assert!((norms[1] / norms[0] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn analytic_jacobian_matches_finite_differences() {
        let params = ProblemParams::new(0.35).unwrap();
        let mut sol = embedding(params, 2.2);
        sol.b = 0.3;
        sol.left.m = -0.2;
        sol.right.d *= 1.1;
        let diff = (jacobian(&sol) - jacobian_fd(&sol, 1e-6)).amax();
        assert!(diff < 1e-6, "{diff}");
    }

    #[test]
    fn reflection_is_an_involution() {
        let params = half();
        let mut sol = embedding(params, 2.0);
        sol.b = 0.7;
        sol.left.m = 0.1;
        assert_eq!(sol.reflect().reflect(), sol);
        let even = embedding(params, 2.0);
        assert_eq!(even.reflect(), even);
        for i in 0..=20 {
            let x = -1.0 + i as f64 / 10.0;
            assert!((sol.reflect().eval(x) - sol.eval(-x)).abs() < 1e-13);
        }
    }

    #[test]
    fn sup_norm_of_embedding_reports_alpha() {
        let params = half();
        let sol = embedding(params, 1.7);
        let (sup, m) = sol.sup_norm_and_max_location();
        assert!((sup - 1.7).abs() < 1e-13);
        assert_eq!(m, 0.5);
    }

    #[test]
    fn newton_returns_to_nearby_even_solution() {
        let params = half();
        let b2 = solve_beta2(&params).unwrap();
        let target = params.lambda_of_beta(b2 - 0.1).unwrap();
        let out = newton_solve(&embedding(params, b2 - 0.15), &Constraint::Lambda(target)).unwrap();
        assert!(out.solution.b.abs() < 1e-10);
        assert!((out.solution.a - (b2 - 0.1)).abs() < 1e-9);
    }

    #[test]
    fn newton_fixed_point_takes_no_iterations() {
        let params = half();
        let sol = embedding(params, 1.0);
        let out = newton_solve(&sol, &Constraint::Lambda(sol.lambda)).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.solution, sol);
    }

    #[test]
    fn newton_reports_singular_system_at_bifurcation() {
        // At beta2 the asymmetry constraint leaves the even tangent in the kernel.
        let params = half();
        let base = embedding(params, solve_beta2(&params).unwrap());
        let mut guess = base;
        guess.b = 1e-3;
        let err = newton_solve(&guess, &Constraint::Asymmetry(1e-3));
        assert!(err.is_err());
    }

    #[test]
    fn branch_switching_from_beta2() {
        let params = half();
        let base = embedding(params, solve_beta2(&params).unwrap());
        let dir = odd_direction(&base);
        assert!(dir[LAMBDA].abs() < 1e-12 && dir[AMPLITUDE].abs() < 1e-6);
        let eps = 1e-3;
        let guess = PiecewiseSolution::from_state(params, &(base.to_state() + dir * (eps / dir[SLOPE])));
        let out = newton_solve(&guess, &Constraint::Asymmetry(eps)).unwrap();
        assert!((out.solution.b - eps).abs() < 1e-14);
        assert!(out.solution.symmetry_defect(200) > 1e-4);
        assert!(residual_norm(&matching_residual(&out.solution)) < 1e-12);
    }

    #[test]
    fn kernel_opens_at_beta2() {
        let params = half();
        let b2 = solve_beta2(&params).unwrap();
        let at = min_singular_value_fixed_lambda(&embedding(params, b2));
        let below = min_singular_value_fixed_lambda(&embedding(params, b2 - 0.2));
        let above = min_singular_value_fixed_lambda(&embedding(params, b2 + 0.2));
        assert!(at < 1e-7, "{at}");
        assert!(below > 1e-2 && above > 1e-2, "{below} {above}");
    }

    #[test]
    fn sup_norm_constraint_converges() {
        let params = half();
        let sol = embedding(params, 1.0);
        let out = newton_solve(&sol, &Constraint::SupNorm(1.05)).unwrap();
        assert!((out.solution.sup_norm() - 1.05).abs() < 1e-12);
        assert!(out.solution.b.abs() < 1e-10);
    }

    #[test]
    fn short_branch_is_consistent() {
        let params = half();
        let stop = StopCriteria { max_points: 30, ..StopCriteria::default() };
        let branch = continue_branch(&params, &StepControl::default(), &stop).unwrap();
        assert_eq!(branch.points.len(), 30);
        assert_eq!(branch.termination, Termination::MaxPoints);
        for p in &branch.points {
            assert!(p.residual < 1e-10);
            assert!(p.bounds.holds());
            assert!(p.bounds.identity_defect < 1e-8);
            assert!(p.asymmetry > 0.0);
            assert!(p.solution.is_positive(400));
            let mirrored = p.solution.reflect();
            assert!(residual_norm(&matching_residual(&mirrored)) < 1e-10);
            let (sup, m) = mirrored.sup_norm_and_max_location();
            assert!((sup - p.sup_norm).abs() < 1e-12 && (m + p.max_location).abs() < 1e-12);
            assert!(p.max_location >= 0.5 && 2.0 * p.max_location - 1.0 < 0.5);
        }
        assert!(branch.points.windows(2).all(|w| w[1].s > w[0].s));
    }
}
