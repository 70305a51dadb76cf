//! Acceptance criteria 1 to 9, one line each.
//!
//! Runs without the libtest harness so every verdict is printed; exits
//! non-zero when any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use liouville_step::analytic::{EvenSolution, ProblemParams};
use liouville_step::noneven::{continue_branch, matching_residual, Branch, PiecewiseSolution, StepControl, StopCriteria};
use liouville_step::roots::{invert_lambda, solve_beta1, solve_beta2};
use liouville_step::spectrum::{eigenfunction, eigenvalues, eigenvalues_matrix, Spectrum};
use liouville_step::verify::{check_small_amplitude_uniqueness, ode_residual, green_residual, verify, VerifyTolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const ALPHAS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
const SEED: u64 = 20_261_015;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn params(alpha: f64) -> ProblemParams {
    ProblemParams::new(alpha).unwrap()
}

fn criterion1() -> Verdict {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_liouville"))
        .args(["special-points", "--alpha", "0.5", "--format", "json"])
        .output()
        .expect("run liouville");
    let elapsed = start.elapsed();
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json output");
    let beta1 = doc["results"]["beta1"].as_f64().unwrap();
    let residual = doc["results"]["beta1_residual"].as_f64().unwrap();
    let pass = out.status.success()
        && (1.175..=1.185).contains(&beta1)
        && residual.abs() < 1e-14
        && elapsed < Duration::from_secs(1);
    verdict(
        pass,
        format!("beta1 = {beta1:.12} (want [1.175, 1.185]), residual {residual:.1e}, {elapsed:.2?}"),
    )
}

struct GridPoint {
    alpha: f64,
    beta: f64,
    beta1: f64,
    beta2: f64,
    spectrum: Result<Spectrum, String>,
}

fn morse_grid() -> (Vec<GridPoint>, Duration) {
    let start = Instant::now();
    let beta1 = solve_beta1().unwrap();
    let jobs: Vec<(f64, f64, f64)> = ALPHAS
        .iter()
        .flat_map(|&a| {
            let beta2 = solve_beta2(&params(a)).unwrap();
            let (lo, hi) = (beta1 / 4.0, 3.0 * beta2);
            (1..=200).map(move |i| (a, lo + (hi - lo) * i as f64 / 201.0, beta2))
        })
        .collect();
    let points = jobs
        .par_iter()
        .map(|&(alpha, beta, beta2)| GridPoint {
            alpha,
            beta,
            beta1,
            beta2,
            spectrum: eigenvalues(beta, &params(alpha), 3).map_err(|e| e.to_string()),
        })
        .collect();
    (points, start.elapsed())
}

fn criterion2(grid: &[GridPoint], elapsed: Duration) -> Verdict {
    let mut checked = 0;
    let mut wrong = Vec::new();
    for p in grid {
        let band = 1e-4;
        if (p.beta - p.beta1).abs() <= band || (p.beta - p.beta2).abs() <= band {
            continue;
        }
        checked += 1;
        let expected = if p.beta < p.beta1 {
            0
        } else if p.beta < p.beta2 {
            1
        } else {
            2
        };
        match &p.spectrum {
            Ok(s) if !s.degenerate && s.morse_index == expected => {}
            Ok(s) => wrong.push(format!("(alpha {}, beta {:.6}) -> {}", p.alpha, p.beta, s.morse_index)),
            Err(e) => wrong.push(format!("(alpha {}, beta {:.6}) error {e}", p.alpha, p.beta)),
        }
    }
    let pass = wrong.is_empty() && elapsed < Duration::from_secs(120);
    verdict(
        pass,
        format!("{checked} grid points, {} misclassified {:?}, {elapsed:.1?}", wrong.len(), wrong.iter().take(3).collect::<Vec<_>>()),
    )
}

fn criterion3() -> Verdict {
    let p = params(0.5);
    let beta1 = solve_beta1().unwrap();
    let beta2 = solve_beta2(&p).unwrap();
    let grid: Vec<f64> = (0..=2000).map(|i| -1.0 + i as f64 / 1000.0).collect();

    let sup_error = |shot: &[f64], exact: &dyn Fn(f64) -> f64| {
        let raw: Vec<f64> = grid.iter().map(|&x| exact(x)).collect();
        let peak = raw.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let dot: f64 = raw.iter().zip(shot).map(|(a, b)| a * b).sum();
        let sign = dot.signum();
        raw.iter().zip(shot).map(|(r, s)| (sign * r / peak - s).abs()).fold(0.0, f64::max)
    };
    let psi_err = sup_error(&eigenfunction(beta1, &p, 1, &grid).unwrap(), &|x| p.psi(x, beta1).unwrap());
    let phi_err = sup_error(&eigenfunction(beta2, &p, 2, &grid).unwrap(), &|x| p.varphi(x, beta2).unwrap());
    let mu1 = eigenvalues(beta1, &p, 2).unwrap().eigenvalues[0];
    let mu2 = eigenvalues(beta2, &p, 2).unwrap().eigenvalues[1];
    let pass = psi_err < 1e-6 && phi_err < 1e-6 && mu1.abs() < 1e-6 && mu2.abs() < 1e-6;
    verdict(
        pass,
        format!("psi error {psi_err:.1e}, varphi error {phi_err:.1e}, |mu1(beta1)| {:.1e}, |mu2(beta2)| {:.1e}", mu1.abs(), mu2.abs()),
    )
}

fn criterion4(grid: &[GridPoint]) -> Verdict {
    let mut min_mu3 = f64::INFINITY;
    let mut bad = 0;
    for p in grid {
        match &p.spectrum {
            Ok(s) => min_mu3 = min_mu3.min(s.eigenvalues[2]),
            Err(_) => bad += 1,
        }
    }
    verdict(
        bad == 0 && min_mu3 > 0.0,
        format!("min mu3 = {min_mu3:.6} over {} points, {bad} failures", grid.len()),
    )
}

fn criterion5() -> Verdict {
    let mut pass = true;
    let mut ratios = Vec::new();
    let mut worst_gap: f64 = 0.0;
    for (beta, alpha) in [(1.0, 0.5), (2.0, 0.3), (3.0, 0.7)] {
        let p = params(alpha);
        let shoot = eigenvalues(beta, &p, 3).unwrap().eigenvalues;
        let m: Vec<Vec<f64>> = [400, 800, 1600].iter().map(|&n| eigenvalues_matrix(beta, &p, 3, n).unwrap()).collect();
        for k in 0..3 {
            let ratio = (m[0][k] - m[1][k]) / (m[1][k] - m[2][k]);
            // observed error of the finest grid, from the same three solves
            let observed = (m[1][k] - m[2][k]).abs();
            let gap = (shoot[k] - m[2][k]).abs();
            pass &= (3.5..=4.5).contains(&ratio) && gap <= observed;
            worst_gap = worst_gap.max(gap / observed);
            ratios.push(ratio);
        }
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    verdict(
        pass,
        format!("Richardson ratios in [{lo:.4}, {hi:.4}], worst |mu_shoot - mu_h| / observed error {worst_gap:.3}"),
    )
}

fn criterion6() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = [0.0_f64; 3];
    for _ in 0..50 {
        let beta = rng.gen_range(0.1..6.0);
        let alpha = rng.gen_range(0.1..0.9);
        let sol = PiecewiseSolution::from_even(&EvenSolution::new(params(alpha), beta).unwrap());
        let matching = matching_residual(&sol).iter().fold(0.0_f64, |m, r| m.max(r.abs()));
        worst[0] = worst[0].max(matching);
        worst[1] = worst[1].max(ode_residual(&sol).unwrap());
        worst[2] = worst[2].max(green_residual(&sol).unwrap());
    }
    verdict(
        worst.iter().all(|&w| w < 1e-8),
        format!("50 pairs: matching {:.1e}, ODE {:.1e}, Green {:.1e}", worst[0], worst[1], worst[2]),
    )
}

fn criterion7() -> (Verdict, Branch) {
    let start = Instant::now();
    let p = params(0.5);
    let branch = continue_branch(&p, &StepControl::default(), &StopCriteria::default()).unwrap();
    let tol = VerifyTolerances::default();
    let verified = branch.points.iter().filter(|pt| verify(&pt.solution).is_ok_and(|r| r.verified(&tol))).count();
    let bounds_ok = branch.points.iter().all(|pt| pt.bounds.holds());
    let identity = branch.points.iter().map(|pt| pt.bounds.identity_defect).fold(0.0, f64::max);
    let max_sup = branch.points.iter().map(|pt| pt.sup_norm).fold(0.0, f64::max);
    let (first, last) = (&branch.points[0], branch.points.last().unwrap());
    let elapsed = start.elapsed();
    let beta2 = branch.origin.beta2;
    let pass = verified >= 100
        && verified == branch.points.len()
        && bounds_ok
        && identity <= 1e-8
        && max_sup >= 3.0 * beta2
        && last.solution.lambda < first.solution.lambda / 10.0
        && elapsed < Duration::from_secs(60);
    let v = verdict(
        pass,
        format!(
            "{} points, {verified} verified, bounds {bounds_ok}, identity defect {identity:.1e}, max sup {max_sup:.3} (3 beta2 = {:.3}), lambda {:.3e} -> {:.3e}, {elapsed:.1?}",
            branch.points.len(),
            3.0 * beta2,
            first.solution.lambda,
            last.solution.lambda
        ),
    );
    (v, branch)
}

fn criterion8(branch: &Branch) -> Verdict {
    let p = params(0.5);
    let lambda_max = p.lambda_of_beta(1.0).unwrap();
    let mut pass = true;
    let mut with_branch = 0;
    let mut total = 0;
    for i in 1..=20 {
        let lambda = lambda_max * i as f64 / 20.0;
        let mut sols: Vec<PiecewiseSolution> = invert_lambda(lambda, &p)
            .unwrap()
            .iter()
            .map(|b| PiecewiseSolution::from_even(&EvenSolution::new(p, b).unwrap()))
            .collect();
        let noneven = branch.solutions_at_lambda(lambda);
        if !noneven.is_empty() {
            with_branch += 1;
        }
        pass &= noneven.iter().all(|s| s.sup_norm() > 1.0 && s.reflect().sup_norm() > 1.0);
        sols.extend(noneven.iter().flat_map(|s| [*s, s.reflect()]));
        total += sols.len();
        pass &= check_small_amplitude_uniqueness(lambda, &p, &sols);
    }
    verdict(pass, format!("20 values of lambda, {total} solutions, non-even ones found at {with_branch}"))
}

fn criterion9() -> Verdict {
    let p = params(0.5);
    let beta1 = solve_beta1().unwrap();
    let mut changes = Vec::new();
    let mut prev = p.d_lambda(1e-3).unwrap();
    for i in 2..=50_000 {
        let beta = i as f64 * 1e-3;
        let d = p.d_lambda(beta).unwrap();
        if d.signum() != prev.signum() {
            changes.push(beta);
        }
        prev = d;
    }
    let small = p.lambda_of_beta(1e-8).unwrap();
    let large = p.lambda_of_beta(50.0).unwrap();
    let located = changes.len() == 1 && (changes[0] - beta1).abs() <= 1e-3;
    verdict(
        located && small < 1e-7 && large < 1e-3,
        format!("sign changes at {changes:?} (beta1 = {beta1:.6}), Lambda(1e-8) = {small:.2e}, Lambda(50) = {large:.2e}"),
    )
}

fn main() {
    let (grid, grid_time) = morse_grid();
    let (c7, branch) = criterion7();
    let verdicts = [
        criterion1(),
        criterion2(&grid, grid_time),
        criterion3(),
        criterion4(&grid),
        criterion5(),
        criterion6(),
        c7,
        criterion8(&branch),
        criterion9(),
    ];
    let mut failed = 0;
    for (i, v) in verdicts.iter().enumerate() {
        println!("criterion {}: {} {}", i + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("{} of {} criteria passed", verdicts.len() - failed, verdicts.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
