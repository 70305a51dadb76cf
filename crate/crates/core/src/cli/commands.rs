use rayon::prelude::*;
use serde_json::{json, Value};

use crate::analytic::ProblemParams;
use crate::noneven::{continue_branch_partial, BranchPoint, StepControl, Termination};
use crate::roots::SpecialPoints;
use crate::spectrum::{eigenfunction_at, eigenvalues, eigenvalues_matrix, shoot_linearized};
use crate::verify::verify;

use super::config::RunConfig;
use super::svg::{Plot, Series};
use super::table::{rows_to_json, Cell, Row};
use super::CliError;

/// Grid size for the finite-difference cross-check in `spectrum`.
const MATRIX_GRID: usize = 2000;
const DEFAULT_GRID_POINTS: usize = 200;
const MAX_GRID_POINTS: usize = 1_000_000;

/// What a command produced. `failure` is reported after the output is written.
pub struct Output {
    pub rows: Vec<Row>,
    pub results: Value,
    pub plot: Option<Plot>,
    pub failure: Option<String>,
}

fn even_curve(params: &ProblemParams, beta_max: f64) -> Series {
    let n = 400;
    let points = (1..=n)
        .map(|i| {
            let b = beta_max * i as f64 / n as f64;
            (params.lambda_of_beta(b).unwrap_or(f64::NAN), b)
        })
        .collect();
    Series { name: "even".into(), points, markers: false }
}

fn special_markers(sp: &SpecialPoints) -> Series {
    Series {
        name: "beta1, beta2".into(),
        points: vec![(sp.lambda1, sp.beta1), (sp.lambda2, sp.beta2)],
        markers: true,
    }
}

fn diagram(title: &str, cfg: &RunConfig, series: Vec<Series>) -> Option<Plot> {
    cfg.plot.then(|| Plot {
        title: format!("{title}, alpha = {}", cfg.alpha),
        x_label: "lambda".into(),
        y_label: "sup norm".into(),
        log_x: cfg.log_lambda,
        series,
    })
}

pub fn special_points(cfg: &RunConfig) -> Result<Output, CliError> {
    let params = cfg.params();
    let sp = SpecialPoints::compute(&params)?;
    let row: Row = vec![
        ("alpha", sp.alpha.into()),
        ("beta1", sp.beta1.into()),
        ("beta2", sp.beta2.into()),
        ("lambda1", sp.lambda1.into()),
        ("lambda2", sp.lambda2.into()),
        ("beta1_residual", sp.beta1_residual.into()),
        ("beta2_residual", sp.beta2_residual.into()),
    ];
    let rows = vec![row];
    Ok(Output {
        results: rows_to_json(&rows)[0].clone(),
        rows,
        plot: diagram("Even solutions", cfg, vec![even_curve(&params, 3.0 * sp.beta2), special_markers(&sp)]),
        failure: None,
    })
}

fn beta_grid(cfg: &RunConfig, sp: &SpecialPoints) -> Result<Vec<f64>, CliError> {
    let lo = cfg.beta_grid.min.unwrap_or(0.5 * sp.beta1);
    let hi = cfg.beta_grid.max.unwrap_or(2.0 * sp.beta2);
    if hi <= lo {
        return Err(CliError::Config(format!("beta grid [{lo}, {hi}] is empty")));
    }
    let n = match cfg.beta_grid.step {
        Some(step) => ((hi - lo) / step + 1e-9).floor() + 1.0,
        None => DEFAULT_GRID_POINTS as f64,
    };
    if n > MAX_GRID_POINTS as f64 {
        return Err(CliError::Config(format!("beta grid has {n} points, limit {MAX_GRID_POINTS}")));
    }
    let n = n as usize;
    let mut grid: Vec<f64> = match cfg.beta_grid.step {
        Some(step) => (0..n).map(|i| lo + i as f64 * step).collect(),
        None => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    };
    for b in [sp.beta1, sp.beta2] {
        if b >= lo && b <= hi && !grid.contains(&b) {
            grid.push(b);
        }
    }
    grid.sort_by(f64::total_cmp);
    Ok(grid)
}

fn even_row(beta: f64, params: &ProblemParams, sp: &SpecialPoints) -> Row {
    let special = if beta == sp.beta1 {
        "beta1"
    } else if beta == sp.beta2 {
        "beta2"
    } else {
        ""
    };
    let mut row: Row = vec![
        ("alpha", params.alpha().into()),
        ("beta", beta.into()),
        ("lambda", params.lambda_of_beta(beta).ok().into()),
        ("special", special.into()),
    ];
    match eigenvalues(beta, params, 3) {
        Ok(spec) => row.extend([
            ("morse_index", spec.morse_index.into()),
            ("degenerate", spec.degenerate.into()),
            ("mu1", spec.eigenvalues[0].into()),
            ("mu2", spec.eigenvalues[1].into()),
            ("mu3", spec.eigenvalues[2].into()),
            ("status", "ok".into()),
        ]),
        Err(e) => row.extend([
            ("morse_index", Cell::Null),
            ("degenerate", Cell::Null),
            ("mu1", Cell::Null),
            ("mu2", Cell::Null),
            ("mu3", Cell::Null),
            ("status", format!("error: {e}").into()),
        ]),
    }
    row
}

pub fn even_branch(cfg: &RunConfig) -> Result<Output, CliError> {
    let params = cfg.params();
    let sp = SpecialPoints::compute(&params)?;
    let grid = beta_grid(cfg, &sp)?;
    let rows: Vec<Row> = grid.par_iter().map(|&b| even_row(b, &params, &sp)).collect();
    let failed = rows.iter().filter(|r| r.last().is_some_and(|(_, c)| *c != Cell::from("ok"))).count();

    let plot = cfg.plot.then(|| {
        let mut series: Vec<Series> = (0..3)
            .map(|m| Series {
                name: format!("Morse index {m}"),
                points: grid
                    .iter()
                    .zip(&rows)
                    .filter(|(_, r)| r.iter().any(|(k, c)| *k == "morse_index" && *c == Cell::from(m as usize)))
                    .map(|(&b, _)| (params.lambda_of_beta(b).unwrap_or(f64::NAN), b))
                    .collect(),
                markers: false,
            })
            .collect();
        series.push(special_markers(&sp));
        series
    });
    Ok(Output {
        results: rows_to_json(&rows),
        rows,
        plot: plot.and_then(|s| diagram("Even solutions by Morse index", cfg, s)),
        failure: (failed > 0).then(|| format!("{failed} rows failed; see the status column")),
    })
}

pub fn spectrum(cfg: &RunConfig) -> Result<Output, CliError> {
    let params = cfg.params();
    let beta = cfg.spectrum_beta;
    let spec = eigenvalues(beta, &params, cfg.spectrum_count)?;
    let matrix = eigenvalues_matrix(beta, &params, cfg.spectrum_count, MATRIX_GRID)?;
    let lambda = params.lambda_of_beta(beta)?;
    let mut rows = Vec::new();
    for (k, (&mu, &mu_fd)) in spec.eigenvalues.iter().zip(&matrix).enumerate() {
        let shot = shoot_linearized(mu, beta, &params)?;
        rows.push(vec![
            ("alpha", cfg.alpha.into()),
            ("beta", beta.into()),
            ("lambda", lambda.into()),
            ("k", (k + 1).into()),
            ("mu", mu.into()),
            ("interior_zeros", shot.interior_zero_count.into()),
            ("mu_matrix", mu_fd.into()),
        ]);
    }
    let plot = if cfg.plot {
        let grid: Vec<f64> = (0..=400).map(|i| -1.0 + i as f64 / 200.0).collect();
        let mut series = Vec::new();
        for (k, &mu) in spec.eigenvalues.iter().enumerate() {
            let phi = eigenfunction_at(mu, beta, &params, &grid)?;
            series.push(Series {
                name: format!("k = {}", k + 1),
                points: grid.iter().copied().zip(phi).collect(),
                markers: false,
            });
        }
        Some(Plot {
            title: format!("Eigenfunctions at beta = {beta}, alpha = {}", cfg.alpha),
            x_label: "x".into(),
            y_label: "phi_k (sup-normalised)".into(),
            log_x: false,
            series,
        })
    } else {
        None
    };
    Ok(Output {
        results: json!({
            "beta": beta,
            "lambda": lambda,
            "morse_index": spec.morse_index,
            "degenerate": spec.degenerate,
            "degeneracy_tolerance": spec.degeneracy_tolerance,
            "eigenvalues": rows_to_json(&rows),
        }),
        rows,
        plot,
        failure: None,
    })
}

fn branch_row(p: &BranchPoint, cfg: &RunConfig) -> Row {
    let sol = &p.solution;
    let mut row: Row = vec![
        ("alpha", cfg.alpha.into()),
        ("s", p.s.into()),
        ("lambda", sol.lambda.into()),
        ("sup_norm", p.sup_norm.into()),
        ("max_location", p.max_location.into()),
        ("a", sol.a.into()),
        ("b", sol.b.into()),
        ("d_l", sol.left.d.into()),
        ("m_l", sol.left.m.into()),
        ("d_r", sol.right.d.into()),
        ("m_r", sol.right.m.into()),
        ("matching_residual", p.residual.into()),
        ("condition", p.condition.into()),
        ("asymmetry", p.asymmetry.into()),
        ("lambda_of_sup", p.bounds.lambda_of_sup.into()),
        ("lower_bound_ok", p.bounds.lower_ok.into()),
        ("upper_bound_ok", p.bounds.upper_ok.into()),
        ("identity_defect", p.bounds.identity_defect.into()),
    ];
    match verify(sol) {
        Ok(r) => row.extend([
            ("ode_residual", r.ode_residual_sup.into()),
            ("green_residual", r.green_residual_sup.into()),
            ("boundary_error", r.boundary_error.into()),
            ("positivity_ok", r.positivity_ok.into()),
            ("verified", r.verified(&cfg.tolerances).into()),
        ]),
        Err(_) => row.extend([
            ("ode_residual", Cell::Null),
            ("green_residual", Cell::Null),
            ("boundary_error", Cell::Null),
            ("positivity_ok", Cell::Null),
            ("verified", false.into()),
        ]),
    }
    row
}

pub fn noneven_branch(cfg: &RunConfig) -> Result<Output, CliError> {
    let params = cfg.params();
    let step = StepControl {
        initial: StepControl::default().initial.min(cfg.continuation.max_step),
        max: cfg.continuation.max_step,
        ..StepControl::default()
    };
    let branch = continue_branch_partial(&params, &step, &cfg.continuation.stop())?;
    let rows: Vec<Row> = branch.points.iter().map(|p| branch_row(p, cfg)).collect();
    let failure = match branch.termination {
        Termination::StepCollapse { step } => Some(format!(
            "continuation step collapsed to {step:e} after {} points; partial branch written",
            branch.points.len()
        )),
        _ => None,
    };
    let sup_max = branch.points.iter().map(|p| p.sup_norm).fold(branch.origin.beta2, f64::max);
    let plot = diagram(
        "Bifurcation diagram",
        cfg,
        vec![
            even_curve(&params, 1.05 * sup_max),
            Series {
                name: "non-even".into(),
                points: branch.points.iter().map(|p| (p.solution.lambda, p.sup_norm)).collect(),
                markers: false,
            },
            special_markers(&branch.origin),
        ],
    );
    Ok(Output {
        results: json!({
            "origin": branch.origin,
            "termination": branch.termination,
            "points": rows_to_json(&rows),
        }),
        rows,
        plot,
        failure,
    })
}
