//! Eigenfunctions of the linearization by shooting, compared with the closed
//! forms at the two degenerate amplitudes, and the finite-difference spectrum
//! converging at second order.

use liouville_step::analytic::ProblemParams;
use liouville_step::roots::{solve_beta1, solve_beta2};
use liouville_step::spectrum::{eigenfunction, eigenvalues, eigenvalues_matrix};

/// `f` on `grid`, scaled to unit sup norm with the sign of `reference`.
fn normalised(f: impl Fn(f64) -> f64, grid: &[f64], reference: &[f64]) -> Vec<f64> {
    let fine = (0..=2000).map(|i| f(-1.0 + i as f64 / 1000.0).abs()).fold(0.0, f64::max);
    let raw: Vec<f64> = grid.iter().map(|&x| f(x) / fine).collect();
    let sign = raw.iter().zip(reference).map(|(a, b)| a * b).sum::<f64>().signum();
    raw.into_iter().map(|v| sign * v).collect()
}

fn main() -> liouville_step::Result<()> {
    let params = ProblemParams::new(0.5)?;
    let beta1 = solve_beta1()?;
    let beta2 = solve_beta2(&params)?;
    let grid: Vec<f64> = (0..=8).map(|i| -1.0 + 0.25 * i as f64).collect();

    // at beta1 the first eigenfunction is psi, at beta2 the second is varphi
    let first = eigenfunction(beta1, &params, 1, &grid)?;
    let second = eigenfunction(beta2, &params, 2, &grid)?;
    let psi = normalised(|x| params.psi(x, beta1).unwrap(), &grid, &first);
    let varphi = normalised(|x| params.varphi(x, beta2).unwrap(), &grid, &second);
    println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "x", "phi_1", "psi", "phi_2", "varphi");
    for (i, &x) in grid.iter().enumerate() {
        println!("{x:>6.2} {:>12.8} {:>12.8} {:>12.8} {:>12.8}", first[i], psi[i], second[i], varphi[i]);
    }

    let beta = 1.5;
    let shoot = eigenvalues(beta, &params, 3)?.eigenvalues;
    println!("beta = {beta}: shooting mu = {:.10} {:.10} {:.10}", shoot[0], shoot[1], shoot[2]);
    for n in [200, 400, 800] {
        let fd = eigenvalues_matrix(beta, &params, 3, n)?;
        let err: Vec<String> = fd.iter().zip(&shoot).map(|(a, b)| format!("{:>10.3e}", a - b)).collect();
        println!("  {n:>4} cells: error {}", err.join(" "));
    }
    Ok(())
}
