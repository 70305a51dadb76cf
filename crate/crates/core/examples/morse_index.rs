//! Morse index along the even family: 0 below beta1, 1 between beta1 and
//! beta2, 2 above. The solutions at beta1 and beta2 are degenerate.

use liouville_step::analytic::ProblemParams;
use liouville_step::roots::SpecialPoints;
use liouville_step::spectrum::{eigenvalues, morse_index};

fn main() -> liouville_step::Result<()> {
    let params = ProblemParams::new(0.3)?;
    let sp = SpecialPoints::compute(&params)?;
    println!("alpha = 0.3: beta1 = {:.10}, beta2 = {:.10}", sp.beta1, sp.beta2);

    println!("{:>8} {:>12} {:>6} {:>12} {:>12} {:>12}", "beta", "lambda", "index", "mu1", "mu2", "mu3");
    for i in 1..=16 {
        let beta = 0.5 * i as f64;
        let spec = eigenvalues(beta, &params, 3)?;
        let mu = &spec.eigenvalues;
        println!(
            "{beta:>8.2} {:>12.6} {:>6} {:>12.5} {:>12.5} {:>12.5}",
            params.lambda_of_beta(beta)?,
            spec.morse_index,
            mu[0],
            mu[1],
            mu[2]
        );
    }

    for (name, beta) in [("beta1", sp.beta1), ("beta2", sp.beta2)] {
        match morse_index(beta, &params) {
            Err(e) => println!("{name}: {e}"),
            Ok(m) => println!("{name}: index {m} (not flagged degenerate)"),
        }
    }
    Ok(())
}
