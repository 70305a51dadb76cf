//! The fold amplitude beta1 and the symmetry-breaking amplitude beta2 for a
//! few weights, with the two even solutions found at one value of lambda.

use liouville_step::analytic::ProblemParams;
use liouville_step::roots::{invert_lambda, SpecialPoints};

fn main() -> liouville_step::Result<()> {
    println!("{:>6} {:>16} {:>16} {:>14} {:>14}", "alpha", "beta1", "beta2", "lambda1", "lambda2");
    for alpha in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let sp = SpecialPoints::compute(&ProblemParams::new(alpha)?)?;
        println!(
            "{alpha:>6} {:>16.12} {:>16.12} {:>14.8} {:>14.8}",
            sp.beta1, sp.beta2, sp.lambda1, sp.lambda2
        );
    }

    // below the fold every lambda has two even solutions
    let params = ProblemParams::new(0.5)?;
    let lambda = 2.0;
    let roots = invert_lambda(lambda, &params)?;
    for beta in roots.iter() {
        println!("lambda = {lambda}: beta = {beta:.12}, Lambda(beta) = {:.15}", params.lambda_of_beta(beta)?);
    }
    Ok(())
}
