//! Trace the branch of non-even solutions that leaves the even family at
//! beta2, and check the bounds on lambda at every point.

use liouville_step::analytic::ProblemParams;
use liouville_step::noneven::{continue_branch, StepControl, StopCriteria};
use liouville_step::verify::{verify, VerifyTolerances};

fn main() -> liouville_step::Result<()> {
    let params = ProblemParams::new(0.5)?;
    let branch = continue_branch(&params, &StepControl::default(), &StopCriteria::default())?;
    let origin = &branch.origin;
    println!("beta2 = {:.12}, lambda2 = {:.12}", origin.beta2, origin.lambda2);
    println!("{} points, stopped by {:?}", branch.points.len(), branch.termination);

    println!("{:>10} {:>14} {:>10} {:>10} {:>10} {:>9}", "s", "lambda", "sup", "m", "B", "cond");
    let stride = (branch.points.len() / 12).max(1);
    for p in branch.points.iter().step_by(stride).chain(branch.points.last()) {
        println!(
            "{:>10.4} {:>14.6e} {:>10.5} {:>10.6} {:>10.5} {:>9.2e}",
            p.s, p.solution.lambda, p.sup_norm, p.max_location, p.solution.b, p.condition
        );
    }

    let tol = VerifyTolerances::default();
    let mut worst_ode: f64 = 0.0;
    let mut worst_green: f64 = 0.0;
    let mut failures = 0;
    for p in &branch.points {
        let report = verify(&p.solution)?;
        worst_ode = worst_ode.max(report.ode_residual_sup);
        worst_green = worst_green.max(report.green_residual_sup);
        if !report.verified(&tol) || !p.bounds.holds() || p.bounds.identity_defect > 1e-8 {
            failures += 1;
        }
    }
    println!("worst ODE residual {worst_ode:.2e}, worst Green residual {worst_green:.2e}, {failures} failures");
    Ok(())
}
