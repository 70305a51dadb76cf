//! Independent checks: RK4 re-integration, the Green's function identity and
//! symmetry classification, on good and corrupted records.

use liouville_step::analytic::{EvenSolution, ProblemParams};
use liouville_step::noneven::{continue_branch, PiecewiseSolution, StepControl, StopCriteria};
use liouville_step::verify::{classify_symmetry, verify, VerifyTolerances};

fn main() -> liouville_step::Result<()> {
    let params = ProblemParams::new(0.5)?;
    let tol = VerifyTolerances::default();

    let even = PiecewiseSolution::from_even(&EvenSolution::new(params, 1.0)?);
    let stop = StopCriteria { max_points: 40, ..StopCriteria::default() };
    let branch = continue_branch(&params, &StepControl::default(), &stop)?;
    let tilted = branch.points.last().expect("non-empty branch").solution;
    let mut corrupted = even;
    corrupted.a += 0.01;

    for (name, sol) in [("even", even), ("non-even", tilted), ("mirror", tilted.reflect()), ("corrupted", corrupted)] {
        let r = verify(&sol)?;
        println!(
            "{name:>10}: ode {:.2e}  green {:.2e}  symmetry {:.2e}  {:?}  verified {}",
            r.ode_residual_sup,
            r.green_residual_sup,
            r.symmetry_defect,
            classify_symmetry(&sol, tol.symmetry),
            r.verified(&tol)
        );
    }
    Ok(())
}
