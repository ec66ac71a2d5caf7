//! Full-order American put trajectory and its early-exercise premium.
//!
//! Run with `cargo run --example truth_solve`.

use american_rb::truth::solve_trajectory_unconstrained;
use american_rb::*;

fn main() -> Result<()> {
    let mesh = Mesh1D::new(99, 300.0)?;
    let ops = AffineOperatorSet::assemble(&mesh)?;
    let config = SchemeConfig::default();
    let mu = ParameterVector::new(100.0, 0.05, 0.0015, 0.5)?;
    let obstacle = ObstacleData::new(&mesh, mu.k)?;

    let american = solve_trajectory(&mu, &ops, &obstacle, &config)?;
    let european = solve_trajectory_unconstrained(&mu, &ops, &obstacle, &config)?;
    let feas = american.feasibility(&obstacle);
    println!("mu = {mu}");
    println!(
        "min gap {:.3e}, min multiplier {:.3e}, complementarity {:.3e}",
        feas.min_gap, feas.min_multiplier, feas.max_complementarity
    );
    println!("active-set updates per step: {:?}", american.iterations);

    let last = config.steps;
    println!("{:>8} {:>12} {:>12} {:>10}", "s", "american", "european", "payoff");
    for (i, &s) in mesh.interior_nodes().iter().enumerate().step_by(10) {
        let p0 = obstacle.p0[i];
        println!(
            "{s:8.1} {:12.6} {:12.6} {:10.4}",
            american.u[last][i] + p0,
            european[last][i] + p0,
            obstacle.psi[i]
        );
    }
    Ok(())
}
