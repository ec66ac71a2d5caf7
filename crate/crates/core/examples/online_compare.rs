//! Online reduced simulation compared with the truth solution.

use std::time::Instant;

use american_rb::offline::{
    build_reduced_model, generate_snapshots, sample_training_set, Budget, SaturationPolicy,
};
use american_rb::online::{err_n, online_setup, reconstruct, reduced_trajectory_with};
use american_rb::*;

fn main() -> Result<()> {
    let mesh = Mesh1D::new(99, 300.0)?;
    let ops = AffineOperatorSet::assemble(&mesh)?;
    let config = SchemeConfig::default();
    let train = sample_training_set(&ParameterBox::default(), 16, 42);
    let store = generate_snapshots(&train, &mesh, &ops, &config)?;
    let budget = Budget { nv_tilde: 16, nw: 16 };
    let model = build_reduced_model(&store, &ops, budget, SaturationPolicy::Fail)?.model;

    let mu = ParameterVector::new(102.0, 0.051, 0.00155, 0.49)?;
    let start = Instant::now();
    let data = online_setup(&model, &mu)?;
    let setup = start.elapsed();
    let rt = reduced_trajectory_with(&model, &data)?;
    let online = start.elapsed() - setup;
    let reduced = reconstruct(&model, &rt)?;

    let obstacle = ObstacleData::new(&mesh, mu.k)?;
    let start = Instant::now();
    let truth = solve_trajectory(&mu, &ops, &obstacle, &config)?;
    let full = start.elapsed();
    let err = err_n(&truth.u, &reduced.u, &ops, &config)?;
    let scale = truth.u.iter().map(|u| ops.v_norm(u)).fold(0.0, f64::max);

    println!("mu = {mu}, NV = {}, NW = {}", model.nv(), model.nw());
    println!("setup {setup:?}, reduced steps {online:?}, truth {full:?}");
    println!("err_N = {err:.6e} (max truth V-norm {scale:.3e})");
    let last = config.steps;
    let price = reduced.price(last);
    println!("\n{:>8} {:>12} {:>12}", "s", "truth", "reduced");
    for (i, &s) in mesh.interior_nodes().iter().enumerate().step_by(10) {
        println!("{s:8.1} {:12.6} {:12.6}", truth.u[last][i] + obstacle.p0[i], price[i]);
    }
    Ok(())
}
