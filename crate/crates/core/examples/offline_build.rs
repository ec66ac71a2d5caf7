//! Offline phase: training snapshots, POD-greedy, angle-greedy and the
//! supremizer-enriched primal basis.

use std::time::Instant;

use american_rb::offline::{
    build_reduced_model, generate_snapshots, sample_training_set, Budget, SaturationPolicy,
};
use american_rb::*;

fn main() -> Result<()> {
    let mesh = Mesh1D::new(99, 300.0)?;
    let ops = AffineOperatorSet::assemble(&mesh)?;
    let config = SchemeConfig::default();
    let train = sample_training_set(&ParameterBox::default(), 16, 42);

    let start = Instant::now();
    let store = generate_snapshots(&train, &mesh, &ops, &config)?;
    let budget = Budget { nv_tilde: 8, nw: 8 };
    let out = build_reduced_model(&store, &ops, budget, SaturationPolicy::Fail)?;
    let model = &out.model;
    println!("offline phase took {:?}", start.elapsed());
    println!(
        "NV_tilde = {}, NW = {}, NV = {}, coupling sigma_min/sigma_max = {:.3e}",
        model.nv_tilde,
        model.nw(),
        model.nv(),
        model.coupling_rank_ratio()
    );

    let diag = &model.diagnostics;
    println!("\n{:>4} {:>14} {:>12}  picked", "k", "eps_u", "eps_lambda");
    for k in 0..diag.eps_u.len().max(diag.eps_lambda.len()) {
        let eu = diag.eps_u.get(k).map_or(String::new(), |v| format!("{v:.6e}"));
        let el = diag.eps_lambda.get(k).map_or(String::new(), |v| format!("{v:.6e}"));
        let picked = diag
            .selected_pairs_lambda
            .get(k)
            .map_or(String::new(), |s| format!("lambda(mu_{}, step {:?})", s.mu_index, s.step.unwrap_or(0)));
        println!("{:>4} {eu:>14} {el:>12}  {picked}", k + 1);
    }
    Ok(())
}
