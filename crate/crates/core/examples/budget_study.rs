//! Worst-case test error for several reduced dimensions.

use american_rb::offline::{
    build_reduced_model, generate_snapshots, sample_test_set, sample_training_set, Budget,
    SaturationPolicy,
};
use american_rb::online::err_linf;
use american_rb::*;

fn main() -> Result<()> {
    let mesh = Mesh1D::new(99, 300.0)?;
    let ops = AffineOperatorSet::assemble(&mesh)?;
    let config = SchemeConfig::default();
    let bounds = ParameterBox::default();
    let seed = 42;
    let store = generate_snapshots(&sample_training_set(&bounds, 16, seed), &mesh, &ops, &config)?;
    let test = sample_test_set(&bounds, 10, seed);

    println!("{:>8} {:>4} {:>4} {:>14}", "NV_tilde", "NW", "NV", "ErrLinf");
    for n in [2, 4, 8, 12, 16] {
        let budget = Budget { nv_tilde: n, nw: n };
        let model = build_reduced_model(&store, &ops, budget, SaturationPolicy::Truncate)?.model;
        let report = err_linf(&model, &test, &ops, Some(&bounds))?;
        println!("{n:>8} {:>4} {:>4} {:>14.6e}", report.nw, report.nv, report.err_linf);
    }
    Ok(())
}
