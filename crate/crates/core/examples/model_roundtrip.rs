//! Saving a reduced model, loading it back and checking a corrupted copy.

use american_rb::offline::{
    build_reduced_model, generate_snapshots, load_model, model_from_json, model_to_json,
    sample_training_set, save_model, Budget, SaturationPolicy,
};
use american_rb::*;

fn main() -> Result<()> {
    let mesh = Mesh1D::new(99, 300.0)?;
    let ops = AffineOperatorSet::assemble(&mesh)?;
    let config = SchemeConfig::default();
    let store = generate_snapshots(&sample_training_set(&ParameterBox::default(), 8, 7), &mesh, &ops, &config)?;
    let budget = Budget { nv_tilde: 4, nw: 4 };
    let model = build_reduced_model(&store, &ops, budget, SaturationPolicy::Fail)?.model;

    let path = std::env::temp_dir().join("american_rb_model.json");
    save_model(&model, &path)?;
    let loaded = load_model(&path)?;
    println!("wrote {} ({} bytes)", path.display(), std::fs::metadata(&path)?.len());
    println!("round trip exact: {}", loaded == model);

    let mut broken = model.clone();
    broken.coupling[(0, 0)] += 1e-3;
    let text = model_to_json(&broken)?;
    match model_from_json(&text) {
        Ok(_) => println!("corruption went unnoticed"),
        Err(e) => println!("corrupted copy rejected: {e}"),
    }
    let future = model_to_json(&model)?.replacen("\"schema_version\":1", "\"schema_version\":2", 1);
    if let Err(e) = model_from_json(&future) {
        println!("future schema rejected: {e}");
    }
    Ok(())
}
