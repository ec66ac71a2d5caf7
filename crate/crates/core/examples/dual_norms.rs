//! Dual-space machinery: W-norms, supremizers and V-projections.

use american_rb::*;

fn main() -> Result<()> {
    let mesh = Mesh1D::new(99, 300.0)?;
    let ops = AffineOperatorSet::assemble(&mesh)?;

    let eta = DualVector::new((0..99).map(|i| if (30..40).contains(&i) { 1.0 } else { 0.0 }).collect());
    let norm = w_norm(&eta, &ops)?;
    let sup = riesz_supremizer(&eta, &ops)?;
    println!("||eta||_W          = {norm:.12e}");
    println!("||B eta||_V        = {:.12e}", ops.v_norm(&sup));
    println!("eta(B eta)/||B eta|| = {:.12e}", eta.action(&sup) / ops.v_norm(&sup));

    let obstacle = ObstacleData::new(&mesh, 100.0)?;
    let basis = vec![sup.iter().map(|v| v / ops.v_norm(&sup)).collect::<Vec<f64>>()];
    let (coeffs, err) = v_project(&obstacle.psi_tilde, &basis, &ops)?;
    println!(
        "projection of the lifted payoff onto span(B eta): coefficient {:.6e}, error {:.6e} of {:.6e}",
        coeffs[0],
        err,
        ops.v_norm(&obstacle.psi_tilde)
    );
    Ok(())
}
