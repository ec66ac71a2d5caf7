//! A small obstacle problem solved by the primal-dual active-set method.

use american_rb::linalg::Tridiagonal;
use american_rb::*;

fn main() -> Result<()> {
    // -u'' = -10 on (0, 1) with u >= -0.1, nine interior nodes
    let n = 9;
    let matrix = Tridiagonal {
        lower: vec![-1.0; n - 1],
        diag: vec![2.0; n],
        upper: vec![-1.0; n - 1],
    };
    let h2 = 1.0 / ((n + 1) * (n + 1)) as f64;
    let problem = LcpProblem::new(
        SystemMatrix::Tridiagonal(matrix),
        vec![-10.0 * h2; n],
        vec![-0.1; n],
    )?;
    let sol = solve_lcp(&problem)?;
    let res = problem.residuals(&sol.u, &sol.lambda);
    println!("iterations: {}", sol.iterations);
    println!("active set: {:?}", sol.active);
    for (i, (u, l)) in sol.u.iter().zip(&sol.lambda).enumerate() {
        println!("x={:.1}  u={u:+.6}  lambda={l:.6}", (i + 1) as f64 / (n + 1) as f64);
    }
    println!(
        "linear residual {:.2e}, complementarity {:.2e}",
        res.linear_relative, res.complementarity
    );
    Ok(())
}
