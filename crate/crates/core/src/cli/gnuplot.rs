//! Gnuplot scripts matching the CSV artifacts.

use std::fmt::Write;

/// Steps shown in trajectory plots: first, middle and last.
pub fn display_steps(steps: usize) -> Vec<usize> {
    let mut shown = vec![1, steps.div_ceil(2), steps];
    shown.dedup();
    shown
}

const PREAMBLE: &str = "set datafile separator ','\nset key top right\nset grid\n";

/// Price against `s` at the displayed steps. With `sources`, one curve per
/// value of the trailing `source` column.
pub fn trajectory_script(csv: &str, steps: usize, sources: &[&str]) -> String {
    let mut out = String::from(PREAMBLE);
    out.push_str("set xlabel 's'\nset ylabel 'price'\n");
    let mut curves = Vec::new();
    for n in display_steps(steps) {
        if sources.is_empty() {
            curves.push(format!(
                "'{csv}' skip 1 using 3:($1=={n} ? $6 : 1/0) with lines title 'step {n}'"
            ));
        }
        for src in sources {
            let style = if *src == "truth" { "lines" } else { "points" };
            curves.push(format!(
                "'{csv}' skip 1 using 3:(($1=={n} && strcol(7) eq '{src}') ? $6 : 1/0) with {style} title '{src}, step {n}'"
            ));
        }
    }
    let _ = writeln!(out, "plot {}", curves.join(", \\\n     "));
    out
}

/// ErrLinf against the budget index.
pub fn study_script(csv: &str) -> String {
    let mut out = String::from(PREAMBLE);
    out.push_str("set logscale y\nset xlabel 'N_V'\nset ylabel 'ErrLinf'\n");
    let _ = writeln!(
        out,
        "plot '{csv}' skip 1 using 3:4 with linespoints title 'ErrLinf'"
    );
    out
}

/// Greedy indicator decay from the offline diagnostics.
pub fn greedy_script(eps_u_csv: &str, eps_lambda_csv: &str) -> String {
    let mut out = String::from(PREAMBLE);
    out.push_str("set logscale y\nset logscale y2\nset y2tics\nset xlabel 'iteration'\n");
    let _ = writeln!(
        out,
        "plot '{eps_u_csv}' skip 1 using 1:2 with linespoints title 'eps_u', \\\n     '{eps_lambda_csv}' skip 1 using 1:2 with linespoints axes x1y2 title 'eps_lambda'"
    );
    out
}
