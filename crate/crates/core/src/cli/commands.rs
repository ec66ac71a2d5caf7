//! The five pipeline commands. Each returns the text for stdout.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::fem::{AffineOperatorSet, Mesh1D, ObstacleData, ParameterVector};
use crate::offline::{
    build_reduced_model, generate_snapshots, load_model, sample_test_set, sample_training_set,
    save_model, SaturationPolicy, SelectionRecord,
};
use crate::online::{err_linf, err_n, online_setup, reconstruct, reduced_trajectory_with, ErrorReport};
use crate::report::{fmt17, write_trajectory_rows, NodalSeries, Num, Numbers, TRAJECTORY_HEADER};
use crate::truth::{solve_trajectory, step_residuals};

use super::config::{RbConfig, RunConfig};
use super::gnuplot;
use super::{CliError, ARTIFACT_SCHEMA_VERSION, EXIT_SOLVER};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MuRecord {
    #[serde(rename = "K")]
    pub k: Num,
    pub r: Num,
    pub q: Num,
    pub sigma: Num,
}

impl From<&ParameterVector> for MuRecord {
    fn from(mu: &ParameterVector) -> Self {
        Self {
            k: Num(mu.k),
            r: Num(mu.r),
            q: Num(mu.q),
            sigma: Num(mu.sigma),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PriceCurve {
    pub s: Numbers,
    pub price: Numbers,
}

#[derive(Debug, Serialize)]
pub struct IterationStats {
    pub per_step: Vec<usize>,
    pub min: usize,
    pub max: usize,
    pub total: usize,
}

#[derive(Debug, Serialize)]
pub struct FeasibilityResiduals {
    /// `min(u − ψ̃)` over all steps.
    pub min_gap: Num,
    pub min_multiplier: Num,
    pub max_complementarity: Num,
    pub max_linear_residual: Num,
}

#[derive(Debug, Serialize)]
pub struct TruthSummary {
    pub schema_version: u32,
    pub mu: MuRecord,
    #[serde(rename = "H")]
    pub h: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub final_price_curve: PriceCurve,
    pub pdas_iteration_stats: IterationStats,
    pub feasibility_residuals: FeasibilityResiduals,
}

#[derive(Debug, Serialize)]
pub struct Sizes {
    #[serde(rename = "NV_tilde")]
    pub nv_tilde: usize,
    #[serde(rename = "NW")]
    pub nw: usize,
    #[serde(rename = "NV")]
    pub nv: usize,
}

#[derive(Debug, Serialize)]
pub struct OfflineSummary {
    pub schema_version: u32,
    pub seed: u64,
    #[serde(rename = "N_train")]
    pub n_train: usize,
    pub requested: Sizes,
    pub achieved: Sizes,
    pub pod_saturated_at: Option<usize>,
    pub cone_saturated_at: Option<usize>,
    pub dropped_supremizers: Vec<usize>,
    pub coupling_rank_ratio: Num,
}

#[derive(Debug, Serialize)]
pub struct OnlineSummary {
    pub schema_version: u32,
    pub mu: MuRecord,
    pub in_box: bool,
    pub sizes: Sizes,
    pub schur_iterations: Vec<usize>,
    pub min_alpha: Num,
    pub min_cone_gap: Num,
    pub max_complementarity: Num,
    #[serde(rename = "err_N")]
    pub err_n: Option<Num>,
    pub final_price_curve: PriceCurve,
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyRow {
    #[serde(rename = "NV_tilde")]
    pub nv_tilde: usize,
    #[serde(rename = "NW")]
    pub nw: usize,
    #[serde(rename = "NV")]
    pub nv: Option<usize>,
    #[serde(rename = "ErrLinf")]
    pub err_linf: Option<Num>,
    pub status: String,
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", dir.display())))
}

fn write_file(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), CliError> {
    let fail = |e: std::io::Error| CliError::config(format!("cannot write {}: {e}", path.display()));
    let mut out = BufWriter::new(File::create(path).map_err(fail)?);
    write(&mut out).map_err(fail)?;
    out.flush().map_err(fail)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::config(format!("cannot serialize {}: {e}", path.display())))?;
    write_file(path, |out| writeln!(out, "{text}"))
}

fn write_params(path: &Path, params: &[ParameterVector]) -> Result<(), CliError> {
    write_file(path, |out| {
        writeln!(out, "index,K,r,q,sigma")?;
        for (i, mu) in params.iter().enumerate() {
            let [k, r, q, sigma] = mu.as_array().map(fmt17);
            writeln!(out, "{i},{k},{r},{q},{sigma}")?;
        }
        Ok(())
    })
}

fn setup(config: &RunConfig) -> Result<(Mesh1D, AffineOperatorSet), CliError> {
    let mesh = Mesh1D::new(config.mesh.interior, config.mesh.s_f)?;
    let ops = AffineOperatorSet::assemble(&mesh)?;
    Ok((mesh, ops))
}

fn price_curve(mesh: &Mesh1D, u: &[f64], p0: &[f64]) -> PriceCurve {
    PriceCurve {
        s: Numbers(mesh.interior_nodes().to_vec()),
        price: Numbers(u.iter().zip(p0).map(|(a, b)| a + b).collect()),
    }
}

/// Full-order trajectory: `truth_trajectory.csv` and `truth_summary.json`.
pub fn cmd_truth(config: &RunConfig, mu: &ParameterVector, gnuplot: bool) -> Result<String, CliError> {
    let (mesh, ops) = setup(config)?;
    let obstacle = ObstacleData::new(&mesh, mu.k)?;
    let traj = solve_trajectory(mu, &ops, &obstacle, &config.time)?;
    let residuals = step_residuals(&traj, &ops, &obstacle)?;
    let feas = traj.feasibility(&obstacle);

    let dir = &config.io.output_dir;
    ensure_dir(dir)?;
    let csv = dir.join("truth_trajectory.csv");
    let series = NodalSeries {
        u: &traj.u,
        lambda: &traj.lambda,
        p0: &obstacle.p0,
        delta_t: config.time.delta_t(),
        source: None,
    };
    write_file(&csv, |out| {
        writeln!(out, "{TRAJECTORY_HEADER}")?;
        write_trajectory_rows(out, &mesh, &series)
    })?;

    let summary = TruthSummary {
        schema_version: ARTIFACT_SCHEMA_VERSION,
        mu: mu.into(),
        h: mesh.interior(),
        l: config.time.steps,
        final_price_curve: price_curve(&mesh, &traj.u[traj.steps()], &obstacle.p0),
        pdas_iteration_stats: IterationStats {
            min: traj.iterations.iter().copied().min().unwrap_or(0),
            max: traj.iterations.iter().copied().max().unwrap_or(0),
            total: traj.iterations.iter().sum(),
            per_step: traj.iterations.clone(),
        },
        feasibility_residuals: FeasibilityResiduals {
            min_gap: Num(feas.min_gap),
            min_multiplier: Num(feas.min_multiplier),
            max_complementarity: Num(feas.max_complementarity),
            max_linear_residual: Num(
                residuals.iter().map(|r| r.linear_relative).fold(0.0, f64::max),
            ),
        },
    };
    write_json(&dir.join("truth_summary.json"), &summary)?;

    if gnuplot {
        return Ok(gnuplot::trajectory_script(&csv.to_string_lossy(), config.time.steps, &[]));
    }
    Ok(format!(
        "truth {mu}: {} steps, {} active-set updates, max complementarity {:.3e}\nwrote {}\n",
        traj.steps(),
        summary.pdas_iteration_stats.total,
        feas.max_complementarity,
        csv.display()
    ))
}

fn selection_rows<W: Write>(
    out: &mut W,
    name: &str,
    eps: &[f64],
    picks: &[SelectionRecord],
) -> std::io::Result<()> {
    writeln!(out, "iteration,{name},K,r,q,sigma,mu_index,step")?;
    for (k, e) in eps.iter().enumerate() {
        write!(out, "{},{}", k + 1, fmt17(*e))?;
        match picks.get(k) {
            Some(p) => {
                let [kk, r, q, sigma] = p.mu.as_array().map(fmt17);
                let step = p.step.map(|s| s.to_string()).unwrap_or_default();
                writeln!(out, ",{kk},{r},{q},{sigma},{},{step}", p.mu_index)?;
            }
            None => writeln!(out, ",,,,,,")?,
        }
    }
    Ok(())
}

/// Training snapshots, both greedy algorithms, enrichment and the model file.
pub fn cmd_offline(config: &RunConfig, gnuplot: bool) -> Result<String, CliError> {
    let (mesh, ops) = setup(config)?;
    let train = sample_training_set(&config.bounds, config.sampling.n_train, config.sampling.seed);
    let store = generate_snapshots(&train, &mesh, &ops, &config.time)?;
    let out = build_reduced_model(&store, &ops, config.rb.into(), SaturationPolicy::Truncate)?;
    let model = &out.model;

    let dir = &config.io.output_dir;
    ensure_dir(dir)?;
    let model_path = config.model_path();
    if let Some(parent) = model_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    save_model(model, &model_path).map_err(|e| CliError::config(e.to_string()))?;
    write_params(&dir.join("training_params.csv"), &train)?;
    let diag = &model.diagnostics;
    let eps_u_csv = dir.join("eps_u.csv");
    let eps_lambda_csv = dir.join("eps_lambda.csv");
    write_file(&eps_u_csv, |w| selection_rows(w, "eps_u", &diag.eps_u, &diag.selected_params_u))?;
    write_file(&eps_lambda_csv, |w| {
        selection_rows(w, "eps_lambda", &diag.eps_lambda, &diag.selected_pairs_lambda)
    })?;

    let summary = OfflineSummary {
        schema_version: ARTIFACT_SCHEMA_VERSION,
        seed: config.sampling.seed,
        n_train: train.len(),
        requested: Sizes {
            nv_tilde: config.rb.nv_tilde,
            nw: config.rb.nw,
            nv: config.rb.nv_tilde + config.rb.nw,
        },
        achieved: Sizes {
            nv_tilde: model.nv_tilde,
            nw: model.nw(),
            nv: model.nv(),
        },
        pod_saturated_at: out.pod_saturated_at,
        cone_saturated_at: out.cone_saturated_at,
        dropped_supremizers: diag.dropped_supremizers.clone(),
        coupling_rank_ratio: Num(model.coupling_rank_ratio()),
    };
    write_json(&dir.join("offline_summary.json"), &summary)?;

    let mut report = String::new();
    if let Some(k) = out.pod_saturated_at {
        eprintln!("warning: primal basis saturated at {k} of {} vectors", config.rb.nv_tilde);
    }
    if let Some(k) = out.cone_saturated_at {
        eprintln!("warning: dual cone saturated at {k} of {} generators", config.rb.nw);
    }
    if gnuplot {
        report.push_str(&gnuplot::greedy_script(
            &eps_u_csv.to_string_lossy(),
            &eps_lambda_csv.to_string_lossy(),
        ));
    } else {
        report.push_str(&format!(
            "model NV_tilde={} NW={} NV={} written to {}\n",
            model.nv_tilde,
            model.nw(),
            model.nv(),
            model_path.display()
        ));
    }
    Ok(report)
}

fn load(config: &RunConfig) -> Result<crate::offline::ReducedModel, CliError> {
    let path = config.model_path();
    if !path.exists() {
        return Err(CliError::missing(format!("model file {} not found", path.display())));
    }
    Ok(load_model(&path)?)
}

/// Reduced trajectory at `mu`; with `compare`, the truth overlay and `err_N`.
pub fn cmd_online(
    config: &RunConfig,
    mu: &ParameterVector,
    compare: bool,
    gnuplot: bool,
) -> Result<String, CliError> {
    let model = load(config)?;
    let mesh = model.mesh.build()?;
    let data = online_setup(&model, mu)?;
    let rt = reduced_trajectory_with(&model, &data)?;
    let nodal = reconstruct(&model, &rt)?;
    let feas = rt.feasibility(&model, &data);
    let in_box = config.bounds.contains(mu);
    if !in_box {
        eprintln!("warning: {mu} lies outside the parameter box; extrapolating");
    }

    let dir = &config.io.output_dir;
    ensure_dir(dir)?;
    let delta_t = model.config.delta_t();
    let reduced_series = NodalSeries {
        u: &nodal.u,
        lambda: &nodal.lambda,
        p0: &nodal.p0,
        delta_t,
        source: Some("reduced"),
    };
    let header = format!("{TRAJECTORY_HEADER},source");
    let reduced_csv = dir.join("online_trajectory.csv");
    write_file(&reduced_csv, |out| {
        writeln!(out, "{header}")?;
        write_trajectory_rows(out, &mesh, &reduced_series)
    })?;

    let mut err = None;
    let comparison_csv = dir.join("comparison.csv");
    if compare {
        let ops = AffineOperatorSet::assemble(&mesh)?;
        let obstacle = ObstacleData::new(&mesh, mu.k)?;
        let truth = solve_trajectory(mu, &ops, &obstacle, &model.config)?;
        err = Some(err_n(&truth.u, &nodal.u, &ops, &model.config)?);
        let truth_series = NodalSeries {
            u: &truth.u,
            lambda: &truth.lambda,
            p0: &obstacle.p0,
            delta_t,
            source: Some("truth"),
        };
        write_file(&comparison_csv, |out| {
            writeln!(out, "{header}")?;
            write_trajectory_rows(out, &mesh, &truth_series)?;
            write_trajectory_rows(out, &mesh, &reduced_series)
        })?;
    }

    let summary = OnlineSummary {
        schema_version: ARTIFACT_SCHEMA_VERSION,
        mu: mu.into(),
        in_box,
        sizes: Sizes {
            nv_tilde: model.nv_tilde,
            nw: model.nw(),
            nv: model.nv(),
        },
        schur_iterations: rt.iterations.clone(),
        min_alpha: Num(feas.min_alpha),
        min_cone_gap: Num(feas.min_gap),
        max_complementarity: Num(feas.max_complementarity),
        err_n: err.map(Num),
        final_price_curve: price_curve(&mesh, &nodal.u[model.config.steps], &nodal.p0),
    };
    write_json(&dir.join("online_summary.json"), &summary)?;

    if gnuplot {
        return Ok(if compare {
            gnuplot::trajectory_script(&comparison_csv.to_string_lossy(), model.config.steps, &["truth", "reduced"])
        } else {
            gnuplot::trajectory_script(&reduced_csv.to_string_lossy(), model.config.steps, &["reduced"])
        });
    }
    let mut report = format!(
        "online {mu}: NV={} NW={}, wrote {}\n",
        model.nv(),
        model.nw(),
        reduced_csv.display()
    );
    if let Some(e) = err {
        report.push_str(&format!("err_N = {}\n", fmt17(e)));
    }
    Ok(report)
}

/// One model per budget and its ErrLinf over a common test set.
pub fn cmd_study(config: &RunConfig, budgets: &[RbConfig], gnuplot: bool) -> Result<String, CliError> {
    let (mesh, ops) = setup(config)?;
    let seed = config.sampling.seed;
    let train = sample_training_set(&config.bounds, config.sampling.n_train, seed);
    let test = sample_test_set(&config.bounds, config.sampling.n_test, seed);
    let store = generate_snapshots(&train, &mesh, &ops, &config.time)?;

    let results: Vec<(StudyRow, Option<ErrorReport>)> = budgets
        .par_iter()
        .map(|&rb| {
            let built = build_reduced_model(&store, &ops, rb.into(), SaturationPolicy::Truncate);
            let outcome = built.and_then(|out| {
                let report = err_linf(&out.model, &test, &ops, Some(&config.bounds))?;
                Ok((out, report))
            });
            match outcome {
                Ok((out, report)) => {
                    let mut status = String::from("ok");
                    if let Some(k) = out.pod_saturated_at {
                        status = format!("pod saturated at {k}");
                    }
                    if let Some(k) = out.cone_saturated_at {
                        status = if status == "ok" {
                            format!("cone saturated at {k}")
                        } else {
                            format!("{status}; cone saturated at {k}")
                        };
                    }
                    let row = StudyRow {
                        nv_tilde: rb.nv_tilde,
                        nw: rb.nw,
                        nv: Some(out.model.nv()),
                        err_linf: Some(Num(report.err_linf)),
                        status,
                    };
                    (row, Some(report))
                }
                Err(e) => (
                    StudyRow {
                        nv_tilde: rb.nv_tilde,
                        nw: rb.nw,
                        nv: None,
                        err_linf: None,
                        status: format!("failed: {e}"),
                    },
                    None,
                ),
            }
        })
        .collect();

    let dir = &config.io.output_dir;
    ensure_dir(dir)?;
    write_params(&dir.join("training_params.csv"), &train)?;
    write_params(&dir.join("test_params.csv"), &test)?;
    let study_csv = dir.join("study.csv");
    write_file(&study_csv, |out| {
        writeln!(out, "NV_tilde,NW,NV,ErrLinf,status")?;
        for (row, _) in &results {
            let nv = row.nv.map(|v| v.to_string()).unwrap_or_default();
            let e = row.err_linf.map(|v| fmt17(v.0)).unwrap_or_default();
            writeln!(out, "{},{},{nv},{e},\"{}\"", row.nv_tilde, row.nw, row.status.replace('"', "'"))?;
        }
        Ok(())
    })?;
    for (row, report) in &results {
        if let Some(report) = report {
            let path = dir.join(format!("errors_{}_{}.csv", row.nv_tilde, row.nw));
            write_file(&path, |out| report.write_csv(out))?;
        }
    }

    if results.iter().all(|(_, r)| r.is_none()) {
        return Err(CliError {
            code: EXIT_SOLVER,
            message: format!("every budget failed; see {}", study_csv.display()),
        });
    }
    if gnuplot {
        return Ok(gnuplot::study_script(&study_csv.to_string_lossy()));
    }
    let mut report = String::from("NV_tilde NW NV ErrLinf status\n");
    for (row, _) in &results {
        report.push_str(&format!(
            "{} {} {} {} {}\n",
            row.nv_tilde,
            row.nw,
            row.nv.map(|v| v.to_string()).unwrap_or_else(|| "-".into()),
            row.err_linf.map(|v| format!("{:.6e}", v.0)).unwrap_or_else(|| "-".into()),
            row.status
        ));
    }
    Ok(report)
}

/// Loads the model, which re-runs every consistency check.
pub fn cmd_validate(config: &RunConfig) -> Result<String, CliError> {
    let model = load(config)?;
    let summary = serde_json::json!({
        "schema_version": ARTIFACT_SCHEMA_VERSION,
        "valid": true,
        "H": model.h(),
        "NV_tilde": model.nv_tilde,
        "NW": model.nw(),
        "NV": model.nv(),
        "coupling_rank_ratio": model.coupling_rank_ratio(),
    });
    Ok(format!("{summary}\n"))
}
