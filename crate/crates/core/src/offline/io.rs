//! JSON model files.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{Numbers, Rows};
use crate::truth::SchemeConfig;

use super::model::{GreedyDiagnostics, MeshDescriptor, ReducedModel, SelectionRecord};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[allow(non_snake_case)]
struct ModelFile {
    schema_version: u32,
    mesh: MeshDescriptor,
    time: SchemeConfig,
    NV_tilde: usize,
    NW: usize,
    NV: usize,
    psi_matrix: Rows,
    xi_matrix: Rows,
    Mass_N: Rows,
    A1_N: Rows,
    A2_N: Rows,
    A3_N: Rows,
    f1_N: Numbers,
    f2_N: Numbers,
    B_N: Rows,
    init_gram: Rows,
    init_rhs_factor: Rows,
    diagnostics: DiagnosticsFile,
}

#[derive(Serialize, Deserialize)]
struct DiagnosticsFile {
    eps_u: Numbers,
    eps_lambda: Numbers,
    selections: SelectionsFile,
    dropped_supremizers: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct SelectionsFile {
    u: Vec<SelectionRecord>,
    lambda: Vec<SelectionRecord>,
}

#[derive(Deserialize)]
struct Header {
    schema_version: u32,
}

fn rows(m: &DMatrix<f64>) -> Rows {
    Rows(
        (0..m.nrows())
            .map(|i| m.row(i).iter().copied().collect())
            .collect(),
    )
}

fn matrix(name: &str, rows: Rows, shape: (usize, usize)) -> Result<DMatrix<f64>> {
    let rows = rows.0;
    if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
        return Err(Error::ModelCorruption(format!(
            "{name} is not {}x{}",
            shape.0, shape.1
        )));
    }
    Ok(DMatrix::from_fn(shape.0, shape.1, |i, j| rows[i][j]))
}

fn vector(name: &str, v: Numbers, len: usize) -> Result<DVector<f64>> {
    if v.0.len() != len {
        return Err(Error::ModelCorruption(format!("{name} has length {} instead of {len}", v.0.len())));
    }
    Ok(DVector::from_vec(v.0))
}

/// Serializes `model` to the JSON document format.
pub fn model_to_json(model: &ReducedModel) -> Result<String> {
    let d = &model.diagnostics;
    let file = ModelFile {
        schema_version: SCHEMA_VERSION,
        mesh: model.mesh,
        time: model.config,
        NV_tilde: model.nv_tilde,
        NW: model.nw(),
        NV: model.nv(),
        psi_matrix: rows(&model.psi),
        xi_matrix: rows(&model.xi),
        Mass_N: rows(&model.mass),
        A1_N: rows(&model.a1),
        A2_N: rows(&model.a2),
        A3_N: rows(&model.a3),
        f1_N: Numbers(model.f1.as_slice().to_vec()),
        f2_N: Numbers(model.f2.as_slice().to_vec()),
        B_N: rows(&model.coupling),
        init_gram: rows(&model.init_gram),
        init_rhs_factor: rows(&model.init_rhs_factor),
        diagnostics: DiagnosticsFile {
            eps_u: Numbers(d.eps_u.clone()),
            eps_lambda: Numbers(d.eps_lambda.clone()),
            selections: SelectionsFile {
                u: d.selected_params_u.clone(),
                lambda: d.selected_pairs_lambda.clone(),
            },
            dropped_supremizers: d.dropped_supremizers.clone(),
        },
    };
    let mut text = serde_json::to_string(&file)
        .map_err(|e| Error::InvalidArgument(format!("model cannot be serialized: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Parses and validates a model document.
pub fn model_from_json(text: &str) -> Result<ReducedModel> {
    let header: Header = serde_json::from_str(text)
        .map_err(|e| Error::ModelCorruption(format!("unreadable header: {e}")))?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(Error::VersionMismatch {
            expected: SCHEMA_VERSION,
            found: header.schema_version,
        });
    }
    let file: ModelFile = serde_json::from_str(text)
        .map_err(|e| Error::ModelCorruption(format!("malformed model document: {e}")))?;
    let h = file.mesh.interior;
    let (nv, nw) = (file.NV, file.NW);
    let model = ReducedModel {
        mesh: file.mesh,
        config: file.time,
        nv_tilde: file.NV_tilde,
        psi: matrix("psi_matrix", file.psi_matrix, (h, nv))?,
        xi: matrix("xi_matrix", file.xi_matrix, (h, nw))?,
        mass: matrix("Mass_N", file.Mass_N, (nv, nv))?,
        a1: matrix("A1_N", file.A1_N, (nv, nv))?,
        a2: matrix("A2_N", file.A2_N, (nv, nv))?,
        a3: matrix("A3_N", file.A3_N, (nv, nv))?,
        f1: vector("f1_N", file.f1_N, nv)?,
        f2: vector("f2_N", file.f2_N, nv)?,
        coupling: matrix("B_N", file.B_N, (nv, nw))?,
        init_gram: matrix("init_gram", file.init_gram, (nv, nv))?,
        init_rhs_factor: matrix("init_rhs_factor", file.init_rhs_factor, (h, nv))?,
        diagnostics: GreedyDiagnostics {
            eps_u: file.diagnostics.eps_u.0,
            eps_lambda: file.diagnostics.eps_lambda.0,
            selected_params_u: file.diagnostics.selections.u,
            selected_pairs_lambda: file.diagnostics.selections.lambda,
            dropped_supremizers: file.diagnostics.dropped_supremizers,
        },
    };
    model.validate().map_err(|e| match e {
        Error::ModelCorruption(_) => e,
        other => Error::ModelCorruption(other.to_string()),
    })?;
    Ok(model)
}

pub fn save_model(model: &ReducedModel, path: &Path) -> Result<()> {
    fs::write(path, model_to_json(model)?)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<ReducedModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::Load {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    model_from_json(&text).map_err(|e| match e {
        Error::VersionMismatch { .. } => e,
        other => Error::Load {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    })
}
