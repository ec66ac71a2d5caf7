//! Number formatting and CSV writers shared by the pipeline artifacts.
//!
//! Every float written by this crate uses 17 significant digits, which is
//! enough to round-trip an `f64` exactly.

use std::io::{self, Write};

use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::fem::Mesh1D;

/// `x` with 17 significant digits in scientific notation.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// A float serialized to JSON with [`fmt17`].
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(transparent)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom(format!(
                "non-finite value {} cannot be written",
                self.0
            )));
        }
        let raw = serde_json::value::RawValue::from_string(fmt17(self.0))
            .map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

/// Float vector serialized with [`fmt17`].
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(transparent)]
pub struct Numbers(pub Vec<f64>);

impl Serialize for Numbers {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.0.len()))?;
        for &v in &self.0 {
            seq.serialize_element(&Num(v))?;
        }
        seq.end()
    }
}

/// Row-major matrix serialized with [`fmt17`].
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(transparent)]
pub struct Rows(pub Vec<Vec<f64>>);

impl Serialize for Rows {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.0.len()))?;
        for row in &self.0 {
            seq.serialize_element(&Numbers(row.clone()))?;
        }
        seq.end()
    }
}

/// One nodal trajectory to be written as CSV.
pub struct NodalSeries<'a> {
    /// Primal nodal values per step, `u⁰ … u^L`.
    pub u: &'a [Vec<f64>],
    /// Multipliers for steps `1 … L`.
    pub lambda: &'a [Vec<f64>],
    /// Lifting `P₀` added to obtain the price.
    pub p0: &'a [f64],
    pub delta_t: f64,
    /// Value of the `source` column, if the CSV has one.
    pub source: Option<&'a str>,
}

pub const TRAJECTORY_HEADER: &str = "step,t,s,u,lambda,price";

/// Writes one row per (step, interior node). The multiplier column is empty
/// at step 0, where it is undefined.
pub fn write_trajectory_rows<W: Write>(
    out: &mut W,
    mesh: &Mesh1D,
    series: &NodalSeries<'_>,
) -> io::Result<()> {
    let nodes = mesh.interior_nodes();
    for (n, u) in series.u.iter().enumerate() {
        let t = n as f64 * series.delta_t;
        let lambda = n.checked_sub(1).and_then(|i| series.lambda.get(i));
        for (i, &s) in nodes.iter().enumerate() {
            let l = lambda.map(|l| fmt17(l[i])).unwrap_or_default();
            write!(
                out,
                "{n},{},{},{},{},{}",
                fmt17(t),
                fmt17(s),
                fmt17(u[i]),
                l,
                fmt17(u[i] + series.p0[i])
            )?;
            match series.source {
                Some(src) => writeln!(out, ",{src}")?,
                None => writeln!(out)?,
            }
        }
    }
    Ok(())
}
