//! JSON structure configs.
//!
//! Top-level keys: `n`, `boundary` [{label, cell}], `gluings`
//! [[[cell,label],[cell,label]]], `conductances` [{u,v,a}], `mass`
//! [{label,b}], `alpha`, `beta`. Parsing checks shape only; semantics
//! (ranges, hypothesis (H), connectivity) are validation's job.

use fractal_spectra_core::structure::{BoundaryLabel, Gluing, SelfSimilarStructure};
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum SchemaError {
    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("duplicate boundary label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown boundary label `{0}`")]
    UnknownLabel(String),
    #[error("mass entry for `{0}` given twice")]
    DuplicateMass(String),
    #[error("no mass entry for label `{0}`")]
    MissingMass(String),
    #[error("conductance for ({0},{1}) given twice")]
    DuplicateConductance(String, String),
    #[error("alpha and beta must each have n = {n} entries, got {alpha}/{beta}")]
    WeightArity { n: usize, alpha: usize, beta: usize },
    #[error("n must be at least 2 and boundary non-empty")]
    Degenerate,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n: usize,
    boundary: Vec<RawLabel>,
    #[serde(default)]
    gluings: Vec<((usize, String), (usize, String))>,
    #[serde(default)]
    conductances: Vec<RawEdge>,
    mass: Vec<RawMass>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLabel {
    label: String,
    cell: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    u: String,
    v: String,
    a: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMass {
    label: String,
    b: f64,
}

/// Parse a JSON config into a structure. `gamma` is computed as
/// `(alpha_1 beta_1)^{-1}`; everything else is carried through verbatim.
pub fn parse_structure(text: &str) -> Result<SelfSimilarStructure, SchemaError> {
    let raw: RawConfig = serde_json::from_str(text)?;
    if raw.n < 2 || raw.boundary.is_empty() {
        return Err(SchemaError::Degenerate);
    }
    if raw.alpha.len() != raw.n || raw.beta.len() != raw.n {
        return Err(SchemaError::WeightArity {
            n: raw.n,
            alpha: raw.alpha.len(),
            beta: raw.beta.len(),
        });
    }
    let k = raw.boundary.len();
    let labels: Vec<&str> = raw.boundary.iter().map(|l| l.label.as_str()).collect();
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(SchemaError::DuplicateLabel(l.to_string()));
        }
    }
    let index = |name: &str| -> Result<usize, SchemaError> {
        labels
            .iter()
            .position(|l| *l == name)
            .ok_or_else(|| SchemaError::UnknownLabel(name.to_string()))
    };

    let mut conductances = vec![vec![0.0; k]; k];
    let mut seen = vec![vec![false; k]; k];
    for e in &raw.conductances {
        let (u, v) = (index(&e.u)?, index(&e.v)?);
        if seen[u][v] {
            return Err(SchemaError::DuplicateConductance(e.u.clone(), e.v.clone()));
        }
        seen[u][v] = true;
        seen[v][u] = true;
        conductances[u][v] = e.a;
        conductances[v][u] = e.a;
    }

    let mut base_mass = vec![f64::NAN; k];
    for m in &raw.mass {
        let z = index(&m.label)?;
        if !base_mass[z].is_nan() {
            return Err(SchemaError::DuplicateMass(m.label.clone()));
        }
        base_mass[z] = m.b;
    }
    if let Some(z) = base_mass.iter().position(|b| b.is_nan()) {
        return Err(SchemaError::MissingMass(labels[z].to_string()));
    }

    let gluings = raw
        .gluings
        .iter()
        .map(|((ca, la), (cb, lb))| {
            Ok(Gluing { a: (*ca, index(la)?), b: (*cb, index(lb)?) })
        })
        .collect::<Result<Vec<_>, SchemaError>>()?;

    let gamma = 1.0 / (raw.alpha[0] * raw.beta[0]);
    Ok(SelfSimilarStructure {
        cell_count: raw.n,
        boundary_labels: raw
            .boundary
            .into_iter()
            .map(|l| BoundaryLabel { label: l.label, cell: l.cell })
            .collect(),
        gluings,
        conductances,
        base_mass,
        alpha: raw.alpha,
        beta: raw.beta,
        gamma,
    })
}

/// The interval fixture as a config document, used by tests and docs.
pub const INTERVAL_CONFIG: &str = r#"{
  "n": 2,
  "boundary": [{"label": "q0", "cell": 1}, {"label": "q1", "cell": 2}],
  "gluings": [[[1, "q1"], [2, "q0"]]],
  "conductances": [{"u": "q0", "v": "q1", "a": 1.0}],
  "mass": [{"label": "q0", "b": 0.5}, {"label": "q1", "b": 0.5}],
  "alpha": [0.5, 0.5],
  "beta": [0.5, 0.5]
}"#;
