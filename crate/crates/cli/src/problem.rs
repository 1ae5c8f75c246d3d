//! Problem files: a JSON document holding the graph and the datum.
//!
//! ```json
//! {
//!   "vertices": ["a", "b", "c"],
//!   "edges": [[1, 0], [2, 1]],
//!   "datum": [1.0, 0.0, -1.0],
//!   "cartesian": { "rows": 1, "cols": 3 }
//! }
//! ```
//!
//! `vertices` and `cartesian` are optional; `cartesian.grid` lists the
//! vertex at each grid cell in row-major order and defaults to the identity.

use std::path::Path;

use graphtv::{instances, OrientedGraph, VertexField};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const BUILTIN_PREFIX: &str = "builtin:";
pub const BUILTIN_NAMES: [&str; 2] = ["counterexample", "variant"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CartesianTag {
    pub rows: usize,
    pub cols: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<String>>,
    pub edges: Vec<[usize; 2]>,
    pub datum: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cartesian: Option<CartesianTag>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub graph: OrientedGraph,
    pub datum: VertexField<f64>,
}

impl ProblemFile {
    pub fn from_problem(problem: &Problem) -> Self {
        let g = &problem.graph;
        ProblemFile {
            vertices: g.names().map(<[String]>::to_vec),
            edges: g.edges().iter().map(|&(t, h)| [t, h]).collect(),
            datum: problem.datum.as_slice().to_vec(),
            cartesian: g.cartesian_layout().map(|c| {
                let identity = c.grid().iter().enumerate().all(|(k, &v)| k == v);
                CartesianTag {
                    rows: c.rows(),
                    cols: c.cols(),
                    grid: (!identity).then(|| c.grid().to_vec()),
                }
            }),
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("problem files always serialize");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str, source_name: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::parse(source_name, e))
    }

    pub fn into_problem(self, source_name: &str) -> Result<Problem, CliError> {
        let err = |e: graphtv::Error| CliError::parse(source_name, e);
        let n = self.datum.len();
        let mut graph = OrientedGraph::new(n, self.edges.iter().map(|&[t, h]| (t, h)).collect()).map_err(err)?;
        if let Some(names) = self.vertices {
            for (k, name) in names.iter().enumerate() {
                if name.is_empty() || name.chars().any(char::is_whitespace) {
                    return Err(CliError::parse(source_name, format!("vertex name {k} ({name:?}) is empty or contains whitespace")));
                }
                if names[..k].contains(name) {
                    return Err(CliError::parse(source_name, format!("vertex name {name:?} is repeated")));
                }
            }
            graph = graph.with_names(names).map_err(err)?;
        }
        if let Some(tag) = self.cartesian {
            if tag.rows == 0 || tag.cols == 0 {
                return Err(CliError::parse(source_name, "cartesian rows and cols must be positive"));
            }
            graph = graph.with_cartesian(tag.rows, tag.cols, tag.grid).map_err(err)?;
        }
        let datum = VertexField::new(self.datum).map_err(err)?;
        Ok(Problem { graph, datum })
    }
}

pub fn builtin(name: &str) -> Option<Problem> {
    let (graph, datum) = match name {
        "counterexample" => instances::counterexample::<f64>(),
        "variant" => instances::counterexample_variant::<f64>(),
        _ => return None,
    };
    Some(Problem { graph, datum })
}

/// Loads `builtin:NAME` or a problem file from disk.
pub fn load(source: &str) -> Result<Problem, CliError> {
    if let Some(name) = source.strip_prefix(BUILTIN_PREFIX) {
        return builtin(name).ok_or_else(|| {
            CliError::Flags(format!("unknown built-in instance {name:?}; available: {}", BUILTIN_NAMES.join(", ")))
        });
    }
    let text = std::fs::read_to_string(Path::new(source)).map_err(|error| CliError::Io {
        path: source.to_string(),
        error,
    })?;
    ProblemFile::from_json(&text, source)?.into_problem(source)
}
