//! Problem files: a JSON document that points at a graph file and fixes p, a, u₀.
//!
//! ```json
//! {"graph": "g.json", "p": 3.0,
//!  "a": {"const": 2.0}, "u0": {"map": {"x1": 0.5, "x2": 1.5}},
//!  "ubar": 0.0, "integrator": {"rtol": 1e-10}}
//! ```
//!
//! The graph path is resolved relative to the problem file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use graphheat::presets::named_u0;
use graphheat::{parse_graph, Graph, IntegratorOptions, NodeField, ProblemSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldSpec {
    Const(f64),
    Map(BTreeMap<String, f64>),
    Preset(String),
}

impl FieldSpec {
    pub fn resolve(&self, g: &Graph, what: &str) -> CliResult<NodeField> {
        Ok(match self {
            FieldSpec::Const(c) => NodeField::constant(g, *c),
            FieldSpec::Map(m) => NodeField::from_map(g, m)?,
            FieldSpec::Preset(name) if what == "u0" => named_u0(g, name)?,
            FieldSpec::Preset(_) => {
                return Err(CliError::Usage(format!(
                    "`{what}` does not accept a preset"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub graph: PathBuf,
    pub p: f64,
    pub a: FieldSpec,
    pub u0: FieldSpec,
    #[serde(default)]
    pub ubar: f64,
    #[serde(default)]
    pub integrator: IntegratorOptions,
    /// Candidate positive equilibrium for the equilibrium criterion.
    #[serde(default)]
    pub equilibrium: Option<FieldSpec>,
}

/// A problem file with everything resolved.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub spec: ProblemSpec,
    pub integrator: IntegratorOptions,
    pub equilibrium: Option<NodeField>,
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn load_graph(path: &Path) -> CliResult<Graph> {
    Ok(parse_graph(&read_text(path)?)?)
}

pub fn load_problem(path: &Path) -> CliResult<LoadedProblem> {
    let file: ProblemFile =
        serde_json::from_str(&read_text(path)?).map_err(|e| CliError::format(path, e))?;
    let graph_path = path
        .parent()
        .unwrap_or_else(|| Path::new(""))
        .join(&file.graph);
    let graph = load_graph(&graph_path)?;
    let a = file.a.resolve(&graph, "a")?;
    let u0 = file.u0.resolve(&graph, "u0")?;
    let equilibrium = file
        .equilibrium
        .as_ref()
        .map(|f| f.resolve(&graph, "equilibrium"))
        .transpose()?;
    let spec = ProblemSpec::with_offset(graph, a, file.p, u0, file.ubar)?;
    file.integrator.validate()?;
    Ok(LoadedProblem {
        spec,
        integrator: file.integrator,
        equilibrium,
    })
}
