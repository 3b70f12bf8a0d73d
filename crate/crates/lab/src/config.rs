//! Declarative experiment configuration.
//!
//! A config is a JSON object. Only `graph` is required:
//!
//! ```json
//! {
//!   "graph": {"kind": "regular", "n": 100, "degree": 6, "seed": 7},
//!   "lambda_ratio": 0.5,
//!   "replicates": 200
//! }
//! ```
//!
//! Command-line flags override file values, and the resolved config is
//! echoed into every report so a run can be replayed from its output.

use std::path::{Path, PathBuf};

use hardcore_core::graph::{gnp, random_connected, random_regular, random_regular_bipartite, random_tree};
use hardcore_core::model::lambda_c;
use hardcore_core::Graph;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::formats::load_edge_list;

pub const DEFAULT_DELTA: f64 = hardcore_core::model::DEFAULT_DELTA;
pub const DEFAULT_REPLICATES: usize = 100;

/// Where the graph comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GraphSpec {
    File { path: PathBuf },
    Regular { n: usize, degree: usize, #[serde(default)] seed: u64 },
    Bipartite { n_per_side: usize, degree: usize, #[serde(default)] seed: u64 },
    Tree { n: usize, #[serde(default)] seed: u64 },
    Gnp { n: usize, p: f64, #[serde(default)] seed: u64 },
    Connected { n: usize, extra_edges: usize, #[serde(default)] seed: u64 },
    Cycle { n: usize },
    Path { n: usize },
    Grid { rows: usize, cols: usize },
    Complete { n: usize },
    Star { leaves: usize },
    Heawood,
    Petersen,
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph> {
        Ok(match *self {
            Self::File { ref path } => {
                let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
                load_edge_list(&text, &path.display().to_string())?
            }
            Self::Regular { n, degree, seed } => random_regular(n, degree, seed)?,
            Self::Bipartite { n_per_side, degree, seed } => {
                random_regular_bipartite(n_per_side, degree, seed)?
            }
            Self::Tree { n, seed } => random_tree(n, seed),
            Self::Gnp { n, p, seed } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(LabError::usage(format!("edge probability {p} is not in [0, 1]")));
                }
                gnp(n, p, seed)
            }
            Self::Connected { n, extra_edges, seed } => random_connected(n, extra_edges, seed),
            Self::Cycle { n } => {
                if n < 3 {
                    return Err(LabError::usage("a cycle needs at least 3 vertices"));
                }
                Graph::cycle(n)
            }
            Self::Path { n } => Graph::path(n),
            Self::Grid { rows, cols } => Graph::grid(rows, cols),
            Self::Complete { n } => Graph::complete(n),
            Self::Star { leaves } => Graph::star(leaves),
            Self::Heawood => Graph::heawood(),
            Self::Petersen => Graph::petersen(),
        })
    }
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

fn default_replicates() -> usize {
    DEFAULT_REPLICATES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    /// Absolute fugacity. Exclusive with `lambda_ratio`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Fugacity as a multiple of `λ_c(Δ)`, `Δ` the maximum degree of the graph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_ratio: Option<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Accuracy parameter; each experiment has its own default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    /// Experiment-specific default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn for_graph(graph: GraphSpec) -> Self {
        Self {
            graph,
            lambda: None,
            lambda_ratio: None,
            delta: DEFAULT_DELTA,
            epsilon: None,
            replicates: DEFAULT_REPLICATES,
            burn_in: None,
            window: None,
            seed: None,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda.is_some() && self.lambda_ratio.is_some() {
            return Err(LabError::usage("lambda and lambda_ratio are mutually exclusive"));
        }
        for (name, value) in [("lambda", self.lambda), ("lambda_ratio", self.lambda_ratio)] {
            if let Some(x) = value {
                if !(x > 0.0 && x.is_finite()) {
                    return Err(LabError::usage(format!("{name} must be positive, got {x}")));
                }
            }
        }
        if self.replicates == 0 {
            return Err(LabError::usage("replicates must be at least 1"));
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0) {
                return Err(LabError::usage(format!("epsilon must be positive, got {eps}")));
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(LabError::usage(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        Ok(())
    }

    /// The absolute fugacity for `g`.
    pub fn resolve_lambda(&self, g: &Graph) -> Result<f64> {
        match (self.lambda, self.lambda_ratio) {
            (Some(_), Some(_)) => Err(LabError::usage("lambda and lambda_ratio are mutually exclusive")),
            (Some(lambda), None) => Ok(lambda),
            (None, Some(ratio)) => {
                let lc = lambda_c(g.max_degree()).map_err(|_| {
                    LabError::usage(format!(
                        "lambda_ratio needs maximum degree at least 3, the graph has {}",
                        g.max_degree()
                    ))
                })?;
                Ok(ratio * lc)
            }
            (None, None) => Err(LabError::usage("one of lambda or lambda_ratio is required")),
        }
    }

    pub fn seed_or_default(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

/// Parses a config. An empty document counts as `{}`, so the error names
/// the missing `graph` field.
pub fn parse_config(text: &str, source: &str) -> Result<ExperimentConfig> {
    let text = if text.trim().is_empty() { "{}" } else { text };
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        let (path, inner) = match path.as_str() {
            "graph" => locate_graph_error(text).unwrap_or((path, inner)),
            _ => (path, inner),
        };
        let message = if path == "." {
            inner
        } else {
            format!("at `{path}`: {inner}")
        };
        LabError::Config {
            path: source.to_string(),
            message,
        }
    })?;
    config.validate().map_err(|e| LabError::Config {
        path: source.to_string(),
        message: e.to_string(),
    })?;
    Ok(config)
}

/// Internally tagged enums are buffered before their fields are read, which
/// hides the failing field. Re-reading the graph object with the tag lifted
/// out recovers it.
fn locate_graph_error(text: &str) -> Option<(String, String)> {
    #[derive(Deserialize)]
    #[serde(rename_all = "kebab-case")]
    #[allow(dead_code)]
    enum Lifted {
        File { path: PathBuf },
        Regular { n: usize, degree: usize, #[serde(default)] seed: u64 },
        Bipartite { n_per_side: usize, degree: usize, #[serde(default)] seed: u64 },
        Tree { n: usize, #[serde(default)] seed: u64 },
        Gnp { n: usize, p: f64, #[serde(default)] seed: u64 },
        Connected { n: usize, extra_edges: usize, #[serde(default)] seed: u64 },
        Cycle { n: usize },
        Path { n: usize },
        Grid { rows: usize, cols: usize },
        Complete { n: usize },
        Star { leaves: usize },
        Heawood {},
        Petersen {},
    }
    let mut root: serde_json::Value = serde_json::from_str(text).ok()?;
    let graph = root.get_mut("graph")?.as_object_mut()?;
    let kind = graph.remove("kind")?.as_str()?.to_string();
    let lifted = serde_json::json!({ kind: graph });
    let err = serde_path_to_error::deserialize::<_, Lifted>(lifted).err()?;
    let path = err.path().to_string();
    let field = path.split_once('.').map(|(_, rest)| rest)?;
    Some((format!("graph.{field}"), err.into_inner().to_string()))
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    parse_config(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_names_graph() {
        let err = parse_config("", "c.json").unwrap_err().to_string();
        assert!(err.contains("missing field `graph`"), "{err}");
        assert!(err.starts_with("c.json:"));
    }

    #[test]
    fn defaults_apply() {
        let c = parse_config(r#"{"lambda_ratio": 0.5, "graph": {"kind": "heawood"}}"#, "c").unwrap();
        assert_eq!(c.delta, 0.2);
        assert_eq!(c.replicates, DEFAULT_REPLICATES);
        let g = c.graph.build().unwrap();
        assert!((c.resolve_lambda(&g).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn errors_carry_field_paths() {
        let err = parse_config(r#"{"graph": {"kind": "regular", "n": "ten", "degree": 3}}"#, "c")
            .unwrap_err()
            .to_string();
        assert!(err.contains("graph.n"), "{err}");
        let err = parse_config(r#"{"graph": {"kind": "petersen"}, "lamda": 1}"#, "c")
            .unwrap_err()
            .to_string();
        assert!(err.contains("lamda"), "{err}");
        let err = parse_config(r#"{"graph": {"kind": "petersen"}, "lambda": 1, "lambda_ratio": 0.5}"#, "c")
            .unwrap_err()
            .to_string();
        assert!(err.contains("mutually exclusive"), "{err}");
        let err = parse_config(r#"{"graph": {"kind": "petersen"}, "replicates": 0}"#, "c")
            .unwrap_err()
            .to_string();
        assert!(err.contains("replicates"), "{err}");
    }

    #[test]
    fn echo_round_trips() {
        let mut c = ExperimentConfig::for_graph(GraphSpec::Regular { n: 20, degree: 3, seed: 4 });
        c.lambda = Some(0.7);
        c.seed = Some(9);
        c.burn_in = Some(100);
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(parse_config(&text, "echo").unwrap(), c);
    }

    #[test]
    fn ratio_needs_degree_three() {
        let c = ExperimentConfig {
            lambda_ratio: Some(0.5),
            ..ExperimentConfig::for_graph(GraphSpec::Path { n: 4 })
        };
        let g = c.graph.build().unwrap();
        assert!(c.resolve_lambda(&g).is_err());
    }
}
