//! Benchmark plans, the instance ensemble and JSON plan files.

use std::path::{Path, PathBuf};

use falqon::graphs::{emit_graph6, enumerate_cubic_graphs, exact_maxcut, parse_graph6_file};
use falqon::hamiltonians::IsingProblem;
use falqon::statevector::DEFAULT_SHOTS;
use falqon::{Graph, MaxCutSolution, OptimizerKind, ShotPolicy};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, BenchError, Result};
use crate::methods::{GradientSettings, MethodSpec};

/// Where the graphs come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EnsembleSource {
    /// Every non-isomorphic cubic graph on `n_vertices` vertices.
    Generator {
        n_vertices: usize,
    },
    Graph6File {
        path: PathBuf,
    },
}

impl EnsembleSource {
    /// `builtin` (12 vertices), `builtin:<n>`, or a graph6 file path.
    pub fn parse(text: &str) -> Result<Self> {
        match text.strip_prefix("builtin") {
            Some("") => Ok(Self::Generator { n_vertices: 12 }),
            Some(rest) => {
                let n = rest
                    .strip_prefix(':')
                    .and_then(|n| n.parse().ok())
                    .ok_or_else(|| {
                        BenchError::InvalidPlan(format!(
                            "bad ensemble `{text}`, expected builtin:<n>"
                        ))
                    })?;
                Ok(Self::Generator { n_vertices: n })
            }
            None => Ok(Self::Graph6File {
                path: PathBuf::from(text),
            }),
        }
    }

    pub fn load(&self) -> Result<Vec<Graph>> {
        match self {
            Self::Generator { n_vertices } => Ok(enumerate_cubic_graphs(*n_vertices)?),
            Self::Graph6File { path } => {
                let text = std::fs::read_to_string(path).map_err(io_err(path))?;
                Ok(parse_graph6_file(&text)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkPlan {
    pub ensemble: EnsembleSource,
    /// Ensemble indices to run; `None` runs every graph.
    pub instances: Option<Vec<usize>>,
    pub methods: Vec<MethodSpec>,
    pub depths: Vec<usize>,
    /// Shots per cost estimate inside the optimizers; 0 means exact.
    pub shots: u32,
    /// Shots for the final success-probability estimate; 0 means exact.
    pub success_shots: u32,
    /// Step size of QAOA gradient descent.
    pub learning_rate: f64,
    /// Central-difference step of QAOA gradient descent.
    pub fd_step: f64,
    pub base_seed: u64,
    pub workers: usize,
    pub out: PathBuf,
}

impl Default for BenchmarkPlan {
    fn default() -> Self {
        Self {
            ensemble: EnsembleSource::Generator { n_vertices: 12 },
            instances: None,
            methods: MethodSpec::catalogue(),
            depths: (1..=10).collect(),
            shots: DEFAULT_SHOTS,
            success_shots: DEFAULT_SHOTS,
            learning_rate: OptimizerKind::DEFAULT_LEARNING_RATE,
            fd_step: OptimizerKind::DEFAULT_FD_STEP,
            base_seed: 0,
            workers: default_workers(),
            out: PathBuf::from("results"),
        }
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

impl BenchmarkPlan {
    pub fn cost_policy(&self) -> ShotPolicy {
        ShotPolicy::from_shots(self.shots)
    }

    pub fn success_policy(&self) -> ShotPolicy {
        ShotPolicy::from_shots(self.success_shots)
    }

    /// Gradient-descent hyperparameters for QAOA cells.
    pub fn gradient_descent(&self) -> GradientSettings {
        GradientSettings {
            learning_rate: self.learning_rate,
            fd_step: self.fd_step,
        }
    }

    /// Checks everything that does not need the ensemble.
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() || self.depths.is_empty() {
            return Err(BenchError::InvalidPlan(
                "need at least one method and one depth".into(),
            ));
        }
        if let Some(d) = self.depths.iter().find(|&&d| d == 0) {
            return Err(BenchError::InvalidPlan(format!(
                "depth {d} is not positive"
            )));
        }
        if has_duplicates(&self.depths) || has_duplicates(&self.methods) {
            return Err(BenchError::InvalidPlan(
                "methods and depths must not repeat".into(),
            ));
        }
        if self
            .instances
            .as_ref()
            .is_some_and(|i| i.is_empty() || has_duplicates(i))
        {
            return Err(BenchError::InvalidPlan(
                "instance selection must be non-empty without repeats".into(),
            ));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(BenchError::InvalidPlan(format!(
                "learning rate {} is not positive",
                self.learning_rate
            )));
        }
        if !(self.fd_step.is_finite() && self.fd_step > 0.0) {
            return Err(BenchError::InvalidPlan(format!(
                "finite-difference step {} is not positive",
                self.fd_step
            )));
        }
        if self.workers == 0 {
            return Err(BenchError::InvalidPlan("need at least one worker".into()));
        }
        Ok(())
    }

    /// Loads the ensemble and solves every selected instance exactly.
    pub fn prepare_instances(&self) -> Result<Vec<Instance>> {
        let graphs = self.ensemble.load()?;
        let ids: Vec<usize> = match &self.instances {
            Some(ids) => ids.clone(),
            None => (0..graphs.len()).collect(),
        };
        ids.into_iter()
            .map(|id| {
                let graph = graphs.get(id).cloned().ok_or_else(|| {
                    BenchError::InvalidPlan(format!(
                        "instance {id} outside an ensemble of {} graphs",
                        graphs.len()
                    ))
                })?;
                Instance::new(id, graph)
            })
            .collect()
    }

    /// Applies every setting present in `config`.
    pub fn apply(&mut self, config: PlanConfig) -> Result<()> {
        if let Some(g) = config.graphs {
            self.ensemble = EnsembleSource::parse(&g)?;
        }
        if let Some(i) = config.instances {
            self.instances = Some(parse_index_list(&i)?);
        }
        if let Some(m) = config.methods {
            self.methods = MethodSpec::parse_list(&m)?;
        }
        if let Some(d) = config.depths {
            self.depths = parse_index_list(&d)?;
        }
        if let Some(s) = config.shots {
            self.shots = s;
        }
        if let Some(s) = config.success_shots {
            self.success_shots = s;
        }
        if let Some(lr) = config.learning_rate {
            self.learning_rate = lr;
        }
        if let Some(h) = config.fd_step {
            self.fd_step = h;
        }
        if let Some(s) = config.seed {
            self.base_seed = s;
        }
        if let Some(w) = config.workers {
            self.workers = w;
        }
        if let Some(o) = config.out {
            self.out = o;
        }
        Ok(())
    }
}

fn has_duplicates<T: PartialEq>(items: &[T]) -> bool {
    items
        .iter()
        .enumerate()
        .any(|(i, x)| items[..i].contains(x))
}

/// Plan settings as written in a JSON plan file or given as flags; absent
/// fields keep their current value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    pub graphs: Option<String>,
    pub instances: Option<String>,
    pub methods: Option<String>,
    pub depths: Option<String>,
    pub shots: Option<u32>,
    pub success_shots: Option<u32>,
    pub learning_rate: Option<f64>,
    pub fd_step: Option<f64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

impl PlanConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|e| BenchError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            reason: e.to_string(),
        })
    }
}

/// Comma-separated integers and inclusive ranges, e.g. `1..10` or `1,3,5..8`.
pub fn parse_index_list(text: &str) -> Result<Vec<usize>> {
    let bad =
        || BenchError::InvalidPlan(format!("bad list `{text}`, expected items like 3 or 1..10"));
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once("..") {
            Some((a, b)) => {
                let a: usize = a.trim().parse().map_err(|_| bad())?;
                let b: usize = b
                    .trim()
                    .trim_start_matches('=')
                    .parse()
                    .map_err(|_| bad())?;
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(item.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

/// One graph with its Hamiltonian and exact optimum.
#[derive(Debug, Clone)]
pub struct Instance {
    pub id: usize,
    pub graph6: String,
    pub problem: IsingProblem,
    pub optimum: MaxCutSolution,
}

impl Instance {
    pub fn new(id: usize, graph: Graph) -> Result<Self> {
        let optimum = exact_maxcut(&graph)?;
        let graph6 = emit_graph6(&graph);
        Ok(Self {
            id,
            graph6,
            problem: IsingProblem::new(graph)?,
            optimum,
        })
    }
}
