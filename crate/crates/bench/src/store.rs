//! On-disk result store: `manifest.json` plus one JSON-lines file per
//! method under `records/`, each written in (instance, depth) order of the
//! plan. Wall-clock timings go to `timings.csv`, which is not part of the
//! reproducible store.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use falqon::RunRecord;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, BenchError, Result};
use crate::methods::MethodSpec;
use crate::plan::{BenchmarkPlan, EnsembleSource, Instance};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RECORDS_DIR: &str = "records";
pub const TIMINGS_FILE: &str = "timings.csv";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestInstance {
    pub id: usize,
    pub graph6: String,
}

/// Reporting conventions written next to the results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub parameter_order: String,
    pub evaluation_accounting: String,
    pub bit_order: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            parameter_order: "layer-major; problem angles (per edge in sorted edge order for multi-angle) \
                              before driver angles (per qubit) within each layer"
                .into(),
            evaluation_accounting: "FALQON feedback measurement: 1 per layer (FO) or 3 (SO); every optimizer cost \
                                    evaluation counts 1; QAOA counts its start (Powell) or final iterate (gradient \
                                    descent); warm starts add the FALQON and QAOA counts"
                .into(),
            bit_order: "bit j of a basis index is qubit j and vertex j; bit 0 is spin +1".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: u32,
    pub ensemble: EnsembleSource,
    pub instances: Vec<ManifestInstance>,
    pub methods: Vec<MethodSpec>,
    pub depths: Vec<usize>,
    pub shots: u32,
    pub success_shots: u32,
    pub learning_rate: f64,
    pub fd_step: f64,
    pub base_seed: u64,
    pub conventions: Conventions,
}

impl Manifest {
    pub fn new(plan: &BenchmarkPlan, instances: &[Instance]) -> Self {
        Self {
            format: FORMAT_VERSION,
            ensemble: plan.ensemble.clone(),
            instances: instances
                .iter()
                .map(|i| ManifestInstance {
                    id: i.id,
                    graph6: i.graph6.clone(),
                })
                .collect(),
            methods: plan.methods.clone(),
            depths: plan.depths.clone(),
            shots: plan.shots,
            success_shots: plan.success_shots,
            learning_rate: plan.learning_rate,
            fd_step: plan.fd_step,
            base_seed: plan.base_seed,
            conventions: Conventions::default(),
        }
    }

    /// Name of the first setting that differs from `other`, ignoring where
    /// the ensemble was read from.
    pub fn first_difference(&self, other: &Manifest) -> Option<&'static str> {
        let checks = [
            ("format", self.format == other.format),
            ("instances", self.instances == other.instances),
            ("methods", self.methods == other.methods),
            ("depths", self.depths == other.depths),
            ("shots", self.shots == other.shots),
            ("success_shots", self.success_shots == other.success_shots),
            ("learning_rate", self.learning_rate == other.learning_rate),
            ("fd_step", self.fd_step == other.fd_step),
            ("base_seed", self.base_seed == other.base_seed),
        ];
        checks
            .into_iter()
            .find(|(_, same)| !same)
            .map(|(name, _)| name)
    }

    pub fn grid_size(&self) -> usize {
        self.methods.len() * self.instances.len() * self.depths.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub method: String,
    pub instance: usize,
    pub depth: usize,
    pub seed: u64,
    pub error: String,
}

/// One line of a records file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum StoredCell {
    Ok(RunRecord),
    Failed(CellFailure),
}

impl StoredCell {
    pub fn key(&self) -> (usize, usize) {
        match self {
            Self::Ok(r) => (r.instance, r.depth),
            Self::Failed(f) => (f.instance, f.depth),
        }
    }

    pub fn to_line(&self) -> String {
        let mut line = serde_json::to_string(self).expect("cells serialize");
        line.push('\n');
        line
    }
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.root.join(MANIFEST_FILE)
    }

    pub fn records_path(&self, method_id: &str) -> PathBuf {
        self.root
            .join(RECORDS_DIR)
            .join(format!("{method_id}.jsonl"))
    }

    pub fn timings_path(&self) -> PathBuf {
        self.root.join(TIMINGS_FILE)
    }

    pub fn manifest(&self) -> Result<Option<Manifest>> {
        let path = self.manifest_path();
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| BenchError::Parse {
                path,
                line: e.line(),
                reason: e.to_string(),
            })
    }

    pub fn write_manifest(&self, manifest: &Manifest) -> Result<()> {
        let dir = self.root.join(RECORDS_DIR);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
        text.push('\n');
        let path = self.manifest_path();
        fs::write(&path, text).map_err(io_err(&path))
    }

    /// Every cell stored for `method_id`, in file order.
    pub fn read_cells(&self, method_id: &str) -> Result<Vec<StoredCell>> {
        let path = self.records_path(method_id);
        if !path.exists() {
            return Ok(Vec::new());
        }
        let file = File::open(&path).map_err(io_err(&path))?;
        let mut cells = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(io_err(&path))?;
            if line.trim().is_empty() {
                continue;
            }
            let cell = serde_json::from_str(&line).map_err(|e| BenchError::Parse {
                path: path.clone(),
                line: i + 1,
                reason: e.to_string(),
            })?;
            cells.push(cell);
        }
        Ok(cells)
    }

    /// Drops a trailing line left incomplete by an interrupted write, then
    /// reads the file.
    pub fn recover_cells(&self, method_id: &str) -> Result<Vec<StoredCell>> {
        let path = self.records_path(method_id);
        if path.exists() {
            let bytes = fs::read(&path).map_err(io_err(&path))?;
            if bytes.last().is_some_and(|&b| b != b'\n') {
                let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
                let file = OpenOptions::new()
                    .write(true)
                    .open(&path)
                    .map_err(io_err(&path))?;
                file.set_len(keep as u64).map_err(io_err(&path))?;
            }
        }
        self.read_cells(method_id)
    }

    pub fn append_cell(&self, method_id: &str, cell: &StoredCell) -> Result<()> {
        let path = self.records_path(method_id);
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err(&path))?;
        file.write_all(cell.to_line().as_bytes())
            .map_err(io_err(&path))
    }

    /// Successful records of every method in the manifest, in store order.
    pub fn load_records(&self) -> Result<Vec<RunRecord>> {
        let manifest = self.manifest()?.ok_or(BenchError::EmptyStore)?;
        let mut out = Vec::new();
        for m in &manifest.methods {
            for cell in self.read_cells(&m.id())? {
                if let StoredCell::Ok(r) = cell {
                    out.push(r);
                }
            }
        }
        Ok(out)
    }

    pub fn load_failures(&self) -> Result<Vec<CellFailure>> {
        let manifest = self.manifest()?.ok_or(BenchError::EmptyStore)?;
        let mut out = Vec::new();
        for m in &manifest.methods {
            for cell in self.read_cells(&m.id())? {
                if let StoredCell::Failed(f) = cell {
                    out.push(f);
                }
            }
        }
        Ok(out)
    }
}
