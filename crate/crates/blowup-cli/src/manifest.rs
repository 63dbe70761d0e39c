//! The on-disk run document: graph references with digests, partition
//! arrays, parameters, seed, mode, and whatever reports a command appended.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use blowup::graph::{load_graph, parse_graph, write_graph};
use blowup::partition::{BlowupInstance, Blueprint, Params, PartitionReport};
use blowup::props::PropertyReport;
use blowup::rga::{EmbeddingCheck, EmbeddingResult, Mode};
use blowup::{Graph, VertexSet};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Roles a graph file can play.
pub const ROLES: [&str; 4] = ["gamma", "g", "h", "r"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphRef {
    /// Relative to the manifest's directory unless absolute.
    pub path: String,
    pub sha256: String,
    pub n: usize,
    pub edges: usize,
}

/// Where the instance ended up after partitioning.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSummary {
    pub xbuf: Vec<Vec<usize>>,
    pub vmain: Vec<Vec<usize>>,
    pub vqueue: Vec<Vec<usize>>,
    pub vclique: Vec<Vec<usize>>,
    pub vbuffer: Vec<Vec<usize>>,
    pub cliques: Vec<Vec<Vec<usize>>>,
}

impl InstanceSummary {
    pub fn of(inst: &BlowupInstance) -> Self {
        fn lists<'a>(k: usize, f: impl Fn(usize) -> &'a VertexSet) -> Vec<Vec<usize>> {
            (0..k).map(|i| f(i).to_vec()).collect()
        }
        let k = inst.parts();
        InstanceSummary {
            xbuf: lists(k, |i| &inst.xbuf[i]),
            vmain: lists(k, |i| &inst.splits[i].main),
            vqueue: lists(k, |i| &inst.splits[i].queue),
            vclique: lists(k, |i| &inst.splits[i].clique),
            vbuffer: lists(k, |i| &inst.splits[i].buffer),
            cliques: inst.cliques.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpeSummary {
    pub checks: usize,
    pub violations: Vec<String>,
    pub invariant_violations: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Results {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embedding: Option<EmbeddingResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embedding_check: Option<EmbeddingCheck>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub properties: Vec<PropertyReport>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub beta: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gpe: Option<GpeSummary>,
    /// Wall-clock milliseconds per stage; only written on request.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub timing_ms: BTreeMap<String, f64>,
}

impl Results {
    pub fn is_empty(&self) -> bool {
        *self == Results::default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: u32,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    pub params: Params,
    pub graphs: BTreeMap<String, GraphRef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub xparts: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vparts: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Results::is_empty")]
    pub results: Results,
}

/// Graphs read back from a manifest, by role.
#[derive(Clone, Debug)]
pub struct Graphs(pub BTreeMap<String, Graph>);

impl Graphs {
    pub fn get(&self, role: &str) -> Result<&Graph, CliError> {
        self.0.get(role).ok_or_else(|| CliError::Schema(format!("manifest has no `{role}` graph")))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `g` in canonical form and returns a reference to it with `path`
/// stored as given.
pub fn write_graph_file(g: &Graph, file: &Path, stored_as: &str) -> Result<GraphRef, CliError> {
    let text = write_graph(g);
    fs::write(file, &text).map_err(|e| CliError::io(file, e))?;
    Ok(GraphRef { path: stored_as.to_string(), sha256: sha256_hex(text.as_bytes()), n: g.n(), edges: g.edge_count() })
}

impl Manifest {
    pub fn new(seed: u64, params: Params) -> Self {
        Manifest {
            schema_version: SCHEMA_VERSION,
            seed,
            mode: None,
            params,
            graphs: BTreeMap::new(),
            xparts: Vec::new(),
            vparts: Vec::new(),
            results: Results::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let m: Manifest = serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(CliError::Schema(format!("schema_version {} (expected {SCHEMA_VERSION})", m.schema_version)));
        }
        if let Some(role) = m.graphs.keys().find(|k| !ROLES.contains(&k.as_str())) {
            return Err(CliError::Schema(format!("unknown graph role `{role}`")));
        }
        Ok(m)
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    /// Reads a manifest; returns it with the directory its paths are relative to.
    pub fn load(path: &Path) -> Result<(Self, PathBuf), CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::parse(&text)?, dir))
    }

    /// Loads every referenced graph, checking digests and recorded sizes.
    pub fn load_graphs(&self, dir: &Path) -> Result<Graphs, CliError> {
        let mut out = BTreeMap::new();
        for (role, r) in &self.graphs {
            let file = dir.join(&r.path);
            let bytes = fs::read(&file).map_err(|e| CliError::io(&file, e))?;
            let found = sha256_hex(&bytes);
            if found != r.sha256 {
                return Err(CliError::Digest { path: file.display().to_string(), expected: r.sha256.clone(), found });
            }
            let text = String::from_utf8(bytes).map_err(|_| CliError::Schema(format!("{} is not UTF-8", file.display())))?;
            let g = parse_graph(&text)?;
            if g.n() != r.n || g.edge_count() != r.edges {
                return Err(CliError::Schema(format!("{}: size does not match the manifest", file.display())));
            }
            out.insert(role.clone(), g);
        }
        Ok(Graphs(out))
    }

    /// The unrestricted blueprint described by the manifest. `g` defaults to
    /// `gamma` and `r` to the complete graph on the parts.
    pub fn blueprint(&self, graphs: &Graphs) -> Result<Blueprint, CliError> {
        let gamma = graphs.get("gamma")?.clone();
        let g = graphs.0.get("g").cloned().unwrap_or_else(|| gamma.clone());
        let h = graphs.get("h")?.clone();
        let k = self.xparts.len();
        if k == 0 || self.vparts.len() != k {
            return Err(CliError::Schema(format!("need matching xparts and vparts, got {} and {}", k, self.vparts.len())));
        }
        let r = graphs.0.get("r").cloned().unwrap_or_else(|| Graph::complete(k));
        if r.n() != k {
            return Err(CliError::Schema(format!("reduced graph has {} vertices for {k} parts", r.n())));
        }
        if g.n() != gamma.n() {
            return Err(CliError::Schema("g and gamma differ in order".into()));
        }
        let sets = |parts: &[Vec<usize>], n: usize, what: &str| -> Result<Vec<VertexSet>, CliError> {
            parts
                .iter()
                .map(|p| match p.iter().find(|&&v| v >= n) {
                    Some(v) => Err(CliError::Schema(format!("{what} lists vertex {v} of a graph on {n}"))),
                    None => Ok(VertexSet::from_ids(n, p.iter().copied())),
                })
                .collect()
        };
        let xparts = sets(&self.xparts, h.n(), "xparts")?;
        let vparts = sets(&self.vparts, gamma.n(), "vparts")?;
        Ok(Blueprint::unrestricted(gamma, g, h, r, xparts, vparts))
    }
}

/// Path of `file` as seen from `to_dir`: relative when `file` lies below it,
/// absolute otherwise.
pub fn rebase(file: &Path, to_dir: &Path) -> String {
    let abs = |p: &Path| fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf());
    let (file, to) = (abs(file), abs(if to_dir.as_os_str().is_empty() { Path::new(".") } else { to_dir }));
    match file.strip_prefix(&to) {
        Ok(rel) => rel.display().to_string(),
        Err(_) => file.display().to_string(),
    }
}

/// Reads a graph file without a digest check, for `gen` inputs.
pub fn read_plain_graph(path: &Path) -> Result<Graph, CliError> {
    Ok(load_graph(path)?)
}
