//! JSON file formats: graphs, trajectories, trajectory sets, priors and templates.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use gtl_core::formula::{parse, ParamKind, ParamRange, ParameterBox};
use gtl_core::prob::PriorModel;
use gtl_core::templates::{default_box, DataStats, Template};
use gtl_core::{LabeledGraph, Trajectory};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("cannot read `{0}`: {1}")]
    Read(PathBuf, std::io::Error),
    #[error("cannot write `{0}`: {1}")]
    Write(PathBuf, std::io::Error),
    #[error("malformed JSON in `{0}`: {1}")]
    Json(PathBuf, serde_json::Error),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Core(#[from] gtl_core::Error),
}

pub type Result<T> = std::result::Result<T, IoError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeEntry {
    pub id: String,
    pub ends: [String; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub nodes: Vec<String>,
    #[serde(default)]
    pub edges: Vec<EdgeEntry>,
}

impl GraphFile {
    pub fn build(&self) -> Result<LabeledGraph> {
        let edges = self
            .edges
            .iter()
            .map(|e| (e.id.clone(), e.ends[0].clone(), e.ends[1].clone()));
        Ok(LabeledGraph::new(self.nodes.iter().cloned(), edges)?)
    }

    pub fn from_graph(g: &LabeledGraph) -> Self {
        Self {
            nodes: g.nodes().map(|v| g.node_name(v).to_string()).collect(),
            edges: g
                .edges()
                .map(|e| {
                    let (a, b) = g.endpoints(e);
                    EdgeEntry {
                        id: g.edge_name(e).to_string(),
                        ends: [g.node_name(a).to_string(), g.node_name(b).to_string()],
                    }
                })
                .collect(),
        }
    }
}

/// A graph given inline or as a path relative to the referring file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphRef {
    Path(String),
    Inline(GraphFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphRef>,
    #[serde(rename = "L")]
    pub len: usize,
    pub node_labels: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub edge_labels: BTreeMap<String, Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<i8>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    Many(Vec<T>),
    One(T),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::Many(v) => v,
            OneOrMany::One(x) => vec![x],
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| IoError::Read(path.to_path_buf(), e))?;
    serde_json::from_str(&text).map_err(|e| IoError::Json(path.to_path_buf(), e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| IoError::Format(format!("cannot serialize: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| IoError::Write(path.to_path_buf(), e))
}

pub fn load_graph(path: &Path) -> Result<LabeledGraph> {
    read_json::<GraphFile>(path)?.build()
}

/// Resolves graph references, sharing one `Arc` per distinct graph.
struct GraphCache {
    base: PathBuf,
    default: Option<Arc<LabeledGraph>>,
    loaded: BTreeMap<String, Arc<LabeledGraph>>,
}

impl GraphCache {
    fn new(file: &Path, default: Option<Arc<LabeledGraph>>) -> Self {
        Self {
            base: file.parent().map(Path::to_path_buf).unwrap_or_default(),
            default,
            loaded: BTreeMap::new(),
        }
    }

    fn resolve(&mut self, r: Option<&GraphRef>) -> Result<Arc<LabeledGraph>> {
        if let Some(g) = &self.default {
            return Ok(g.clone());
        }
        let g = match r {
            None => {
                return Err(IoError::Format(
                    "no graph given: pass --graph or add a \"graph\" field".into(),
                ))
            }
            Some(GraphRef::Path(p)) => {
                if let Some(g) = self.loaded.get(p) {
                    return Ok(g.clone());
                }
                let g = Arc::new(load_graph(&self.base.join(p))?);
                self.loaded.insert(p.clone(), g.clone());
                g
            }
            Some(GraphRef::Inline(f)) => Arc::new(f.build()?),
        };
        // later references with the same structure share the first graph
        self.default = Some(g.clone());
        Ok(g)
    }
}

impl TrajectoryFile {
    pub fn build(&self, graph: Arc<LabeledGraph>) -> Result<Trajectory> {
        let mut nodes = Vec::with_capacity(graph.node_count());
        for v in graph.nodes() {
            let name = graph.node_name(v);
            let series = self
                .node_labels
                .get(name)
                .ok_or_else(|| IoError::Format(format!("no labels for node `{name}`")))?;
            nodes.push(series.clone());
        }
        let mut edges = Vec::with_capacity(graph.edge_count());
        for e in graph.edges() {
            let name = graph.edge_name(e);
            let series = self
                .edge_labels
                .get(name)
                .ok_or_else(|| IoError::Format(format!("no labels for edge `{name}`")))?;
            edges.push(series.clone());
        }
        for name in self.node_labels.keys() {
            if graph.node(name).is_none() {
                return Err(IoError::Format(format!("labels for unknown node `{name}`")));
            }
        }
        Ok(Trajectory::new(graph, self.len, nodes, edges)?)
    }

    pub fn from_trajectory(g: &Trajectory, label: Option<i8>, inline_graph: bool) -> Self {
        let graph = g.graph();
        Self {
            graph: inline_graph.then(|| GraphRef::Inline(GraphFile::from_graph(graph))),
            len: g.len(),
            node_labels: graph
                .nodes()
                .map(|v| (graph.node_name(v).to_string(), g.node_series(v).to_vec()))
                .collect(),
            edge_labels: graph
                .edges()
                .map(|e| (graph.edge_name(e).to_string(), g.edge_series(e).to_vec()))
                .collect(),
            label,
        }
    }
}

/// Trajectories read from a file holding one trajectory or an array of them, with their
/// optional labels.
pub fn load_trajectories(
    path: &Path,
    graph: Option<Arc<LabeledGraph>>,
) -> Result<Vec<(Trajectory, Option<i8>)>> {
    let files = read_json::<OneOrMany<TrajectoryFile>>(path)?.into_vec();
    let mut cache = GraphCache::new(path, graph);
    let mut out = Vec::with_capacity(files.len());
    for (i, f) in files.iter().enumerate() {
        let g = cache.resolve(f.graph.as_ref())?;
        if let Some(GraphRef::Inline(inline)) = &f.graph {
            if !inline.build()?.same_structure(&g) {
                return Err(IoError::Format(format!("trajectory {i} uses a different graph")));
            }
        }
        let t = f
            .build(g)
            .map_err(|e| IoError::Format(format!("trajectory {i}: {e}")))?;
        out.push((t, f.label));
    }
    Ok(out)
}

/// Writes trajectories with the graph inlined in every entry.
pub fn save_trajectories(path: &Path, set: &[(Trajectory, Option<i8>)]) -> Result<()> {
    let files: Vec<_> = set
        .iter()
        .map(|(t, l)| TrajectoryFile::from_trajectory(t, *l, true))
        .collect();
    write_json(path, &files)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphRef>,
    #[serde(rename = "L")]
    pub len: usize,
    pub bins: Vec<(f64, f64)>,
    #[serde(default)]
    pub edge_labels: BTreeMap<String, f64>,
    #[serde(default)]
    pub pmf: BTreeMap<String, Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_pmf: Option<Vec<f64>>,
}

impl PriorFile {
    pub fn build(&self, graph: Arc<LabeledGraph>) -> Result<PriorModel> {
        let mut pmf = Vec::with_capacity(graph.node_count());
        for v in graph.nodes() {
            let name = graph.node_name(v);
            let series = match (self.pmf.get(name), &self.default_pmf) {
                (Some(s), _) => s.clone(),
                (None, Some(d)) => vec![d.clone(); self.len],
                (None, None) => {
                    return Err(IoError::Format(format!(
                        "no histogram for node `{name}` and no default_pmf"
                    )))
                }
            };
            pmf.push(series);
        }
        for name in self.pmf.keys() {
            if graph.node(name).is_none() {
                return Err(IoError::Format(format!("histogram for unknown node `{name}`")));
            }
        }
        let mut edges = Vec::with_capacity(graph.edge_count());
        for e in graph.edges() {
            let name = graph.edge_name(e);
            let y = self
                .edge_labels
                .get(name)
                .ok_or_else(|| IoError::Format(format!("no label for edge `{name}`")))?;
            edges.push(*y);
        }
        Ok(PriorModel::new(graph, self.len, self.bins.clone(), pmf, edges)?)
    }

    pub fn from_prior(prior: &PriorModel, inline_graph: bool) -> Self {
        let g = prior.graph();
        Self {
            graph: inline_graph.then(|| GraphRef::Inline(GraphFile::from_graph(g))),
            len: prior.len(),
            bins: prior.bins().to_vec(),
            edge_labels: g
                .edges()
                .map(|e| (g.edge_name(e).to_string(), prior.edge_labels()[e.0]))
                .collect(),
            pmf: g
                .nodes()
                .map(|v| {
                    let series = (0..prior.len()).map(|s| prior.pmf(v, s).to_vec()).collect();
                    (g.node_name(v).to_string(), series)
                })
                .collect(),
            default_pmf: None,
        }
    }
}

pub fn load_prior(path: &Path, graph: Option<Arc<LabeledGraph>>) -> Result<PriorModel> {
    let file: PriorFile = read_json(path)?;
    let g = GraphCache::new(path, graph).resolve(file.graph.as_ref())?;
    file.build(g)
}

pub fn save_prior(path: &Path, prior: &PriorModel) -> Result<()> {
    write_json(path, &PriorFile::from_prior(prior, true))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindName {
    Continuous,
    Integer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeEntry {
    pub min: f64,
    pub max: f64,
    #[serde(default = "continuous")]
    pub kind: KindName,
}

fn continuous() -> KindName {
    KindName::Continuous
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub formula: String,
    /// Missing parameters get data-driven default ranges.
    #[serde(default)]
    pub params: BTreeMap<String, RangeEntry>,
}

/// Templates with complete boxes: ranges from the file, defaults from `stats` for the rest.
pub fn load_templates(path: &Path, stats: &DataStats) -> Result<Vec<(Template, ParameterBox)>> {
    let files = read_json::<OneOrMany<TemplateFile>>(path)?.into_vec();
    files
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let name = f.name.clone().unwrap_or_else(|| format!("template-{}", i + 1));
            let formula = parse(&f.formula)
                .map_err(|e| IoError::Format(format!("template `{name}`: {e}")))?;
            let template = Template { name, formula };
            let pbox = complete_box(&template, &f.params, stats)?;
            Ok((template, pbox))
        })
        .collect()
}

fn complete_box(
    t: &Template,
    given: &BTreeMap<String, RangeEntry>,
    stats: &DataStats,
) -> Result<ParameterBox> {
    let names = t.formula.param_names();
    for n in given.keys() {
        if !names.contains(n) {
            return Err(IoError::Format(format!(
                "template `{}` gives a range for unknown parameter `{n}`",
                t.name
            )));
        }
    }
    let defaults = if given.len() == names.len() {
        Vec::new()
    } else {
        default_box(&t.formula, stats)?.ranges().to_vec()
    };
    let ranges = t
        .formula
        .params()
        .into_iter()
        .map(|(n, _)| match given.get(&n) {
            Some(r) => Ok(match r.kind {
                KindName::Continuous => ParamRange::continuous(n, r.min, r.max),
                KindName::Integer => ParamRange::integer(n, r.min, r.max),
            }),
            None => defaults
                .iter()
                .find(|r| r.name == n)
                .cloned()
                .ok_or_else(|| IoError::Format(format!("no default range for `{n}`"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ParameterBox::for_formula(&t.formula, ranges)?)
}

/// Library templates with default boxes.
pub fn library_templates(
    templates: Vec<Template>,
    stats: &DataStats,
) -> Result<Vec<(Template, ParameterBox)>> {
    templates
        .into_iter()
        .map(|t| {
            let b = default_box(&t.formula, stats)?;
            Ok((t, b))
        })
        .collect()
}

/// Template file entry for `t` and its box, for writing back.
pub fn template_entry(t: &Template, pbox: &ParameterBox) -> TemplateFile {
    TemplateFile {
        name: Some(t.name.clone()),
        formula: t.formula.to_string(),
        params: pbox
            .ranges()
            .iter()
            .map(|r| {
                let kind = match r.kind {
                    ParamKind::Continuous => KindName::Continuous,
                    ParamKind::Integer => KindName::Integer,
                };
                (
                    r.name.clone(),
                    RangeEntry {
                        min: r.min,
                        max: r.max,
                        kind,
                    },
                )
            })
            .collect(),
    }
}
