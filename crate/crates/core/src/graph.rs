//! Labeled graphs, graph-temporal trajectories and neighbor operations.
//!
//! Node and edge identifiers are opaque strings at the API boundary. Internally every node and
//! edge gets a dense index ([`NodeId`], [`EdgeId`]) assigned in insertion order.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

/// Static undirected simple graph.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGraph {
    node_names: Vec<String>,
    edge_names: Vec<String>,
    ends: Vec<(NodeId, NodeId)>,
    adjacency: Vec<Vec<(NodeId, EdgeId)>>,
    node_index: BTreeMap<String, NodeId>,
    edge_index: BTreeMap<String, EdgeId>,
}

impl LabeledGraph {
    /// Builds a graph from node ids and `(edge id, end, end)` triples.
    pub fn new<N, E>(nodes: N, edges: E) -> Result<Self>
    where
        N: IntoIterator,
        N::Item: Into<String>,
        E: IntoIterator<Item = (String, String, String)>,
    {
        let mut node_names = Vec::new();
        let mut node_index = BTreeMap::new();
        for name in nodes {
            let name = name.into();
            let id = NodeId(node_names.len());
            if node_index.insert(name.clone(), id).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate node `{name}`")));
            }
            node_names.push(name);
        }

        let mut adjacency = vec![Vec::new(); node_names.len()];
        let mut edge_names = Vec::new();
        let mut edge_index = BTreeMap::new();
        let mut ends = Vec::new();
        let mut pairs = BTreeSet::new();
        for (name, a, b) in edges {
            let lookup = |n: &str| {
                node_index.get(n).copied().ok_or_else(|| {
                    Error::InvalidGraph(format!("edge `{name}` refers to unknown node `{n}`"))
                })
            };
            let (a, b) = (lookup(&a)?, lookup(&b)?);
            if a == b {
                return Err(Error::InvalidGraph(format!("edge `{name}` is a self-loop")));
            }
            if !pairs.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidGraph(format!(
                    "edge `{name}` duplicates an existing node pair"
                )));
            }
            let id = EdgeId(edge_names.len());
            if edge_index.insert(name.clone(), id).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate edge `{name}`")));
            }
            adjacency[a.0].push((b, id));
            adjacency[b.0].push((a, id));
            edge_names.push(name);
            ends.push((a, b));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        Ok(Self {
            node_names,
            edge_names,
            ends,
            adjacency,
            node_index,
            edge_index,
        })
    }

    /// Complete graph over `nodes`; edge `i-j` is named `"{a}-{b}"`.
    pub fn complete<S: Into<String>>(nodes: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = nodes.into_iter().map(Into::into).collect();
        let mut edges = Vec::new();
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                edges.push((
                    format!("{}-{}", names[i], names[j]),
                    names[i].clone(),
                    names[j].clone(),
                ));
            }
        }
        Self::new(names, edges)
    }

    pub fn node_count(&self) -> usize {
        self.node_names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_names.len()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> + '_ {
        (0..self.node_names.len()).map(NodeId)
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = EdgeId> + '_ {
        (0..self.edge_names.len()).map(EdgeId)
    }

    pub fn node(&self, name: &str) -> Option<NodeId> {
        self.node_index.get(name).copied()
    }

    pub fn edge(&self, name: &str) -> Option<EdgeId> {
        self.edge_index.get(name).copied()
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.node_names[id.0]
    }

    pub fn edge_name(&self, id: EdgeId) -> &str {
        &self.edge_names[id.0]
    }

    pub fn endpoints(&self, id: EdgeId) -> (NodeId, NodeId) {
        self.ends[id.0]
    }

    /// Neighbors of `v` with the connecting edge, sorted by neighbor.
    pub fn neighbors(&self, v: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adjacency[v.0]
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Same node and edge ids with the same endpoints.
    pub fn same_structure(&self, other: &LabeledGraph) -> bool {
        self.node_names == other.node_names
            && self.edge_names == other.edge_names
            && self.ends == other.ends
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Comparison {
    Le,
    Ge,
}

impl Comparison {
    #[inline]
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparison::Le => value <= threshold,
            Comparison::Ge => value >= threshold,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::Le => "<=",
            Comparison::Ge => ">=",
        }
    }
}

/// Threshold predicate on a node label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeProposition {
    pub cmp: Comparison,
    pub threshold: f64,
}

impl NodeProposition {
    pub fn new(cmp: Comparison, threshold: f64) -> Self {
        Self { cmp, threshold }
    }

    #[inline]
    pub fn holds(&self, x: f64) -> bool {
        self.cmp.holds(x, self.threshold)
    }
}

impl fmt::Display for NodeProposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x {} {}", self.cmp.symbol(), self.threshold)
    }
}

/// Threshold predicate on an edge label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeProposition {
    pub cmp: Comparison,
    pub threshold: f64,
}

impl EdgeProposition {
    pub fn new(cmp: Comparison, threshold: f64) -> Self {
        Self { cmp, threshold }
    }

    #[inline]
    pub fn holds(&self, y: f64) -> bool {
        self.cmp.holds(y, self.threshold)
    }
}

impl fmt::Display for EdgeProposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y {} {}", self.cmp.symbol(), self.threshold)
    }
}

/// Node and edge labels of a fixed graph over time indices `1..=len`.
///
/// Accessors that take a `step` are zero-based: `step = k - 1` for time index `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    graph: Arc<LabeledGraph>,
    len: usize,
    node_labels: Vec<f64>,
    edge_labels: Vec<f64>,
}

impl Trajectory {
    /// `node_labels[v][step]` and `edge_labels[e][step]`, indexed by dense id.
    pub fn new(
        graph: Arc<LabeledGraph>,
        len: usize,
        node_labels: Vec<Vec<f64>>,
        edge_labels: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidTrajectory("length must be at least 1".into()));
        }
        if node_labels.len() != graph.node_count() || edge_labels.len() != graph.edge_count() {
            return Err(Error::InvalidTrajectory(
                "label tables do not match the graph".into(),
            ));
        }
        let mut nodes = Vec::with_capacity(len * graph.node_count());
        for (v, row) in node_labels.into_iter().enumerate() {
            if row.len() != len {
                return Err(Error::InvalidTrajectory(format!(
                    "node `{}` has {} labels, expected {len}",
                    graph.node_name(NodeId(v)),
                    row.len()
                )));
            }
            nodes.extend(row);
        }
        let mut edges = Vec::with_capacity(len * graph.edge_count());
        for (e, row) in edge_labels.into_iter().enumerate() {
            if row.len() != len {
                return Err(Error::InvalidTrajectory(format!(
                    "edge `{}` has {} labels, expected {len}",
                    graph.edge_name(EdgeId(e)),
                    row.len()
                )));
            }
            edges.extend(row);
        }
        Ok(Self {
            graph,
            len,
            node_labels: nodes,
            edge_labels: edges,
        })
    }

    pub fn from_fn(
        graph: Arc<LabeledGraph>,
        len: usize,
        mut node: impl FnMut(NodeId, usize) -> f64,
        mut edge: impl FnMut(EdgeId, usize) -> f64,
    ) -> Result<Self> {
        let nodes = graph
            .nodes()
            .map(|v| (0..len).map(|t| node(v, t)).collect())
            .collect();
        let edges = graph
            .edges()
            .map(|e| (0..len).map(|t| edge(e, t)).collect())
            .collect();
        Self::new(graph, len, nodes, edges)
    }

    pub fn graph(&self) -> &LabeledGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<LabeledGraph> {
        &self.graph
    }

    /// Number of time indices `L`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn node_label(&self, v: NodeId, step: usize) -> f64 {
        self.node_labels[v.0 * self.len + step]
    }

    #[inline]
    pub fn edge_label(&self, e: EdgeId, step: usize) -> f64 {
        self.edge_labels[e.0 * self.len + step]
    }

    pub fn node_series(&self, v: NodeId) -> &[f64] {
        &self.node_labels[v.0 * self.len..(v.0 + 1) * self.len]
    }

    pub fn edge_series(&self, e: EdgeId) -> &[f64] {
        &self.edge_labels[e.0 * self.len..(e.0 + 1) * self.len]
    }

    pub(crate) fn check_time(&self, k: usize) -> Result<usize> {
        if k == 0 || k > self.len {
            return Err(Error::TimeOutOfRange {
                index: k,
                len: self.len,
            });
        }
        Ok(k - 1)
    }
}

/// Reusable buffers for repeated neighbor operations on one graph.
#[derive(Debug, Clone)]
pub struct ReachScratch {
    mark: Vec<u32>,
    epoch: u32,
    frontier: Vec<NodeId>,
    next: Vec<NodeId>,
}

impl ReachScratch {
    pub fn new(graph: &LabeledGraph) -> Self {
        Self {
            mark: vec![0; graph.node_count()],
            epoch: 0,
            frontier: Vec::new(),
            next: Vec::new(),
        }
    }

    fn bump(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
        self.epoch
    }

    /// Applies the chain hop by hop (first element first) and returns the final node set,
    /// in no particular order. Edge labels come from `edge_label`.
    pub fn reach<F>(
        &mut self,
        graph: &LabeledGraph,
        sources: &[NodeId],
        chain: &[EdgeProposition],
        edge_label: F,
    ) -> &[NodeId]
    where
        F: Fn(EdgeId) -> f64,
    {
        self.frontier.clear();
        self.frontier.extend_from_slice(sources);
        for rho in chain {
            let epoch = self.bump();
            self.next.clear();
            for &u in &self.frontier {
                for &(w, e) in graph.neighbors(u) {
                    if self.mark[w.0] != epoch && rho.holds(edge_label(e)) {
                        self.mark[w.0] = epoch;
                        self.next.push(w);
                    }
                }
            }
            core::mem::swap(&mut self.frontier, &mut self.next);
        }
        if chain.is_empty() {
            // dedupe sources
            let epoch = self.bump();
            let mark = &mut self.mark;
            self.frontier.retain(|v| {
                let fresh = mark[v.0] != epoch;
                mark[v.0] = epoch;
                fresh
            });
        }
        &self.frontier
    }
}

/// Successive neighbor operations applied to `sources` at time index `k` (1-based).
pub fn neighbor_op(
    g: &Trajectory,
    sources: &[NodeId],
    k: usize,
    chain: &[EdgeProposition],
) -> Result<BTreeSet<NodeId>> {
    let step = g.check_time(k)?;
    if let Some(bad) = sources.iter().find(|v| v.0 >= g.graph().node_count()) {
        return Err(Error::UnknownNode(format!("#{}", bad.0)));
    }
    if chain.is_empty() {
        return Err(Error::InvalidConfig(
            "neighbor chain must contain at least one edge proposition".into(),
        ));
    }
    let mut scratch = ReachScratch::new(g.graph());
    let out = scratch.reach(g.graph(), sources, chain, |e| g.edge_label(e, step));
    Ok(out.iter().copied().collect())
}

/// Name-based wrapper around [`neighbor_op`].
pub fn neighbor_op_by_name(
    g: &Trajectory,
    sources: &[&str],
    k: usize,
    chain: &[EdgeProposition],
) -> Result<BTreeSet<String>> {
    let ids = sources
        .iter()
        .map(|s| {
            g.graph()
                .node(s)
                .ok_or_else(|| Error::UnknownNode(String::from(*s)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(neighbor_op(g, &ids, k, chain)?
        .into_iter()
        .map(|v| String::from(g.graph().node_name(v)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn path() -> Trajectory {
        let graph = LabeledGraph::new(
            ["a", "b", "c"],
            [
                ("ab".to_string(), "a".to_string(), "b".to_string()),
                ("cb".to_string(), "c".to_string(), "b".to_string()),
            ],
        )
        .unwrap();
        Trajectory::new(
            Arc::new(graph),
            1,
            vec![vec![0.0], vec![0.0], vec![0.0]],
            vec![vec![1.0], vec![2.0]],
        )
        .unwrap()
    }

    fn le(c: f64) -> EdgeProposition {
        EdgeProposition::new(Comparison::Le, c)
    }

    fn names(set: BTreeSet<String>) -> Vec<String> {
        set.into_iter().collect()
    }

    #[test]
    fn empty_sources_reach_nothing() {
        let g = path();
        assert!(neighbor_op(&g, &[], 1, &[le(5.0)]).unwrap().is_empty());
    }

    #[test]
    fn single_hop_respects_edge_threshold() {
        let g = path();
        assert_eq!(names(neighbor_op_by_name(&g, &["a"], 1, &[le(1.0)]).unwrap()), ["b"]);
    }

    #[test]
    fn two_hops_reenter_source() {
        // each hop replaces the frontier: b -> {a, c} -> {b}
        let g = path();
        assert_eq!(
            names(neighbor_op_by_name(&g, &["b"], 1, &[le(2.0)]).unwrap()),
            ["a", "c"]
        );
        assert_eq!(
            names(neighbor_op_by_name(&g, &["b"], 1, &[le(2.0), le(2.0)]).unwrap()),
            ["b"]
        );
        let one = neighbor_op(&g, &[NodeId(1)], 1, &[le(2.0)]).unwrap();
        let sources: Vec<NodeId> = one.into_iter().collect();
        assert_eq!(
            neighbor_op(&g, &sources, 1, &[le(2.0)]).unwrap(),
            neighbor_op(&g, &[NodeId(1)], 1, &[le(2.0), le(2.0)]).unwrap()
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = path();
        assert!(matches!(
            neighbor_op(&g, &[NodeId(0)], 2, &[le(1.0)]),
            Err(Error::TimeOutOfRange { .. })
        ));
        assert!(matches!(
            neighbor_op_by_name(&g, &["zz"], 1, &[le(1.0)]),
            Err(Error::UnknownNode(_))
        ));
        assert!(matches!(
            neighbor_op(&g, &[NodeId(7)], 1, &[le(1.0)]),
            Err(Error::UnknownNode(_))
        ));
    }

    #[test]
    fn graph_invariants_are_enforced() {
        let e = |n: &str, a: &str, b: &str| (n.to_string(), a.to_string(), b.to_string());
        assert!(LabeledGraph::new(["a", "a"], []).is_err());
        assert!(LabeledGraph::new(["a"], [e("e", "a", "a")]).is_err());
        assert!(LabeledGraph::new(["a", "b"], [e("e", "a", "z")]).is_err());
        assert!(LabeledGraph::new(["a", "b"], [e("e", "a", "b"), e("f", "b", "a")]).is_err());
        assert!(LabeledGraph::new(["a", "b"], [e("e", "a", "b"), e("e", "b", "a")]).is_err());
        let empty = LabeledGraph::new(["a", "b"], []).unwrap();
        assert_eq!(empty.max_degree(), 0);
    }

    #[test]
    fn trajectory_shape_is_checked() {
        let graph = Arc::new(LabeledGraph::new(["a"], []).unwrap());
        assert!(Trajectory::new(graph.clone(), 0, vec![vec![]], vec![]).is_err());
        assert!(Trajectory::new(graph.clone(), 2, vec![vec![1.0]], vec![]).is_err());
        assert!(Trajectory::new(graph, 1, vec![], vec![]).is_err());
    }
}
