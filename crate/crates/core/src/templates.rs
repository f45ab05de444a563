//! Built-in template library and data-driven default parameter boxes.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::formula::{parse, Formula, ParamRange, ParameterBox, TimeBound, Value};
use crate::graph::Trajectory;
use crate::prob::PriorModel;
use crate::{Error, Result};

/// A named parametric formula.
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub name: String,
    pub formula: Formula,
}

impl Template {
    pub fn new(name: impl Into<String>, text: &str) -> Result<Self> {
        Ok(Self {
            name: name.into(),
            formula: parse(text)?,
        })
    }
}

const TYPE_I: [(&str, &str); 6] = [
    ("always-window", "G[>=?i1][<=?i2] E ?N via (y <= ?d) : (x {} ?c)"),
    ("eventually-window", "F[>=?i1][<=?i2] E ?N via (y <= ?d) : (x {} ?c)"),
    ("always-eventually", "G[>=?i1][<=?i2] F[<=?i3] E ?N via (y <= ?d) : (x {} ?c)"),
    ("eventually-always", "F[>=?i1][<=?i2] G[<=?i3] E ?N via (y <= ?d) : (x {} ?c)"),
    ("response-always", "G ((x >= ?a) -> G[<=?i] E ?N via (y <= ?d) : (x <= ?b))"),
    ("response-eventually", "G ((x >= ?a) -> F[<=?i] E ?N via (y <= ?d) : (x <= ?b))"),
];

const TYPE_II: [(&str, &str); 4] = [
    ("neighbors-always-window", "E ?N via (y <= ?d) : G[>=?i1][<=?i2] (x {} ?c)"),
    ("neighbors-eventually-window", "E ?N via (y <= ?d) : F[>=?i1][<=?i2] (x {} ?c)"),
    (
        "neighbors-always-eventually",
        "E ?N via (y <= ?d) : G[>=?i1][<=?i2] F[<=?i3] (x {} ?c)",
    ),
    (
        "neighbors-eventually-always",
        "E ?N via (y <= ?d) : F[>=?i1][<=?i2] G[<=?i3] (x {} ?c)",
    ),
];

fn expand(list: &[(&str, &str)], both: bool) -> Vec<Template> {
    let mut out = Vec::new();
    for (name, text) in list {
        if !text.contains("{}") {
            out.push(Template::new(*name, text).expect("library template parses"));
            continue;
        }
        let dirs: &[(&str, &str)] = if both {
            &[("ge", ">="), ("le", "<=")]
        } else {
            &[("ge", ">=")]
        };
        for (tag, cmp) in dirs {
            let name = if both { format!("{name}-{tag}") } else { name.to_string() };
            out.push(Template::new(name, &text.replace("{}", cmp)).expect("library template parses"));
        }
    }
    out
}

/// The six type-I templates, with `x >= ?c` as the node proposition.
pub fn type_i() -> Vec<Template> {
    expand(&TYPE_I, false)
}

/// The four type-II templates, with `x >= ?c` as the node proposition.
pub fn type_ii() -> Vec<Template> {
    expand(&TYPE_II, false)
}

/// Both families with both threshold directions, for classification pools.
pub fn all_directions() -> Vec<Template> {
    let mut out = expand(&TYPE_I, true);
    out.extend(expand(&TYPE_II, true));
    out
}

/// Label ranges and sizes that default parameter boxes are derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataStats {
    pub node_min: f64,
    pub node_max: f64,
    pub edge_min: f64,
    pub edge_max: f64,
    pub max_degree: usize,
    pub len: usize,
}

impl DataStats {
    pub fn from_trajectories(set: &[Trajectory]) -> Result<Self> {
        let first = set.first().ok_or(Error::EmptyDataset)?;
        let mut s = Self {
            node_min: f64::INFINITY,
            node_max: f64::NEG_INFINITY,
            edge_min: f64::INFINITY,
            edge_max: f64::NEG_INFINITY,
            max_degree: first.graph().max_degree(),
            len: first.len(),
        };
        for g in set {
            for v in g.graph().nodes() {
                for &x in g.node_series(v) {
                    s.node_min = s.node_min.min(x);
                    s.node_max = s.node_max.max(x);
                }
            }
            for e in g.graph().edges() {
                for &y in g.edge_series(e) {
                    s.edge_min = s.edge_min.min(y);
                    s.edge_max = s.edge_max.max(y);
                }
            }
            s.len = s.len.min(g.len());
        }
        if !s.edge_min.is_finite() {
            s.edge_min = 0.0;
            s.edge_max = 0.0;
        }
        Ok(s)
    }

    pub fn from_prior(prior: &PriorModel) -> Self {
        let bins = prior.bins();
        let edges = prior.edge_labels();
        Self {
            node_min: bins.first().map_or(0.0, |b| b.0),
            node_max: bins.last().map_or(0.0, |b| b.1),
            edge_min: edges.iter().copied().reduce(f64::min).unwrap_or(0.0),
            edge_max: edges.iter().copied().reduce(f64::max).unwrap_or(0.0),
            max_degree: prior.graph().max_degree(),
            len: prior.len(),
        }
    }

    /// Union of two ranges, for boxes shared by training data and prior.
    pub fn merge(&self, other: &DataStats) -> Self {
        Self {
            node_min: self.node_min.min(other.node_min),
            node_max: self.node_max.max(other.node_max),
            edge_min: self.edge_min.min(other.edge_min),
            edge_max: self.edge_max.max(other.edge_max),
            max_degree: self.max_degree.max(other.max_degree),
            len: self.len.min(other.len),
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Role {
    Node,
    Edge,
    Count,
    WindowLow,
    WindowHigh,
    Time,
}

fn roles(f: &Formula, out: &mut BTreeMap<String, Role>) {
    let mut put = |v: Option<&str>, r: Role| {
        if let Some(p) = v {
            out.entry(p.to_string()).or_insert(r);
        }
    };
    match f {
        Formula::True | Formula::False => {}
        Formula::Atom(a) => put(a.threshold.param(), Role::Node),
        Formula::Exists { count, chain, body } => {
            put(count.param(), Role::Count);
            for e in chain {
                put(e.threshold.param(), Role::Edge);
            }
            roles(body, out);
        }
        Formula::Not(a) => roles(a, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            roles(a, out);
            roles(b, out);
        }
        Formula::Until { bound, lhs, rhs } => {
            bound_roles(bound, &mut put);
            roles(lhs, out);
            roles(rhs, out);
        }
        Formula::Eventually { bound, body } | Formula::Always { bound, body } => {
            bound_roles(bound, &mut put);
            roles(body, out);
        }
    }
}

fn bound_roles(bound: &TimeBound, put: &mut dyn FnMut(Option<&str>, Role)) {
    let p = |v: &Value<u32>| v.param().map(ToString::to_string);
    match bound {
        TimeBound::Unbounded => {}
        TimeBound::AtLeast(a) | TimeBound::AtMost(a) => put(p(a).as_deref(), Role::Time),
        TimeBound::Window(a, b) => {
            put(p(a).as_deref(), Role::WindowLow);
            put(p(b).as_deref(), Role::WindowHigh);
        }
    }
}

/// Default box for every parameter of `formula`, guessed from the parameter's position:
/// node thresholds span the node label range, edge thresholds are integers covering the edge
/// label range, counts `[1, max degree]`, single time bounds `[1, L-1]`, and window bounds split the horizon so
/// the lower end stays in `[1, h]` and the upper end in `[h+1, L-1]` with `h = (L-1)/2`.
pub fn default_box(formula: &Formula, stats: &DataStats) -> Result<ParameterBox> {
    let mut map = BTreeMap::new();
    roles(formula, &mut map);
    let last = stats.len.saturating_sub(1) as f64;
    let half = (stats.len.saturating_sub(1) / 2) as f64;
    let mut ranges = Vec::new();
    for (name, role) in map {
        let r = match role {
            Role::Node => ParamRange::continuous(name, stats.node_min, stats.node_max),
            Role::Edge => {
                // edge thresholds are positive integers in the library templates
                let lo = libm::ceil(stats.edge_min).max(1.0);
                ParamRange::integer(name, lo, libm::ceil(stats.edge_max).max(lo))
            }
            Role::Count => ParamRange::integer(name, 1.0, stats.max_degree.max(1) as f64),
            Role::Time => ParamRange::integer(name, 1.0, last.max(1.0)),
            Role::WindowLow | Role::WindowHigh if stats.len < 3 => {
                return Err(Error::InvalidBox(format!(
                    "window parameter `{name}` needs a horizon of at least 3"
                )))
            }
            Role::WindowLow => ParamRange::integer(name, 1.0, half),
            Role::WindowHigh => ParamRange::integer(name, half + 1.0, last),
        };
        ranges.push(r);
    }
    ParameterBox::for_formula(formula, ranges)
}
