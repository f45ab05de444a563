//! Finite-trace satisfaction, coverage and misclassification rate.
//!
//! Evaluation is bottom-up: every subformula becomes a table of truth values over
//! `(node, step)`, so one pass costs `O(|f| * |V| * L * deg)` regardless of how many nodes and
//! times are queried afterwards.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::formula::{Formula, TimeBound};
use crate::graph::{EdgeProposition, NodeId, ReachScratch, Trajectory};
use crate::{Error, Result};

/// Truth values of one formula at every `(node, step)` of a trajectory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatTable {
    len: usize,
    bits: Vec<bool>,
}

impl SatTable {
    /// Truth value at node `v` and zero-based `step`.
    #[inline]
    pub fn get(&self, v: NodeId, step: usize) -> bool {
        self.bits[v.0 * self.len + step]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of nodes satisfying the formula at time index 1.
    pub fn count_at_start(&self) -> usize {
        self.bits.iter().step_by(self.len).filter(|b| **b).count()
    }
}

pub(crate) fn require_ground(f: &Formula) -> Result<()> {
    match f.params().into_iter().next() {
        Some((name, _)) => Err(Error::Parameterized(name)),
        None => Ok(()),
    }
}

/// Evaluates `f` at every node and time index of `g`.
pub fn sat_table(g: &Trajectory, f: &Formula) -> Result<SatTable> {
    require_ground(f)?;
    let mut scratch = ReachScratch::new(g.graph());
    let bits = table(g, f, &mut scratch)?;
    Ok(SatTable { len: g.len(), bits })
}

/// `(g, v, k) |= f` for a 1-based time index `k`.
pub fn sat(g: &Trajectory, f: &Formula, v: NodeId, k: usize) -> Result<bool> {
    let step = g.check_time(k)?;
    if v.0 >= g.graph().node_count() {
        return Err(Error::UnknownNode(alloc::format!("#{}", v.0)));
    }
    Ok(sat_table(g, f)?.get(v, step))
}

/// `+1` when `f` holds at `v` at time index 1, `-1` otherwise.
pub fn sat_signature(g: &Trajectory, f: &Formula, v: NodeId) -> Result<i8> {
    Ok(if sat(g, f, v, 1)? { 1 } else { -1 })
}

fn check_shared_graph(set: &[Trajectory]) -> Result<()> {
    let first = set.first().ok_or(Error::EmptyDataset)?;
    for g in &set[1..] {
        if !alloc::sync::Arc::ptr_eq(g.graph_arc(), first.graph_arc())
            && !g.graph().same_structure(first.graph())
        {
            return Err(Error::GraphMismatch);
        }
    }
    Ok(())
}

/// Average fraction of nodes satisfying `f` at time index 1.
pub fn coverage(set: &[Trajectory], f: &Formula) -> Result<f64> {
    check_shared_graph(set)?;
    require_ground(f)?;
    let mut satisfied = 0usize;
    for g in set {
        satisfied += sat_table(g, f)?.count_at_start();
    }
    Ok(satisfied as f64 / (set.len() * set[0].graph().node_count()) as f64)
}

/// Trajectories carrying class labels `+1` / `-1`, all on one graph.
#[derive(Debug, Clone)]
pub struct LabeledSet {
    trajectories: Vec<Trajectory>,
    labels: Vec<i8>,
}

impl LabeledSet {
    /// Fails on an empty set, a missing label, a label other than `±1`, or mixed graphs.
    pub fn new(items: Vec<(Trajectory, Option<i8>)>) -> Result<Self> {
        let mut trajectories = Vec::with_capacity(items.len());
        let mut labels = Vec::with_capacity(items.len());
        for (i, (g, l)) in items.into_iter().enumerate() {
            match l {
                Some(l @ (1 | -1)) => labels.push(l),
                _ => return Err(Error::MissingLabel(i)),
            }
            trajectories.push(g);
        }
        check_shared_graph(&trajectories)?;
        Ok(Self {
            trajectories,
            labels,
        })
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Trajectory, i8)> {
        self.trajectories.iter().zip(self.labels.iter().copied())
    }

    /// The same trajectories with every label negated.
    pub fn flipped(&self) -> Self {
        Self {
            trajectories: self.trajectories.clone(),
            labels: self.labels.iter().map(|l| -l).collect(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.trajectories[0].graph().node_count()
    }
}

/// Fraction of `(trajectory, node)` pairs whose signature disagrees with the label.
pub fn misclassification_rate(data: &LabeledSet, f: &Formula) -> Result<f64> {
    require_ground(f)?;
    let mut wrong = 0usize;
    for (g, label) in data.iter() {
        let t = sat_table(g, f)?;
        let positive = t.count_at_start();
        wrong += if label > 0 {
            g.graph().node_count() - positive
        } else {
            positive
        };
    }
    Ok(wrong as f64 / (data.len() * data.node_count()) as f64)
}

fn table(g: &Trajectory, f: &Formula, scratch: &mut ReachScratch) -> Result<Vec<bool>> {
    let (n, len) = (g.graph().node_count(), g.len());
    Ok(match f {
        Formula::True => vec![true; n * len],
        Formula::False => vec![false; n * len],
        Formula::Atom(a) => {
            let p = a.proposition()?;
            g.graph()
                .nodes()
                .flat_map(|v| g.node_series(v).iter().map(move |x| p.holds(*x)))
                .collect()
        }
        Formula::Not(a) => {
            let mut t = table(g, a, scratch)?;
            t.iter_mut().for_each(|b| *b = !*b);
            t
        }
        Formula::And(a, b) => zip(table(g, a, scratch)?, &table(g, b, scratch)?, |x, y| x && y),
        Formula::Or(a, b) => zip(table(g, a, scratch)?, &table(g, b, scratch)?, |x, y| x || y),
        Formula::Implies(a, b) => {
            zip(table(g, a, scratch)?, &table(g, b, scratch)?, |x, y| !x || y)
        }
        Formula::Exists { count, chain, body } => {
            let need = count.literal().ok_or(Error::Parameterized(String::new()))? as usize;
            let chain: Vec<EdgeProposition> =
                chain.iter().map(|r| r.proposition()).collect::<Result<_>>()?;
            if chain.is_empty() {
                return Err(Error::InvalidConfig(
                    "neighbor chain must contain at least one edge proposition".into(),
                ));
            }
            let b = table(g, body, scratch)?;
            let mut out = vec![false; n * len];
            for step in 0..len {
                for v in g.graph().nodes() {
                    let reached =
                        scratch.reach(g.graph(), &[v], &chain, |e| g.edge_label(e, step));
                    let hits = reached.iter().filter(|u| b[u.0 * len + step]).count();
                    out[v.0 * len + step] = hits >= need;
                }
            }
            out
        }
        Formula::Eventually { bound, body } => {
            let b = table(g, body, scratch)?;
            temporal(bound, &b, len, false)?
        }
        Formula::Always { bound, body } => {
            // each conjunct G φ is !F !φ
            let mut b = table(g, body, scratch)?;
            b.iter_mut().for_each(|x| *x = !*x);
            temporal(bound, &b, len, true)?
        }
        Formula::Until { bound, lhs, rhs } => {
            let a = table(g, lhs, scratch)?;
            let b = table(g, rhs, scratch)?;
            let mut out = vec![false; n * len];
            for v in 0..n {
                let r = v * len..(v + 1) * len;
                until(bound, &a[r.clone()], &b[r.clone()], &mut out[r])?;
            }
            out
        }
    })
}

fn zip(mut a: Vec<bool>, b: &[bool], op: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.iter_mut().zip(b).for_each(|(x, y)| *x = op(*x, *y));
    a
}

pub(crate) type Bounds = (usize, Option<usize>);

/// Offsets `[lo, hi]` admitted by one bound, as separately-bounded conjuncts: a paired bound
/// yields two entries.
pub(crate) fn bound_offsets(bound: &TimeBound) -> Result<Vec<Bounds>> {
    let lit = |v: &crate::formula::Value<u32>| {
        v.literal()
            .map(|x| x as usize)
            .ok_or_else(|| Error::Parameterized(String::from(v.param().unwrap_or(""))))
    };
    Ok(match bound {
        TimeBound::Unbounded => vec![(0, None)],
        TimeBound::AtLeast(i) => vec![(lit(i)?, None)],
        TimeBound::AtMost(i) => vec![(0, Some(lit(i)?))],
        TimeBound::Window(lo, hi) => vec![(lit(lo)?, None), (0, Some(lit(hi)?))],
    })
}

/// Conjunction over the bound's parts of `F_part b`, or of `!F_part b` when `negate`.
fn temporal(bound: &TimeBound, b: &[bool], len: usize, negate: bool) -> Result<Vec<bool>> {
    let parts = bound_offsets(bound)?;
    let mut out = vec![true; b.len()];
    let mut next = vec![len; len + 1];
    for (src, dst) in b.chunks(len).zip(out.chunks_mut(len)) {
        // next[s]: first true step at or after s (len if none)
        for s in (0..len).rev() {
            next[s] = if src[s] { s } else { next[s + 1] };
        }
        for &(lo, hi) in &parts {
            for (s, o) in dst.iter_mut().enumerate() {
                let start = s + lo;
                let found = start < len && {
                    let t = next[start];
                    t < len && hi.is_none_or(|h| t <= s + h)
                };
                *o &= found != negate;
            }
        }
    }
    Ok(out)
}

/// `out[s]` = some `s'` in the admitted range has `b`, with `a` holding on all of `[s, s']`.
fn until(bound: &TimeBound, a: &[bool], b: &[bool], out: &mut [bool]) -> Result<()> {
    let len = a.len();
    // stop[s]: first step at or after s where `a` fails (len if none)
    let mut stop = vec![len; len + 1];
    for s in (0..len).rev() {
        stop[s] = if a[s] { stop[s + 1] } else { s };
    }
    let mut prefix = vec![0usize; len + 1];
    for s in 0..len {
        prefix[s + 1] = prefix[s] + usize::from(b[s]);
    }
    out.iter_mut().for_each(|o| *o = true);
    for (lo, hi) in bound_offsets(bound)? {
        for s in 0..len {
            let from = s + lo;
            let to = stop[s].min(hi.map_or(len, |h| (s + h + 1).min(len)));
            out[s] &= from < to && prefix[to] > prefix[from];
        }
    }
    Ok(())
}
