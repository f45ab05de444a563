//! Slow reference implementations used to cross-check the library.
//!
//! Everything here follows the textbook definitions literally: recursion over the formula,
//! explicit quantification over time offsets, and exhaustive enumeration of label worlds.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use gtl_core::formula::{Formula, TimeBound, Value};
use gtl_core::graph::{Comparison, EdgeId, LabeledGraph, NodeId, Trajectory};
use gtl_core::prob::PriorModel;

fn cmp_holds(cmp: Comparison, value: f64, threshold: f64) -> bool {
    match cmp {
        Comparison::Ge => value >= threshold,
        Comparison::Le => value <= threshold,
    }
}

fn lit<T: Copy>(v: &Value<T>) -> T {
    v.literal().expect("oracle needs a ground formula")
}

/// `(lo, hi)` offset ranges whose conjunction the bound stands for.
fn parts(bound: &TimeBound) -> Vec<(usize, Option<usize>)> {
    match bound {
        TimeBound::Unbounded => vec![(0, None)],
        TimeBound::AtLeast(i) => vec![(lit(i) as usize, None)],
        TimeBound::AtMost(i) => vec![(0, Some(lit(i) as usize))],
        TimeBound::Window(a, b) => vec![(lit(a) as usize, None), (0, Some(lit(b) as usize))],
    }
}

/// Steps `s + lo ..= s + hi` clipped to the trace.
fn window(s: usize, len: usize, (lo, hi): (usize, Option<usize>)) -> std::ops::Range<usize> {
    let end = hi.map_or(len, |h| (s + h + 1).min(len));
    (s + lo).min(end)..end
}

/// Nodes reached from `v` by following the chain one hop at a time, at `step`.
pub fn reach(g: &Trajectory, v: NodeId, chain: &[(Comparison, f64)], step: usize) -> BTreeSet<NodeId> {
    let graph = g.graph();
    let mut set = BTreeSet::from([v]);
    for &(cmp, c) in chain {
        let mut next = BTreeSet::new();
        for e in graph.edges() {
            if !cmp_holds(cmp, g.edge_label(e, step), c) {
                continue;
            }
            let (a, b) = graph.endpoints(e);
            if set.contains(&a) {
                next.insert(b);
            }
            if set.contains(&b) {
                next.insert(a);
            }
        }
        set = next;
    }
    set
}

/// Satisfaction at node `v` and zero-based `step`, straight from the definitions.
pub fn naive_sat(g: &Trajectory, f: &Formula, v: NodeId, step: usize) -> bool {
    let len = g.len();
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(a) => cmp_holds(a.cmp, g.node_label(v, step), lit(&a.threshold)),
        Formula::Not(a) => !naive_sat(g, a, v, step),
        Formula::And(a, b) => naive_sat(g, a, v, step) && naive_sat(g, b, v, step),
        Formula::Or(a, b) => naive_sat(g, a, v, step) || naive_sat(g, b, v, step),
        Formula::Implies(a, b) => !naive_sat(g, a, v, step) || naive_sat(g, b, v, step),
        Formula::Exists { count, chain, body } => {
            let chain: Vec<_> = chain.iter().map(|r| (r.cmp, lit(&r.threshold))).collect();
            let hits = reach(g, v, &chain, step)
                .into_iter()
                .filter(|u| naive_sat(g, body, *u, step))
                .count();
            hits >= lit(count) as usize
        }
        Formula::Eventually { bound, body } => parts(bound)
            .into_iter()
            .all(|p| window(step, len, p).any(|t| naive_sat(g, body, v, t))),
        Formula::Always { bound, body } => parts(bound)
            .into_iter()
            .all(|p| window(step, len, p).all(|t| naive_sat(g, body, v, t))),
        Formula::Until { bound, lhs, rhs } => parts(bound).into_iter().all(|p| {
            window(step, len, p)
                .any(|t| naive_sat(g, rhs, v, t) && (step..=t).all(|u| naive_sat(g, lhs, v, u)))
        }),
    }
}

fn thresholds(f: &Formula, out: &mut Vec<f64>) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Atom(a) => out.push(lit(&a.threshold)),
        Formula::Not(a) => thresholds(a, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            thresholds(a, out);
            thresholds(b, out);
        }
        Formula::Until { lhs, rhs, .. } => {
            thresholds(lhs, out);
            thresholds(rhs, out);
        }
        Formula::Exists { body, .. }
        | Formula::Eventually { body, .. }
        | Formula::Always { body, .. } => thresholds(body, out),
    }
}

/// Bins split at every node threshold of `f`: `(representative, fraction of bin)` per cell.
/// Inside a cell every atom has a constant truth value, up to a null set.
fn cells(f: &Formula, bins: &[(f64, f64)]) -> Vec<Vec<(f64, f64)>> {
    let mut cuts = Vec::new();
    thresholds(f, &mut cuts);
    bins.iter()
        .map(|&(lo, hi)| {
            if lo == hi {
                return vec![(lo, 1.0)];
            }
            let mut pts: Vec<f64> = cuts.iter().copied().filter(|c| *c > lo && *c < hi).collect();
            pts.push(lo);
            pts.push(hi);
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            pts.windows(2)
                .map(|w| ((w[0] + w[1]) / 2.0, (w[1] - w[0]) / (hi - lo)))
                .collect()
        })
        .collect()
}

/// Probability that `f` holds at `v` (time index 1), by enumerating every assignment of a
/// cell to every `(node, step)`. Exponential in `|V| * L`; keep instances tiny.
pub fn brute_probability(prior: &PriorModel, f: &Formula, v: NodeId) -> f64 {
    let graph: Arc<LabeledGraph> = prior.graph_arc().clone();
    let (n, len) = (graph.node_count(), prior.len());
    let cells = cells(f, prior.bins());
    // flattened choices: one (value, mass) list per (node, step)
    let mut choices: Vec<Vec<(f64, f64)>> = Vec::new();
    for u in 0..n {
        for step in 0..len {
            let pmf = prior.pmf(NodeId(u), step);
            let mut c = Vec::new();
            for (b, list) in cells.iter().enumerate() {
                for &(x, frac) in list {
                    if frac > 0.0 {
                        c.push((x, pmf[b] * frac));
                    }
                }
            }
            choices.push(c);
        }
    }
    let edges: Vec<Vec<f64>> = graph
        .edges()
        .map(|e: EdgeId| vec![prior.edge_labels()[e.0]; len])
        .collect();
    let mut index = vec![0usize; choices.len()];
    let mut total = 0.0;
    loop {
        let mut mass = 1.0;
        let mut labels = vec![vec![0.0; len]; n];
        for (slot, &i) in index.iter().enumerate() {
            let (x, m) = choices[slot][i];
            mass *= m;
            labels[slot / len][slot % len] = x;
        }
        let g = Trajectory::new(graph.clone(), len, labels, edges.clone()).unwrap();
        if naive_sat(&g, f, v, 0) {
            total += mass;
        }
        // odometer increment
        let mut slot = 0;
        loop {
            if slot == index.len() {
                return total;
            }
            index[slot] += 1;
            if index[slot] < choices[slot].len() {
                break;
            }
            index[slot] = 0;
            slot += 1;
        }
    }
}

/// Exact `P(at least n successes)` by summing over all outcome vectors.
pub fn brute_tail(ps: &[f64], n: usize) -> f64 {
    let mut total = 0.0;
    for mask in 0u32..(1 << ps.len()) {
        if (mask.count_ones() as usize) < n {
            continue;
        }
        let mut p = 1.0;
        for (i, q) in ps.iter().enumerate() {
            p *= if mask >> i & 1 == 1 { *q } else { 1.0 - q };
        }
        total += p;
    }
    total
}

/// Inner corners of the region not dominated by any point of `unsat`, by scanning a grid of
/// candidate coordinates.
pub fn grid_knees(unsat: &[Vec<f64>], dims: usize) -> Vec<Vec<f64>> {
    let mut axes: Vec<Vec<f64>> = vec![vec![0.0]; dims];
    for m in unsat {
        for (i, x) in m.iter().enumerate() {
            if *x < 1.0 {
                axes[i].push(*x);
            }
        }
    }
    for a in &mut axes {
        a.sort_by(f64::total_cmp);
        a.dedup();
    }
    // a point is free when no unsat point is weakly above it in every coordinate (m_i = 1
    // counts as unbounded)
    let free = |p: &[f64]| {
        !unsat
            .iter()
            .any(|m| p.iter().zip(m).all(|(a, b)| *b >= 1.0 || a < b))
    };
    let mut points = vec![vec![]];
    for a in &axes {
        points = points
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                a.iter().map(move |x| {
                    let mut q = p.clone();
                    q.push(*x);
                    q
                })
            })
            .collect();
    }
    let free_points: Vec<Vec<f64>> = points.into_iter().filter(|p| free(p)).collect();
    let mut minimal: Vec<Vec<f64>> = free_points
        .iter()
        .filter(|p| {
            !free_points
                .iter()
                .any(|q| q != *p && q.iter().zip(p.iter()).all(|(a, b)| a <= b))
        })
        .cloned()
        .collect();
    minimal.sort_by(|a, b| a.partial_cmp(b).unwrap());
    minimal
}

pub mod gen {
    //! Random graphs, trajectories and formulas on a coarse value grid, so that ties between
    //! labels and thresholds actually happen.

    use super::*;
    use rand::Rng;

    pub const GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

    pub fn graph<R: Rng>(rng: &mut R, nodes: usize) -> Arc<LabeledGraph> {
        let names: Vec<String> = (0..nodes).map(|i| format!("v{i}")).collect();
        let mut edges = Vec::new();
        for a in 0..nodes {
            for b in a + 1..nodes {
                if rng.random_bool(0.6) {
                    edges.push((format!("e{a}_{b}"), names[a].clone(), names[b].clone()));
                }
            }
        }
        Arc::new(LabeledGraph::new(names, edges).unwrap())
    }

    pub fn trajectory<R: Rng>(rng: &mut R, graph: &Arc<LabeledGraph>, len: usize) -> Trajectory {
        let mut series = |count: usize| -> Vec<Vec<f64>> {
            (0..count).map(|_| (0..len).map(|_| pick(rng)).collect()).collect()
        };
        let nodes = series(graph.node_count());
        let edges = series(graph.edge_count());
        Trajectory::new(graph.clone(), len, nodes, edges).unwrap()
    }

    fn pick<R: Rng>(rng: &mut R) -> f64 {
        GRID[rng.random_range(0..GRID.len())]
    }

    fn cmp<R: Rng>(rng: &mut R) -> &'static str {
        if rng.random_bool(0.5) {
            ">="
        } else {
            "<="
        }
    }

    fn bound<R: Rng>(rng: &mut R, len: usize) -> String {
        let t = |rng: &mut R| rng.random_range(0..len + 1);
        match rng.random_range(0..4) {
            0 => String::new(),
            1 => format!("[<={}]", t(rng)),
            2 => format!("[>={}]", t(rng)),
            _ => {
                let a = rng.random_range(0..len);
                let b = rng.random_range(a + 1..len + 1);
                format!("[>={a}][<={b}]")
            }
        }
    }

    pub fn atom<R: Rng>(rng: &mut R) -> String {
        format!("(x {} {})", cmp(rng), pick(rng))
    }

    fn exists<R: Rng>(rng: &mut R, body: String) -> String {
        let hops = rng.random_range(1..3);
        let mut s = format!("E {}", rng.random_range(0..3));
        for _ in 0..hops {
            s.push_str(&format!(" via (y {} {})", cmp(rng), pick(rng)));
        }
        format!("{s} : {body}")
    }

    /// Formula text of depth at most `depth`. With `type_i`, neighbor quantifiers only wrap
    /// atoms; otherwise they may wrap anything.
    pub fn formula<R: Rng>(rng: &mut R, depth: usize, len: usize, type_i: bool) -> String {
        if depth == 0 || rng.random_bool(0.2) {
            return match rng.random_range(0..8) {
                0 => "TRUE".into(),
                1 => "FALSE".into(),
                2 | 3 => {
                    let a = atom(rng);
                    exists(rng, a)
                }
                _ => atom(rng),
            };
        }
        let sub = |rng: &mut R| formula(rng, depth - 1, len, type_i);
        match rng.random_range(0..9) {
            0 => format!("!({})", sub(rng)),
            1 => format!("({} & {})", sub(rng), sub(rng)),
            2 => format!("({} | {})", sub(rng), sub(rng)),
            3 => format!("({} -> {})", sub(rng), sub(rng)),
            4 => {
                let b = bound(rng, len);
                format!("({} U{b} {})", sub(rng), sub(rng))
            }
            5 => format!("F{} ({})", bound(rng, len), sub(rng)),
            6 => format!("G{} ({})", bound(rng, len), sub(rng)),
            7 if !type_i => {
                let b = sub(rng);
                exists(rng, format!("({b})"))
            }
            _ => atom(rng),
        }
    }
}
