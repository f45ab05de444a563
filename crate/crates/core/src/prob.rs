//! Factored priors, exact satisfaction probabilities and information gain.
//!
//! Node labels are independent across nodes and times; each `(node, time)` label follows a
//! histogram over fixed bins and is uniform inside a bin. Edge labels are fixed.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use alloc::format;

use crate::automata::{to_dfa, Automaton, Predicate};
use crate::eval::require_ground;
use crate::formula::{subtype, Formula};
use crate::graph::{EdgeProposition, LabeledGraph, NodeId, NodeProposition, ReachScratch};
use crate::{Error, Result};

/// Tolerance on histogram normalization.
pub const PMF_TOLERANCE: f64 = 1e-9;

/// Default cap on joint-letter DP states before falling back to independence.
pub const DEFAULT_DP_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PriorModel {
    graph: Arc<LabeledGraph>,
    len: usize,
    bins: Vec<(f64, f64)>,
    pmf: Vec<f64>,
    edge_labels: Vec<f64>,
}

impl PriorModel {
    /// `pmf[v][step][bin]` by dense node id, `edge_labels[e]` by dense edge id. Bins must be
    /// sorted, non-overlapping intervals `[lo, hi)`; a bin with `lo == hi` is a point mass.
    pub fn new(
        graph: Arc<LabeledGraph>,
        len: usize,
        bins: Vec<(f64, f64)>,
        pmf: Vec<Vec<Vec<f64>>>,
        edge_labels: Vec<f64>,
    ) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidPrior(m.into()));
        if len == 0 {
            return bad("horizon must be at least 1");
        }
        if bins.is_empty() {
            return bad("at least one bin is required");
        }
        for (i, &(lo, hi)) in bins.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(Error::InvalidPrior(format!("bin {i} is [{lo}, {hi})")));
            }
            if i > 0 && bins[i - 1].1 > lo {
                return Err(Error::InvalidPrior(format!("bin {i} overlaps its predecessor")));
            }
        }
        if pmf.len() != graph.node_count() {
            return bad("one histogram series per node is required");
        }
        if edge_labels.len() != graph.edge_count() || edge_labels.iter().any(|y| !y.is_finite()) {
            return bad("one finite label per edge is required");
        }
        let mut flat = Vec::with_capacity(graph.node_count() * len * bins.len());
        for (v, series) in pmf.into_iter().enumerate() {
            if series.len() != len {
                return Err(Error::InvalidPrior(format!(
                    "node `{}` has {} histograms, expected {len}",
                    graph.node_name(NodeId(v)),
                    series.len()
                )));
            }
            for (step, h) in series.into_iter().enumerate() {
                let total: f64 = h.iter().sum();
                if h.len() != bins.len()
                    || h.iter().any(|p| !(p.is_finite() && *p > 0.0))
                    || libm::fabs(total - 1.0) > PMF_TOLERANCE
                {
                    return Err(Error::InvalidPrior(format!(
                        "histogram of node `{}` at time {} needs {} positive masses summing to 1",
                        graph.node_name(NodeId(v)),
                        step + 1,
                        bins.len()
                    )));
                }
                flat.extend(h);
            }
        }
        Ok(Self {
            graph,
            len,
            bins,
            pmf: flat,
            edge_labels,
        })
    }

    /// Same histogram at every node and time.
    pub fn homogeneous(
        graph: Arc<LabeledGraph>,
        len: usize,
        bins: Vec<(f64, f64)>,
        histogram: Vec<f64>,
        edge_labels: Vec<f64>,
    ) -> Result<Self> {
        let pmf = vec![vec![histogram; len]; graph.node_count()];
        Self::new(graph, len, bins, pmf, edge_labels)
    }

    pub fn graph(&self) -> &LabeledGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<LabeledGraph> {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bins(&self) -> &[(f64, f64)] {
        &self.bins
    }

    /// Bin masses at node `v` and zero-based `step`.
    pub fn pmf(&self, v: NodeId, step: usize) -> &[f64] {
        let b = self.bins.len();
        let at = (v.0 * self.len + step) * b;
        &self.pmf[at..at + b]
    }

    pub fn edge_labels(&self) -> &[f64] {
        &self.edge_labels
    }

    fn check(&self, v: NodeId, k: usize) -> Result<usize> {
        if v.0 >= self.graph.node_count() {
            return Err(Error::UnknownNode(format!("#{}", v.0)));
        }
        if k == 0 || k > self.len {
            return Err(Error::TimeOutOfRange {
                index: k,
                len: self.len,
            });
        }
        Ok(k - 1)
    }

    /// Nodes reached from `v` through `chain` under the fixed edge labels.
    pub fn reach(&self, v: NodeId, chain: &[EdgeProposition]) -> Vec<NodeId> {
        let mut scratch = ReachScratch::new(&self.graph);
        let mut out = scratch
            .reach(&self.graph, &[v], chain, |e| self.edge_labels[e.0])
            .to_vec();
        out.sort_unstable();
        out
    }
}

/// Fraction of bin `[lo, hi)` inside the region where `p` holds.
fn bin_fraction(p: &NodeProposition, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        return if p.holds(lo) { 1.0 } else { 0.0 };
    }
    let c = p.threshold;
    let inside = match p.cmp {
        crate::graph::Comparison::Ge => hi - c.max(lo),
        crate::graph::Comparison::Le => c.min(hi) - lo,
    };
    (inside / (hi - lo)).clamp(0.0, 1.0)
}

fn atom_prob_step(prior: &PriorModel, p: &NodeProposition, v: NodeId, step: usize) -> f64 {
    prior
        .pmf(v, step)
        .iter()
        .zip(&prior.bins)
        .map(|(m, b)| m * bin_fraction(p, *b))
        .sum()
}

/// Probability that `p` holds at node `v` and time index `k`.
pub fn atom_probability(prior: &PriorModel, p: &NodeProposition, v: NodeId, k: usize) -> Result<f64> {
    let step = prior.check(v, k)?;
    Ok(atom_prob_step(prior, p, v, step))
}

/// `P(at least n of the independent events with probabilities ps occur)`.
pub fn poisson_binomial_tail(ps: &[f64], n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if n > ps.len() {
        return 0.0;
    }
    // dist[j] = P(exactly j successes so far), j capped at n
    let mut dist = vec![0.0; n + 1];
    dist[0] = 1.0;
    for &p in ps {
        dist[n] += dist[n - 1] * p;
        for j in (1..n).rev() {
            dist[j] = dist[j] * (1.0 - p) + dist[j - 1] * p;
        }
        dist[0] *= 1.0 - p;
    }
    dist[n]
}

/// Probability that at least `n` nodes reached from `v` through `chain` satisfy `p` at time
/// index `k`.
pub fn exists_probability(
    prior: &PriorModel,
    n: u32,
    chain: &[EdgeProposition],
    p: &NodeProposition,
    v: NodeId,
    k: usize,
) -> Result<f64> {
    let step = prior.check(v, k)?;
    let ps: Vec<f64> = prior
        .reach(v, chain)
        .into_iter()
        .map(|u| atom_prob_step(prior, p, u, step))
        .collect();
    Ok(poisson_binomial_tail(&ps, n as usize))
}

/// Distribution over letters (bitmasks over the predicate list) at one node and time.
#[derive(Debug, Clone, PartialEq)]
pub struct LetterDistribution {
    pub probs: Vec<f64>,
    /// False when the joint DP exceeded its cap and predicates were treated as independent.
    pub exact: bool,
}

/// Joint distribution of the predicates at node `v`, time index `k`.
pub fn letter_distribution(
    prior: &PriorModel,
    predicates: &[Predicate],
    v: NodeId,
    k: usize,
) -> Result<LetterDistribution> {
    let step = prior.check(v, k)?;
    let plan = LetterPlan::new(prior, predicates, v, DEFAULT_DP_CAP);
    Ok(plan.distribution(prior, step))
}

/// Precomputed structure for letter distributions at one anchor node: the reachable sets do
/// not depend on time because edge labels are fixed.
struct LetterPlan {
    /// Per predicate: count threshold (bare atoms use 1 on the anchor only) and node set.
    preds: Vec<(usize, Vec<NodeId>, NodeProposition)>,
    /// Involved nodes with the predicate indices touching them.
    nodes: Vec<(NodeId, Vec<usize>)>,
    radix: Vec<usize>,
    states: usize,
    exact: bool,
}

impl LetterPlan {
    fn new(prior: &PriorModel, predicates: &[Predicate], v: NodeId, cap: usize) -> Self {
        let preds: Vec<(usize, Vec<NodeId>, NodeProposition)> = predicates
            .iter()
            .map(|p| match p {
                Predicate::Bare(prop) => (1, vec![v], *prop),
                Predicate::Exists { count, chain, prop } => {
                    (*count as usize, prior.reach(v, chain), *prop)
                }
            })
            .collect();
        let mut nodes: Vec<(NodeId, Vec<usize>)> = Vec::new();
        for (i, (_, set, _)) in preds.iter().enumerate() {
            for &u in set {
                match nodes.iter_mut().find(|(w, _)| *w == u) {
                    Some((_, list)) => list.push(i),
                    None => nodes.push((u, vec![i])),
                }
            }
        }
        nodes.sort_by_key(|(u, _)| *u);
        // counters saturate at the threshold, so each needs threshold + 1 values
        let radix: Vec<usize> = preds.iter().map(|(n, _, _)| n + 1).collect();
        let states = radix
            .iter()
            .try_fold(1usize, |acc, r| acc.checked_mul(*r))
            .unwrap_or(usize::MAX);
        let exact = states <= cap;
        if !exact {
            log::warn!(
                "joint letter distribution needs {states} DP states (cap {cap}); \
                 treating predicates as independent"
            );
        }
        Self {
            preds,
            nodes,
            radix,
            states,
            exact,
        }
    }

    fn distribution(&self, prior: &PriorModel, step: usize) -> LetterDistribution {
        let letters = 1usize << self.preds.len();
        let mut probs = vec![0.0; letters];
        if !self.exact {
            let marginals: Vec<f64> = self
                .preds
                .iter()
                .map(|(n, set, prop)| {
                    let ps: Vec<f64> =
                        set.iter().map(|u| atom_prob_step(prior, prop, *u, step)).collect();
                    poisson_binomial_tail(&ps, *n)
                })
                .collect();
            for (letter, slot) in probs.iter_mut().enumerate() {
                *slot = marginals
                    .iter()
                    .enumerate()
                    .map(|(i, p)| if letter & (1 << i) != 0 { *p } else { 1.0 - p })
                    .product();
            }
            return LetterDistribution {
                probs,
                exact: false,
            };
        }

        let mut stride = vec![1usize; self.radix.len()];
        for i in 1..self.radix.len() {
            stride[i] = stride[i - 1] * self.radix[i - 1];
        }
        let mut dp = vec![0.0; self.states];
        dp[0] = 1.0;
        let mut next = vec![0.0; self.states];
        for (u, touching) in &self.nodes {
            let local = local_masks(prior, *u, step, touching.iter().map(|&i| &self.preds[i].2));
            next.iter_mut().for_each(|x| *x = 0.0);
            for (s, &mass) in dp.iter().enumerate() {
                if mass == 0.0 {
                    continue;
                }
                for &(mask, pm) in &local {
                    let mut t = s;
                    for (j, &i) in touching.iter().enumerate() {
                        if mask & (1 << j) != 0 {
                            let c = (s / stride[i]) % self.radix[i];
                            if c + 1 < self.radix[i] {
                                t += stride[i];
                            }
                        }
                    }
                    next[t] += mass * pm;
                }
            }
            core::mem::swap(&mut dp, &mut next);
        }
        for (s, &mass) in dp.iter().enumerate() {
            let mut letter = 0usize;
            for (i, (n, _, _)) in self.preds.iter().enumerate() {
                if (s / stride[i]) % self.radix[i] >= *n {
                    letter |= 1 << i;
                }
            }
            probs[letter] += mass;
        }
        LetterDistribution { probs, exact: true }
    }
}

/// Joint truth masks of several propositions on one node's label, with their probabilities.
/// Bins are split at every threshold so each piece has a constant truth vector.
fn local_masks<'a>(
    prior: &PriorModel,
    u: NodeId,
    step: usize,
    props: impl Iterator<Item = &'a NodeProposition>,
) -> Vec<(u32, f64)> {
    let props: Vec<&NodeProposition> = props.collect();
    let mut out: Vec<(u32, f64)> = Vec::new();
    let mut add = |mask: u32, p: f64| {
        if p <= 0.0 {
            return;
        }
        match out.iter_mut().find(|(m, _)| *m == mask) {
            Some((_, q)) => *q += p,
            None => out.push((mask, p)),
        }
    };
    let eval = |x: f64| {
        props
            .iter()
            .enumerate()
            .filter(|(_, p)| p.holds(x))
            .fold(0u32, |acc, (j, _)| acc | (1 << j))
    };
    for (&mass, &(lo, hi)) in prior.pmf(u, step).iter().zip(&prior.bins) {
        if lo == hi {
            add(eval(lo), mass);
            continue;
        }
        let mut cuts: Vec<f64> = props
            .iter()
            .map(|p| p.threshold)
            .filter(|c| *c > lo && *c < hi)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut a = lo;
        for b in cuts.into_iter().chain(core::iter::once(hi)) {
            add(eval(0.5 * (a + b)), mass * (b - a) / (hi - lo));
            a = b;
        }
    }
    out
}

/// Work done by the backward recursion, for complexity checks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    /// `(state, letter)` transition lookups while assembling the step matrices.
    pub transition_evals: u64,
    /// Multiply-adds in the matrix-vector products.
    pub matrix_ops: u64,
}

/// Probability that a formula over bare node propositions (or type-I predicates) holds at `v`,
/// given its automaton: the DFA consumes letters 1..=L backward.
pub fn automaton_probability(
    prior: &PriorModel,
    automaton: &Automaton,
    v: NodeId,
    counters: &mut Counters,
) -> f64 {
    let dfa = &automaton.dfa;
    let k = dfa.state_count();
    let plan = LetterPlan::new(prior, &automaton.predicates, v, DEFAULT_DP_CAP);
    // p[q]: probability of acceptance from q with the remaining letters
    let mut p: Vec<f64> = (0..k as u32)
        .map(|q| if dfa.is_accepting(q) { 1.0 } else { 0.0 })
        .collect();
    let mut c = vec![0.0; k * k];
    let mut next = vec![0.0; k];
    for step in (0..prior.len()).rev() {
        let dist = plan.distribution(prior, step);
        c.iter_mut().for_each(|x| *x = 0.0);
        for j in 0..k as u32 {
            for (letter, &r) in dfa.row(j).iter().enumerate() {
                c[j as usize * k + r as usize] += dist.probs[letter];
            }
        }
        counters.transition_evals += (k * dfa.letter_count()) as u64;
        for j in 0..k {
            next[j] = c[j * k..(j + 1) * k].iter().zip(&p).map(|(a, b)| a * b).sum();
        }
        counters.matrix_ops += (k * k) as u64;
        core::mem::swap(&mut p, &mut next);
    }
    let beta = p[0].clamp(0.0, 1.0);
    if automaton.negated {
        1.0 - beta
    } else {
        beta
    }
}

/// Probability under the prior that `f` holds at `v` (time index 1).
pub fn satisfaction_probability(prior: &PriorModel, f: &Formula, v: NodeId) -> Result<f64> {
    satisfaction_probability_counted(prior, f, v, &mut Counters::default())
}

pub fn satisfaction_probability_counted(
    prior: &PriorModel,
    f: &Formula,
    v: NodeId,
    counters: &mut Counters,
) -> Result<f64> {
    prior.check(v, 1)?;
    require_ground(f)?;
    let kind = subtype(f);
    if kind.type_i {
        let a = to_dfa(f, prior.len())?;
        return Ok(automaton_probability(prior, &a, v, counters));
    }
    match f {
        Formula::Exists { count, chain, body } if kind.type_ii => {
            let chain: Vec<EdgeProposition> =
                chain.iter().map(|r| r.proposition()).collect::<Result<_>>()?;
            let n = count.literal().unwrap_or(0) as usize;
            let a = to_dfa(body, prior.len())?;
            let betas: Vec<f64> = prior
                .reach(v, &chain)
                .into_iter()
                .map(|u| automaton_probability(prior, &a, u, counters))
                .collect();
            Ok(poisson_binomial_tail(&betas, n))
        }
        _ => Err(Error::OutOfFragment(
            "probability needs a type-I formula or a single outer neighbor quantifier".into(),
        )),
    }
}

/// Per-node probabilities and information gains (nats per time step).
#[derive(Debug, Clone, PartialEq)]
pub struct InfoGainReport {
    pub nodes: Vec<NodeId>,
    pub probabilities: Vec<f64>,
    pub gains: Vec<f64>,
    pub average: f64,
}

/// `-ln(p) / L`, with zero gain for impossible or certain events.
pub fn info_gain(p: f64, horizon: usize) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -libm::log(p) / horizon as f64
    }
}

/// Information gain of `f` at each node of `nodes` (all nodes when `None`) and their average.
pub fn compute_ig(prior: &PriorModel, f: &Formula, nodes: Option<&[NodeId]>) -> Result<InfoGainReport> {
    let nodes: Vec<NodeId> = match nodes {
        Some(ns) => ns.to_vec(),
        None => prior.graph().nodes().collect(),
    };
    if nodes.is_empty() {
        return Err(Error::EmptySet);
    }
    let constant = matches!(f, Formula::True | Formula::False);
    let mut probabilities = Vec::with_capacity(nodes.len());
    let mut gains = Vec::with_capacity(nodes.len());
    for &v in &nodes {
        let p = satisfaction_probability(prior, f, v)?;
        probabilities.push(p);
        gains.push(if constant { 0.0 } else { info_gain(p, prior.len()) });
    }
    let average = gains.iter().sum::<f64>() / nodes.len() as f64;
    Ok(InfoGainReport {
        nodes,
        probabilities,
        gains,
        average,
    })
}
