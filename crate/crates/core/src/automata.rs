//! Horizon-aware DFAs for the co-safe and safe fragments.
//!
//! States are residual obligations produced by formula progression: reading a letter turns an
//! obligation about the current position into one about the next position. A word of length
//! `L` is accepted when the residual left after its last letter holds on the empty suffix,
//! which makes acceptance agree with the finite-trace semantics of [`crate::eval`].

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::eval::bound_offsets;
use crate::formula::{subtype, Formula};
use crate::graph::{EdgeProposition, NodeId, NodeProposition, ReachScratch, Trajectory};
use crate::{Error, Result};

/// Largest supported predicate list; letters are bitmasks over it.
pub const MAX_PREDICATES: usize = 16;

/// Default cap on the number of DFA states.
pub const DEFAULT_STATE_LIMIT: usize = 200_000;

/// One atomic predicate of the alphabet.
#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    /// A node proposition at the anchoring node.
    Bare(NodeProposition),
    /// At least `count` nodes reached through `chain` satisfy `prop`.
    Exists {
        count: u32,
        chain: Vec<EdgeProposition>,
        prop: NodeProposition,
    },
}

impl Predicate {
    /// Truth value at node `v` and zero-based `step`.
    pub fn holds(&self, g: &Trajectory, v: NodeId, step: usize, scratch: &mut ReachScratch) -> bool {
        match self {
            Predicate::Bare(p) => p.holds(g.node_label(v, step)),
            Predicate::Exists { count, chain, prop } => {
                let reached = scratch.reach(g.graph(), &[v], chain, |e| g.edge_label(e, step));
                reached
                    .iter()
                    .filter(|u| prop.holds(g.node_label(**u, step)))
                    .count()
                    >= *count as usize
            }
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Bare(p) => write!(f, "{p}"),
            Predicate::Exists { count, chain, prop } => {
                write!(f, "E {count}")?;
                for rho in chain {
                    write!(f, " via ({rho})")?;
                }
                write!(f, " : ({prop})")
            }
        }
    }
}

/// Deterministic automaton with total transitions; state 0 is initial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    predicates: usize,
    transitions: Vec<u32>,
    accepting: Vec<bool>,
}

impl Dfa {
    /// Builds a DFA from a transition table `delta[state][letter]`.
    pub fn new(predicates: usize, delta: Vec<Vec<u32>>, accepting: Vec<bool>) -> Result<Self> {
        let letters = 1usize << predicates;
        if delta.is_empty() || delta.len() != accepting.len() {
            return Err(Error::InvalidConfig("transition table does not match states".into()));
        }
        let mut transitions = Vec::with_capacity(delta.len() * letters);
        for row in delta {
            if row.len() != letters || row.iter().any(|&q| q as usize >= accepting.len()) {
                return Err(Error::InvalidConfig("transition table is not total".into()));
            }
            transitions.extend(row);
        }
        Ok(Self {
            predicates,
            transitions,
            accepting,
        })
    }

    pub fn state_count(&self) -> usize {
        self.accepting.len()
    }

    pub fn letter_count(&self) -> usize {
        1 << self.predicates
    }

    pub fn predicate_count(&self) -> usize {
        self.predicates
    }

    #[inline]
    pub fn next(&self, state: u32, letter: u32) -> u32 {
        self.transitions[state as usize * self.letter_count() + letter as usize]
    }

    pub fn is_accepting(&self, state: u32) -> bool {
        self.accepting[state as usize]
    }

    /// Transition row of one state, indexed by letter.
    pub fn row(&self, state: u32) -> &[u32] {
        let n = self.letter_count();
        &self.transitions[state as usize * n..(state as usize + 1) * n]
    }

    /// Merges states with identical future behavior (Moore partition refinement) and drops
    /// unreachable ones.
    pub fn minimize(&self) -> Dfa {
        let n = self.state_count();
        let letters = self.letter_count();
        let mut class: Vec<u32> = self.accepting.iter().map(|&a| u32::from(a)).collect();
        let mut count = 0;
        loop {
            let mut ids: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
            let mut next_class = vec![0u32; n];
            for q in 0..n {
                let mut sig = Vec::with_capacity(letters + 1);
                sig.push(class[q]);
                sig.extend(self.row(q as u32).iter().map(|&r| class[r as usize]));
                let fresh = ids.len() as u32;
                next_class[q] = *ids.entry(sig).or_insert(fresh);
            }
            let new_count = ids.len();
            class = next_class;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        // renumber reachable classes in BFS order so the initial state stays 0
        let mut order = vec![u32::MAX; count];
        let mut reps = Vec::new();
        let mut queue = VecDeque::from([0u32]);
        order[class[0] as usize] = 0;
        reps.push(0u32);
        while let Some(q) = queue.pop_front() {
            for &r in self.row(q) {
                let c = class[r as usize] as usize;
                if order[c] == u32::MAX {
                    order[c] = reps.len() as u32;
                    reps.push(r);
                    queue.push_back(r);
                }
            }
        }
        let mut transitions = Vec::with_capacity(reps.len() * letters);
        for &q in &reps {
            transitions.extend(self.row(q).iter().map(|&r| order[class[r as usize] as usize]));
        }
        Dfa {
            predicates: self.predicates,
            transitions,
            accepting: reps.iter().map(|&q| self.accepting[q as usize]).collect(),
        }
    }
}

/// A DFA together with its predicate list.
#[derive(Debug, Clone)]
pub struct Automaton {
    pub dfa: Dfa,
    pub predicates: Vec<Predicate>,
    /// The DFA recognizes the negation of the formula (safe case).
    pub negated: bool,
    pub horizon: usize,
}

impl Automaton {
    /// Letters of `g` at node `v` over this automaton's predicates.
    pub fn label_word(&self, g: &Trajectory, v: NodeId) -> Vec<u32> {
        label_word(g, v, &self.predicates)
    }

    /// Whether `g` satisfies the formula at `v` according to the automaton.
    pub fn accepts_trajectory(&self, g: &Trajectory, v: NodeId) -> Result<bool> {
        let accepted = run_word(&self.dfa, &self.label_word(g, v))?;
        Ok(accepted != self.negated)
    }

    pub fn to_dot(&self) -> String {
        to_dot(&self.dfa, &self.predicates)
    }
}

/// Letter sequence of `g` at `v`: bit `i` of letter `k` is set when predicate `i` holds.
pub fn label_word(g: &Trajectory, v: NodeId, predicates: &[Predicate]) -> Vec<u32> {
    let mut scratch = ReachScratch::new(g.graph());
    (0..g.len())
        .map(|step| {
            predicates
                .iter()
                .enumerate()
                .filter(|(_, p)| p.holds(g, v, step, &mut scratch))
                .fold(0u32, |acc, (i, _)| acc | (1 << i))
        })
        .collect()
}

/// Runs `dfa` from its initial state and reports whether the final state accepts.
pub fn run_word(dfa: &Dfa, word: &[u32]) -> Result<bool> {
    let mut q = 0u32;
    for &letter in word {
        if letter as usize >= dfa.letter_count() {
            return Err(Error::InvalidConfig(format!(
                "letter {letter} outside an alphabet of {} predicates",
                dfa.predicate_count()
            )));
        }
        q = dfa.next(q, letter);
    }
    Ok(dfa.is_accepting(q))
}

/// Graphviz rendering; edges list the letters (as predicate index sets) that take them.
pub fn to_dot(dfa: &Dfa, predicates: &[Predicate]) -> String {
    let mut out = String::from("digraph dfa {\n  rankdir=LR;\n  init [shape=point];\n");
    for q in 0..dfa.state_count() as u32 {
        let shape = if dfa.is_accepting(q) {
            "doublecircle"
        } else {
            "circle"
        };
        let _ = writeln!(out, "  q{q} [shape={shape}];");
    }
    out.push_str("  init -> q0;\n");
    for q in 0..dfa.state_count() as u32 {
        let mut by_target: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for (letter, &r) in dfa.row(q).iter().enumerate() {
            by_target.entry(r).or_default().push(letter as u32);
        }
        for (r, letters) in by_target {
            let label = if letters.len() == dfa.letter_count() {
                String::from("*")
            } else {
                letters
                    .iter()
                    .map(|l| {
                        let set: Vec<String> = (0..dfa.predicate_count())
                            .filter(|i| l & (1 << i) != 0)
                            .map(|i| format!("p{i}"))
                            .collect();
                        format!("{{{}}}", set.join(","))
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            let _ = writeln!(out, "  q{q} -> q{r} [label=\"{label}\"];");
        }
    }
    for (i, p) in predicates.iter().enumerate() {
        let _ = writeln!(out, "  // p{i}: {p}");
    }
    out.push_str("}\n");
    out
}

/// Predicate list of a formula whose neighbor quantifiers all wrap atoms, in first-occurrence
/// order without duplicates.
pub fn extract_predicates(f: &Formula) -> Result<Vec<Predicate>> {
    fn walk(f: &Formula, out: &mut Vec<Predicate>) -> Result<()> {
        let mut add = |p: Predicate| {
            if !out.contains(&p) {
                out.push(p);
            }
        };
        match f {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => add(Predicate::Bare(a.proposition()?)),
            Formula::Exists { count, chain, body } => {
                let Formula::Atom(a) = &**body else {
                    return Err(Error::OutOfFragment(
                        "neighbor quantifier over a non-atomic body".into(),
                    ));
                };
                let count = count
                    .literal()
                    .ok_or_else(|| Error::Parameterized(count.param().unwrap_or("").into()))?;
                add(Predicate::Exists {
                    count,
                    chain: chain.iter().map(|r| r.proposition()).collect::<Result<_>>()?,
                    prop: a.proposition()?,
                });
            }
            Formula::Not(a) | Formula::Eventually { body: a, .. } | Formula::Always { body: a, .. } => {
                walk(a, out)?
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                walk(a, out)?;
                walk(b, out)?;
            }
            Formula::Until { lhs, rhs, .. } => {
                walk(lhs, out)?;
                walk(rhs, out)?;
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(f, &mut out)?;
    Ok(out)
}

/// Builds the DFA of `f` (co-safe) or of `!f` (safe) over horizon `horizon`, minimized.
pub fn to_dfa(f: &Formula, horizon: usize) -> Result<Automaton> {
    to_dfa_with_limit(f, horizon, DEFAULT_STATE_LIMIT)
}

pub fn to_dfa_with_limit(f: &Formula, horizon: usize, state_limit: usize) -> Result<Automaton> {
    crate::eval::require_ground(f)?;
    let kind = subtype(f);
    if !kind.type_i {
        return Err(Error::OutOfFragment(
            "neighbor quantifiers must wrap atoms; build type-II formulas from their body".into(),
        ));
    }
    let negated = if kind.cosafe {
        false
    } else if kind.safe {
        true
    } else {
        return Err(Error::OutOfFragment(
            "formula is neither syntactically co-safe nor safe".into(),
        ));
    };
    if horizon == 0 {
        return Err(Error::InvalidConfig("horizon must be at least 1".into()));
    }
    if (f.max_time_bound() as usize) >= horizon {
        log::warn!(
            "time bound {} reaches past the horizon {horizon}; it is clipped at the trace end",
            f.max_time_bound()
        );
    }
    let predicates = extract_predicates(f)?;
    if predicates.len() > MAX_PREDICATES {
        return Err(Error::TooManyPredicates(predicates.len()));
    }
    let mut arena = Arena::default();
    let root = arena.lower(f, &predicates)?;
    let root = if negated { arena.not(root) } else { root };
    let dfa = arena.explore(root, predicates.len(), horizon, state_limit)?;
    Ok(Automaton {
        dfa: dfa.minimize(),
        predicates,
        negated,
        horizon,
    })
}

type Id = u32;

/// Residual obligations. Temporal nodes carry offsets relative to the current position; `hi`
/// of `None` reaches the end of the word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Node {
    True,
    False,
    Lit(u32),
    Not(Id),
    And(Vec<Id>),
    Or(Vec<Id>),
    Ev { lo: u32, hi: Option<u32>, body: Id },
    Al { lo: u32, hi: Option<u32>, body: Id },
    Until { lo: u32, hi: Option<u32>, lhs: Id, rhs: Id },
}

#[derive(Default)]
struct Arena {
    nodes: Vec<Node>,
    ids: BTreeMap<Node, Id>,
    prog_cache: BTreeMap<(Id, u32), Id>,
}

const TRUE: Id = 0;
const FALSE: Id = 1;

impl Arena {
    fn intern(&mut self, n: Node) -> Id {
        if self.nodes.is_empty() {
            self.nodes.extend([Node::True, Node::False]);
            self.ids.insert(Node::True, TRUE);
            self.ids.insert(Node::False, FALSE);
        }
        if let Some(&id) = self.ids.get(&n) {
            return id;
        }
        let id = self.nodes.len() as Id;
        self.nodes.push(n.clone());
        self.ids.insert(n, id);
        id
    }

    fn constant(&mut self, b: bool) -> Id {
        self.intern(if b { Node::True } else { Node::False })
    }

    fn not(&mut self, a: Id) -> Id {
        match self.nodes.get(a as usize) {
            Some(Node::True) => FALSE,
            Some(Node::False) => TRUE,
            Some(Node::Not(inner)) => *inner,
            _ => self.intern(Node::Not(a)),
        }
    }

    fn junction(&mut self, items: Vec<Id>, conj: bool) -> Id {
        let (unit, zero) = if conj { (TRUE, FALSE) } else { (FALSE, TRUE) };
        self.constant(true);
        let mut flat = Vec::with_capacity(items.len());
        for id in items {
            match &self.nodes[id as usize] {
                Node::And(xs) if conj => flat.extend_from_slice(xs),
                Node::Or(xs) if !conj => flat.extend_from_slice(xs),
                _ if id == unit => {}
                _ if id == zero => return zero,
                _ => flat.push(id),
            }
        }
        flat.sort_unstable();
        flat.dedup();
        match flat.len() {
            0 => unit,
            1 => flat[0],
            _ => self.intern(if conj { Node::And(flat) } else { Node::Or(flat) }),
        }
    }

    fn and(&mut self, items: Vec<Id>) -> Id {
        self.junction(items, true)
    }

    fn or(&mut self, items: Vec<Id>) -> Id {
        self.junction(items, false)
    }

    fn lower(&mut self, f: &Formula, preds: &[Predicate]) -> Result<Id> {
        let lit = |this: &mut Self, p: Predicate| {
            let i = preds.iter().position(|q| *q == p).expect("predicate extracted") as u32;
            this.intern(Node::Lit(i))
        };
        Ok(match f {
            Formula::True => self.constant(true),
            Formula::False => self.constant(false),
            Formula::Atom(a) => lit(self, Predicate::Bare(a.proposition()?)),
            Formula::Exists { count, chain, body } => {
                let Formula::Atom(a) = &**body else {
                    return Err(Error::OutOfFragment("non-atomic neighbor body".into()));
                };
                let p = Predicate::Exists {
                    count: count.literal().unwrap_or(0),
                    chain: chain.iter().map(|r| r.proposition()).collect::<Result<_>>()?,
                    prop: a.proposition()?,
                };
                lit(self, p)
            }
            Formula::Not(a) => {
                let a = self.lower(a, preds)?;
                self.not(a)
            }
            Formula::And(a, b) => {
                let (a, b) = (self.lower(a, preds)?, self.lower(b, preds)?);
                self.and(vec![a, b])
            }
            Formula::Or(a, b) => {
                let (a, b) = (self.lower(a, preds)?, self.lower(b, preds)?);
                self.or(vec![a, b])
            }
            Formula::Implies(a, b) => {
                let (a, b) = (self.lower(a, preds)?, self.lower(b, preds)?);
                let na = self.not(a);
                self.or(vec![na, b])
            }
            Formula::Eventually { bound, body } | Formula::Always { bound, body } => {
                let is_ev = matches!(f, Formula::Eventually { .. });
                let body = self.lower(body, preds)?;
                let mut parts = Vec::new();
                for (lo, hi) in bound_offsets(bound)? {
                    let (lo, hi) = (lo as u32, hi.map(|h| h as u32));
                    parts.push(if is_ev {
                        self.ev(lo, hi, body)
                    } else {
                        self.al(lo, hi, body)
                    });
                }
                self.and(parts)
            }
            Formula::Until { bound, lhs, rhs } => {
                let (a, b) = (self.lower(lhs, preds)?, self.lower(rhs, preds)?);
                let mut parts = Vec::new();
                for (lo, hi) in bound_offsets(bound)? {
                    parts.push(self.until(lo as u32, hi.map(|h| h as u32), a, b));
                }
                self.and(parts)
            }
        })
    }

    fn ev(&mut self, lo: u32, hi: Option<u32>, body: Id) -> Id {
        match body {
            FALSE => FALSE,
            _ if hi.is_some_and(|h| h < lo) => FALSE,
            _ => self.intern(Node::Ev { lo, hi, body }),
        }
    }

    fn al(&mut self, lo: u32, hi: Option<u32>, body: Id) -> Id {
        match body {
            TRUE => TRUE,
            _ if hi.is_some_and(|h| h < lo) => TRUE,
            _ => self.intern(Node::Al { lo, hi, body }),
        }
    }

    fn until(&mut self, lo: u32, hi: Option<u32>, lhs: Id, rhs: Id) -> Id {
        if rhs == FALSE || lhs == FALSE || hi.is_some_and(|h| h < lo) {
            return FALSE;
        }
        self.intern(Node::Until { lo, hi, lhs, rhs })
    }

    /// Truth on the empty suffix: pending witnesses fail, pending invariants hold.
    fn accepts_empty(&self, id: Id) -> bool {
        match &self.nodes[id as usize] {
            Node::True | Node::Al { .. } => true,
            Node::False | Node::Lit(_) | Node::Ev { .. } | Node::Until { .. } => false,
            Node::Not(a) => !self.accepts_empty(*a),
            Node::And(xs) => xs.iter().all(|x| self.accepts_empty(*x)),
            Node::Or(xs) => xs.iter().any(|x| self.accepts_empty(*x)),
        }
    }

    /// Residual that must hold from the next position after reading `letter` here.
    fn progress(&mut self, id: Id, letter: u32) -> Id {
        if let Some(&r) = self.prog_cache.get(&(id, letter)) {
            return r;
        }
        let dec = |h: Option<u32>| h.map(|h| h - 1);
        let r = match self.nodes[id as usize].clone() {
            Node::True => TRUE,
            Node::False => FALSE,
            Node::Lit(i) => self.constant(letter & (1 << i) != 0),
            Node::Not(a) => {
                let a = self.progress(a, letter);
                self.not(a)
            }
            Node::And(xs) => {
                let ys = xs.iter().map(|&x| self.progress(x, letter)).collect();
                self.and(ys)
            }
            Node::Or(xs) => {
                let ys = xs.iter().map(|&x| self.progress(x, letter)).collect();
                self.or(ys)
            }
            Node::Ev { lo, hi, body } => {
                if lo > 0 {
                    self.ev(lo - 1, dec(hi), body)
                } else {
                    let now = self.progress(body, letter);
                    if hi == Some(0) {
                        now
                    } else {
                        let later = self.ev(0, dec(hi), body);
                        self.or(vec![now, later])
                    }
                }
            }
            Node::Al { lo, hi, body } => {
                if lo > 0 {
                    self.al(lo - 1, dec(hi), body)
                } else {
                    let now = self.progress(body, letter);
                    if hi == Some(0) {
                        now
                    } else {
                        let later = self.al(0, dec(hi), body);
                        self.and(vec![now, later])
                    }
                }
            }
            Node::Until { lo, hi, lhs, rhs } => {
                let a = self.progress(lhs, letter);
                if lo > 0 {
                    let rest = self.until(lo - 1, dec(hi), lhs, rhs);
                    self.and(vec![a, rest])
                } else {
                    let b = self.progress(rhs, letter);
                    let here = self.and(vec![a, b]);
                    if hi == Some(0) {
                        here
                    } else {
                        let rest = self.until(0, dec(hi), lhs, rhs);
                        let later = self.and(vec![a, rest]);
                        self.or(vec![here, later])
                    }
                }
            }
        };
        self.prog_cache.insert((id, letter), r);
        r
    }

    /// Breadth-first exploration up to depth `horizon`; states first met at the horizon get
    /// self-loops since no word reads past it.
    fn explore(&mut self, root: Id, predicates: usize, horizon: usize, limit: usize) -> Result<Dfa> {
        let letters = 1u32 << predicates;
        let mut index: BTreeMap<Id, u32> = BTreeMap::new();
        let mut states = vec![root];
        let mut depth = vec![0usize];
        index.insert(root, 0);
        let mut delta: Vec<Vec<u32>> = Vec::new();
        let mut q = 0;
        while q < states.len() {
            let (id, d) = (states[q], depth[q]);
            let mut row = Vec::with_capacity(letters as usize);
            if d >= horizon {
                row.resize(letters as usize, q as u32);
            } else {
                for letter in 0..letters {
                    let r = self.progress(id, letter);
                    let next = match index.get(&r) {
                        Some(&s) => s,
                        None => {
                            if states.len() >= limit {
                                return Err(Error::StateLimit(limit));
                            }
                            let s = states.len() as u32;
                            index.insert(r, s);
                            states.push(r);
                            depth.push(d + 1);
                            s
                        }
                    };
                    row.push(next);
                }
            }
            delta.push(row);
            q += 1;
        }
        let accepting = states.iter().map(|&s| self.accepts_empty(s)).collect();
        Dfa::new(predicates, delta, accepting)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::sat;
    use crate::formula::parse;
    use crate::graph::{Comparison, LabeledGraph};
    use alloc::string::ToString;
    use alloc::sync::Arc;

    fn single(xs: &[f64]) -> Trajectory {
        let graph = Arc::new(LabeledGraph::new(["v"], []).unwrap());
        Trajectory::new(graph, xs.len(), vec![xs.to_vec()], vec![]).unwrap()
    }

    #[test]
    fn atom_needs_three_states() {
        let a = to_dfa(&parse("x >= 1").unwrap(), 4).unwrap();
        assert_eq!(a.dfa.state_count(), 3);
        assert!(!a.negated);
        assert!(run_word(&a.dfa, &[1, 0, 0, 0]).unwrap());
        assert!(!run_word(&a.dfa, &[0, 1, 1, 1]).unwrap());
    }

    #[test]
    fn bounded_eventually_over_two_letters() {
        let a = to_dfa(&parse("F[<=1] (x >= 1)").unwrap(), 2).unwrap();
        let accepted: Vec<[u32; 2]> = [[0, 0], [0, 1], [1, 0], [1, 1]]
            .into_iter()
            .filter(|w| run_word(&a.dfa, w).unwrap())
            .collect();
        assert_eq!(accepted, [[0, 1], [1, 0], [1, 1]]);
    }

    #[test]
    fn response_pattern_is_small() {
        let f = parse("G ((x >= 1) -> F[<=1] (x <= 0))").unwrap();
        let a = to_dfa(&f, 3).unwrap();
        assert!(a.negated);
        assert!(a.dfa.state_count() <= 4, "{} states", a.dfa.state_count());
    }

    #[test]
    fn degenerate_acceptance() {
        let never = Dfa::new(1, vec![vec![0, 0]], vec![false]).unwrap();
        let always = Dfa::new(1, vec![vec![0, 0]], vec![true]).unwrap();
        for w in [[0u32, 1], [1, 1], [0, 0]] {
            assert!(!run_word(&never, &w).unwrap());
            assert!(run_word(&always, &w).unwrap());
        }
        assert!(run_word(&never, &[2]).is_err());
    }

    #[test]
    fn words_follow_labels() {
        let p = Predicate::Bare(NodeProposition::new(Comparison::Ge, 1.0));
        assert_eq!(label_word(&single(&[0.0, 0.0]), NodeId(0), core::slice::from_ref(&p)), [0, 0]);
        assert_eq!(label_word(&single(&[0.0, 1.0]), NodeId(0), &[p]), [0, 1]);
    }

    #[test]
    fn exists_predicates_on_path() {
        let e = |n: &str, a: &str, b: &str| (n.to_string(), a.to_string(), b.to_string());
        let graph =
            Arc::new(LabeledGraph::new(["a", "b", "c"], [e("ab", "a", "b"), e("cb", "c", "b")]).unwrap());
        let g = Trajectory::new(
            graph,
            2,
            vec![vec![0.0, 2.0], vec![2.0, 0.0], vec![2.0, 2.0]],
            vec![vec![1.0, 1.0], vec![2.0, 1.0]],
        )
        .unwrap();
        let f = parse("E 1 via (y <= 1) : (x >= 1) & (x >= 1)").unwrap();
        let preds = extract_predicates(&f).unwrap();
        assert_eq!(preds.len(), 2);
        // brute force: node a, step 0 reaches b (x=2); step 1 reaches b (x=0)
        let b = g.graph().node("b").unwrap();
        let a = g.graph().node("a").unwrap();
        assert_eq!(label_word(&g, a, &preds), [0b01, 0b10]);
        // b reaches only a (y=1); c sits behind y=2
        assert_eq!(label_word(&g, b, &preds), [0b10, 0b01]);
    }

    #[test]
    fn rejects_out_of_fragment() {
        assert!(matches!(
            to_dfa(&parse("G F (x >= 1)").unwrap(), 3),
            Err(Error::OutOfFragment(_))
        ));
        assert!(matches!(
            to_dfa(&parse("E 1 via (y <= 1) : F (x >= 1)").unwrap(), 3),
            Err(Error::OutOfFragment(_))
        ));
    }

    #[test]
    fn minimization_preserves_language() {
        let f = parse("(x >= 1) U[<=2] G[<=1] (x <= 0)").unwrap();
        for len in 1..=5 {
            let a = to_dfa(&f, len).unwrap();
            for bits in 0u32..(1 << len) {
                let xs: Vec<f64> = (0..len).map(|i| ((bits >> i) & 1) as f64).collect();
                let g = single(&xs);
                assert_eq!(
                    a.accepts_trajectory(&g, NodeId(0)).unwrap(),
                    sat(&g, &f, NodeId(0), 1).unwrap(),
                    "{xs:?}"
                );
            }
        }
    }

    #[test]
    fn dot_mentions_every_state() {
        let a = to_dfa(&parse("F[<=1] (x >= 1)").unwrap(), 2).unwrap();
        let dot = a.to_dot();
        for q in 0..a.dfa.state_count() {
            assert!(dot.contains(&format!("q{q} [")));
        }
    }
}
