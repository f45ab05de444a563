//! Static analysis: parameter polarity, connective count and fragment membership.

use super::{Formula, TimeBound, Value};
use crate::graph::Comparison;

/// Direction in which raising a parameter makes a formula easier to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    /// The parameter does not occur.
    Undefined,
    Positive,
    Negative,
    Mixed,
}

impl Polarity {
    /// The `∼` operator: swaps `+` and `-`.
    pub fn flip(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
            p => p,
        }
    }

    /// The `∘` operator: `U` is neutral, disagreement yields `M`.
    pub fn combine(self, other: Self) -> Self {
        use Polarity::*;
        match (self, other) {
            (Undefined, p) | (p, Undefined) => p,
            (Positive, Positive) => Positive,
            (Negative, Negative) => Negative,
            _ => Mixed,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Polarity::Undefined => "U",
            Polarity::Positive => "+",
            Polarity::Negative => "-",
            Polarity::Mixed => "M",
        }
    }
}

fn threshold_polarity(cmp: Comparison, v: &Value<f64>, p: &str) -> Polarity {
    match v {
        Value::Param(q) if q == p => match cmp {
            Comparison::Le => Polarity::Positive,
            Comparison::Ge => Polarity::Negative,
        },
        _ => Polarity::Undefined,
    }
}

fn is(v: &Value<u32>, p: &str) -> bool {
    matches!(v, Value::Param(q) if q == p)
}

/// Polarity of an eventually-style bound: an upper bound widens as it grows, a lower bound
/// narrows.
fn bound_polarity(bound: &TimeBound, p: &str) -> Polarity {
    match bound {
        TimeBound::Unbounded => Polarity::Undefined,
        TimeBound::AtMost(v) if is(v, p) => Polarity::Positive,
        TimeBound::AtLeast(v) if is(v, p) => Polarity::Negative,
        TimeBound::Window(lo, _) if is(lo, p) => Polarity::Negative,
        TimeBound::Window(_, hi) if is(hi, p) => Polarity::Positive,
        _ => Polarity::Undefined,
    }
}

/// Polarity of parameter `p` in `f`. Derived operators are handled through their desugared
/// forms: `a -> b` as `!a | b`, `G φ` as `!F !φ`, and paired bounds as conjunctions. A
/// parameter in the bound of `U` is reported as mixed.
pub fn polarity(f: &Formula, p: &str) -> Polarity {
    match f {
        Formula::True | Formula::False => Polarity::Undefined,
        Formula::Atom(a) => threshold_polarity(a.cmp, &a.threshold, p),
        Formula::Exists { count, chain, body } => {
            let mut pol = if is(count, p) {
                Polarity::Negative
            } else {
                Polarity::Undefined
            };
            for rho in chain {
                pol = pol.combine(threshold_polarity(rho.cmp, &rho.threshold, p));
            }
            pol.combine(polarity(body, p))
        }
        Formula::Not(a) => polarity(a, p).flip(),
        Formula::And(a, b) | Formula::Or(a, b) => polarity(a, p).combine(polarity(b, p)),
        Formula::Implies(a, b) => polarity(a, p).flip().combine(polarity(b, p)),
        Formula::Until { bound, lhs, rhs } => {
            let b = if bound_polarity(bound, p) == Polarity::Undefined {
                Polarity::Undefined
            } else {
                Polarity::Mixed
            };
            b.combine(polarity(lhs, p)).combine(polarity(rhs, p))
        }
        Formula::Eventually { bound, body } => bound_polarity(bound, p).combine(polarity(body, p)),
        Formula::Always { bound, body } => bound_polarity(bound, p)
            .flip()
            .combine(polarity(body, p)),
    }
}

/// Number of Boolean connectives; `->` counts as one (its `!a | b` form), paired time bounds
/// count as zero.
pub fn formula_size(f: &Formula) -> usize {
    connective_count(f, true)
}

/// [`formula_size`] with a switch for whether `->` contributes.
pub fn connective_count(f: &Formula, count_implies: bool) -> usize {
    let rec = |g: &Formula| connective_count(g, count_implies);
    match f {
        Formula::True | Formula::False | Formula::Atom(_) => 0,
        Formula::Exists { body, .. } | Formula::Not(body) => rec(body),
        Formula::And(a, b) | Formula::Or(a, b) => 1 + rec(a) + rec(b),
        Formula::Implies(a, b) => usize::from(count_implies) + rec(a) + rec(b),
        Formula::Until { lhs, rhs, .. } => rec(lhs) + rec(rhs),
        Formula::Eventually { body, .. } | Formula::Always { body, .. } => rec(body),
    }
}

/// Fragment membership flags. They are independent; any combination is possible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Subtype {
    /// Neighbor quantifiers are applied only to atoms.
    pub type_i: bool,
    /// One outer neighbor quantifier around a quantifier-free temporal body.
    pub type_ii: bool,
    /// Satisfaction is witnessed by a finite prefix.
    pub cosafe: bool,
    /// Violation is witnessed by a finite prefix.
    pub safe: bool,
}

pub fn subtype(f: &Formula) -> Subtype {
    Subtype {
        type_i: type_i(f),
        type_ii: matches!(f, Formula::Exists { body, .. } if !has_exists(body)),
        cosafe: in_fragment(f, Fragment::CoSafe, false),
        safe: in_fragment(f, Fragment::Safe, false),
    }
}

fn type_i(f: &Formula) -> bool {
    match f {
        Formula::True | Formula::False | Formula::Atom(_) => true,
        Formula::Exists { body, .. } => matches!(**body, Formula::Atom(_)),
        Formula::Not(a) => type_i(a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => type_i(a) && type_i(b),
        Formula::Until { lhs, rhs, .. } => type_i(lhs) && type_i(rhs),
        Formula::Eventually { body, .. } | Formula::Always { body, .. } => type_i(body),
    }
}

pub(crate) fn has_exists(f: &Formula) -> bool {
    match f {
        Formula::True | Formula::False | Formula::Atom(_) => false,
        Formula::Exists { .. } => true,
        Formula::Not(a) | Formula::Eventually { body: a, .. } | Formula::Always { body: a, .. } => {
            has_exists(a)
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            has_exists(a) || has_exists(b)
        }
        Formula::Until { lhs, rhs, .. } => has_exists(lhs) || has_exists(rhs),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fragment {
    CoSafe,
    Safe,
}

/// Membership of `f` (negated when `neg`) after pushing negations inward.
fn in_fragment(f: &Formula, frag: Fragment, neg: bool) -> bool {
    // After negation push-through, an eventually becomes an always and vice versa.
    let eventually_ok = |bound: &TimeBound| match frag {
        Fragment::CoSafe => true,
        Fragment::Safe => matches!(bound, TimeBound::AtMost(_)),
    };
    let always_ok = |bound: &TimeBound| match frag {
        Fragment::CoSafe => matches!(bound, TimeBound::AtMost(_)),
        Fragment::Safe => true,
    };
    match f {
        Formula::True | Formula::False | Formula::Atom(_) => true,
        Formula::Exists { body, .. } => {
            if matches!(**body, Formula::Atom(_)) {
                true
            } else {
                !neg && in_fragment(body, frag, false)
            }
        }
        Formula::Not(a) => in_fragment(a, frag, !neg),
        Formula::And(a, b) | Formula::Or(a, b) => {
            in_fragment(a, frag, neg) && in_fragment(b, frag, neg)
        }
        Formula::Implies(a, b) => in_fragment(a, frag, !neg) && in_fragment(b, frag, neg),
        Formula::Until { bound, lhs, rhs } => {
            // The negation of until is a release, which neither grammar admits.
            let bound_ok = match frag {
                Fragment::CoSafe => true,
                Fragment::Safe => matches!(bound, TimeBound::AtMost(_)),
            };
            !neg && bound_ok && in_fragment(lhs, frag, false) && in_fragment(rhs, frag, false)
        }
        Formula::Eventually { bound, body } => {
            let ok = if neg {
                always_ok(bound)
            } else {
                eventually_ok(bound)
            };
            ok && in_fragment(body, frag, neg)
        }
        Formula::Always { bound, body } => {
            let ok = if neg {
                eventually_ok(bound)
            } else {
                always_ok(bound)
            };
            ok && in_fragment(body, frag, neg)
        }
    }
}
