//! Parametric graph temporal logic formulas.
//!
//! A [`Formula`] may carry named parameters (`?name` in the text syntax) in threshold, count and
//! time-bound positions. Instantiating it with a [`ParameterValuation`] yields a parameter-free
//! formula that can be evaluated.

mod analysis;
mod display;
mod parse;

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

pub use analysis::{formula_size, polarity, subtype, Polarity, Subtype};
pub use parse::parse;

use crate::graph::{Comparison, EdgeProposition, NodeProposition};
use crate::{Error, Result};

/// A literal or a named parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum Value<T> {
    Lit(T),
    Param(String),
}

impl<T: Copy> Value<T> {
    pub fn literal(&self) -> Option<T> {
        match self {
            Value::Lit(v) => Some(*v),
            Value::Param(_) => None,
        }
    }

    pub fn param(&self) -> Option<&str> {
        match self {
            Value::Lit(_) => None,
            Value::Param(p) => Some(p),
        }
    }

    fn ground(&self) -> Result<T> {
        match self {
            Value::Lit(v) => Ok(*v),
            Value::Param(p) => Err(Error::Parameterized(p.clone())),
        }
    }
}

/// Node threshold atom `x <= c` / `x >= c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub cmp: Comparison,
    pub threshold: Value<f64>,
}

impl Atom {
    pub fn proposition(&self) -> Result<NodeProposition> {
        Ok(NodeProposition::new(self.cmp, self.threshold.ground()?))
    }
}

/// Edge threshold atom `y <= c` / `y >= c` used in neighbor chains.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeAtom {
    pub cmp: Comparison,
    pub threshold: Value<f64>,
}

impl EdgeAtom {
    pub fn proposition(&self) -> Result<EdgeProposition> {
        Ok(EdgeProposition::new(self.cmp, self.threshold.ground()?))
    }
}

/// Time bound of a temporal operator. `Window(lo, hi)` stands for the conjunction of the
/// `AtLeast(lo)` and `AtMost(hi)` forms of the same operator.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeBound {
    Unbounded,
    AtLeast(Value<u32>),
    AtMost(Value<u32>),
    Window(Value<u32>, Value<u32>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    /// At least `count` distinct nodes reached through `chain` (first element applied first)
    /// satisfy `body`.
    Exists {
        count: Value<u32>,
        chain: Vec<EdgeAtom>,
        body: Box<Formula>,
    },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Until {
        bound: TimeBound,
        lhs: Box<Formula>,
        rhs: Box<Formula>,
    },
    Eventually {
        bound: TimeBound,
        body: Box<Formula>,
    },
    Always {
        bound: TimeBound,
        body: Box<Formula>,
    },
}

impl Formula {
    pub fn atom(cmp: Comparison, threshold: f64) -> Self {
        Formula::Atom(Atom {
            cmp,
            threshold: Value::Lit(threshold),
        })
    }

    pub fn exists(count: u32, chain: &[EdgeProposition], body: Formula) -> Self {
        Formula::Exists {
            count: Value::Lit(count),
            chain: chain
                .iter()
                .map(|r| EdgeAtom {
                    cmp: r.cmp,
                    threshold: Value::Lit(r.threshold),
                })
                .collect(),
            body: Box::new(body),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, other: Formula) -> Self {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula) -> Self {
        Formula::Or(Box::new(self), Box::new(other))
    }

    pub fn implies(self, other: Formula) -> Self {
        Formula::Implies(Box::new(self), Box::new(other))
    }

    pub fn eventually(bound: TimeBound, body: Formula) -> Self {
        Formula::Eventually {
            bound,
            body: Box::new(body),
        }
    }

    pub fn always(bound: TimeBound, body: Formula) -> Self {
        Formula::Always {
            bound,
            body: Box::new(body),
        }
    }

    pub fn until(bound: TimeBound, lhs: Formula, rhs: Formula) -> Self {
        Formula::Until {
            bound,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    /// Parameters in textual order together with the kind of position they occupy.
    pub fn params(&self) -> Vec<(String, ParamKind)> {
        let mut out = Vec::new();
        self.visit_values(&mut |name, kind| out.push((String::from(name), kind)));
        out
    }

    pub fn param_names(&self) -> BTreeSet<String> {
        self.params().into_iter().map(|(n, _)| n).collect()
    }

    pub fn is_parameter_free(&self) -> bool {
        self.params().is_empty()
    }

    /// Fails if some parameter occupies more than one position.
    pub fn check_unique_params(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (name, _) in self.params() {
            if !seen.insert(name.clone()) {
                return Err(Error::DuplicateParameter(name));
            }
        }
        Ok(())
    }

    fn visit_values(&self, f: &mut dyn FnMut(&str, ParamKind)) {
        fn bound(b: &TimeBound, f: &mut dyn FnMut(&str, ParamKind)) {
            let mut int = |v: &Value<u32>| {
                if let Value::Param(p) = v {
                    f(p, ParamKind::Integer)
                }
            };
            match b {
                TimeBound::Unbounded => {}
                TimeBound::AtLeast(v) | TimeBound::AtMost(v) => int(v),
                TimeBound::Window(lo, hi) => {
                    int(lo);
                    int(hi);
                }
            }
        }
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                if let Value::Param(p) = &a.threshold {
                    f(p, ParamKind::Continuous)
                }
            }
            Formula::Exists { count, chain, body } => {
                if let Value::Param(p) = count {
                    f(p, ParamKind::Integer)
                }
                for rho in chain {
                    if let Value::Param(p) = &rho.threshold {
                        f(p, ParamKind::Continuous)
                    }
                }
                body.visit_values(f);
            }
            Formula::Not(a) => a.visit_values(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit_values(f);
                b.visit_values(f);
            }
            Formula::Until {
                bound: bd,
                lhs,
                rhs,
            } => {
                lhs.visit_values(f);
                bound(bd, f);
                rhs.visit_values(f);
            }
            Formula::Eventually { bound: bd, body } | Formula::Always { bound: bd, body } => {
                bound(bd, f);
                body.visit_values(f);
            }
        }
    }

    /// Replaces every parameter by its value. Integer positions require integral, non-negative
    /// values.
    pub fn instantiate(&self, theta: &ParameterValuation) -> Result<Formula> {
        self.map_values(
            &mut |name| {
                theta
                    .get(name)
                    .ok_or_else(|| Error::MissingParameter(String::from(name)))
            },
            false,
        )
    }

    /// Like [`Formula::instantiate`] but leaves parameters without a value in place.
    pub fn instantiate_partial(&self, theta: &ParameterValuation) -> Result<Formula> {
        self.map_values(&mut |name| theta.get(name).ok_or(Error::EmptySet), true)
    }

    fn map_values(
        &self,
        lookup: &mut dyn FnMut(&str) -> Result<f64>,
        partial: bool,
    ) -> Result<Formula> {
        fn real(
            v: &Value<f64>,
            lookup: &mut dyn FnMut(&str) -> Result<f64>,
            partial: bool,
        ) -> Result<Value<f64>> {
            match v {
                Value::Lit(c) => Ok(Value::Lit(*c)),
                Value::Param(p) => match lookup(p) {
                    Ok(c) if c.is_finite() => Ok(Value::Lit(c)),
                    Ok(c) => Err(Error::NonIntegral {
                        name: p.clone(),
                        value: c,
                    }),
                    Err(_) if partial => Ok(v.clone()),
                    Err(e) => Err(e),
                },
            }
        }
        fn int(
            v: &Value<u32>,
            lookup: &mut dyn FnMut(&str) -> Result<f64>,
            partial: bool,
        ) -> Result<Value<u32>> {
            match v {
                Value::Lit(c) => Ok(Value::Lit(*c)),
                Value::Param(p) => match lookup(p) {
                    Ok(c) => {
                        if c.is_finite() && c >= 0.0 && c == libm::floor(c) && c <= u32::MAX as f64
                        {
                            Ok(Value::Lit(c as u32))
                        } else {
                            Err(Error::NonIntegral {
                                name: p.clone(),
                                value: c,
                            })
                        }
                    }
                    Err(_) if partial => Ok(v.clone()),
                    Err(e) => Err(e),
                },
            }
        }
        fn bound(
            b: &TimeBound,
            lookup: &mut dyn FnMut(&str) -> Result<f64>,
            partial: bool,
        ) -> Result<TimeBound> {
            Ok(match b {
                TimeBound::Unbounded => TimeBound::Unbounded,
                TimeBound::AtLeast(v) => TimeBound::AtLeast(int(v, lookup, partial)?),
                TimeBound::AtMost(v) => TimeBound::AtMost(int(v, lookup, partial)?),
                TimeBound::Window(lo, hi) => {
                    TimeBound::Window(int(lo, lookup, partial)?, int(hi, lookup, partial)?)
                }
            })
        }
        let rec = |f: &Formula, lookup: &mut dyn FnMut(&str) -> Result<f64>| {
            f.map_values(lookup, partial).map(Box::new)
        };
        Ok(match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(a) => Formula::Atom(Atom {
                cmp: a.cmp,
                threshold: real(&a.threshold, lookup, partial)?,
            }),
            Formula::Exists { count, chain, body } => Formula::Exists {
                count: int(count, lookup, partial)?,
                chain: chain
                    .iter()
                    .map(|r| {
                        Ok(EdgeAtom {
                            cmp: r.cmp,
                            threshold: real(&r.threshold, lookup, partial)?,
                        })
                    })
                    .collect::<Result<_>>()?,
                body: rec(body, lookup)?,
            },
            Formula::Not(a) => Formula::Not(rec(a, lookup)?),
            Formula::And(a, b) => Formula::And(rec(a, lookup)?, rec(b, lookup)?),
            Formula::Or(a, b) => Formula::Or(rec(a, lookup)?, rec(b, lookup)?),
            Formula::Implies(a, b) => Formula::Implies(rec(a, lookup)?, rec(b, lookup)?),
            Formula::Until {
                bound: bd,
                lhs,
                rhs,
            } => Formula::Until {
                lhs: rec(lhs, lookup)?,
                bound: bound(bd, lookup, partial)?,
                rhs: rec(rhs, lookup)?,
            },
            Formula::Eventually { bound: bd, body } => Formula::Eventually {
                bound: bound(bd, lookup, partial)?,
                body: rec(body, lookup)?,
            },
            Formula::Always { bound: bd, body } => Formula::Always {
                bound: bound(bd, lookup, partial)?,
                body: rec(body, lookup)?,
            },
        })
    }

    /// Renames every parameter through `rename`.
    pub fn rename_params(&self, rename: &dyn Fn(&str) -> String) -> Formula {
        fn val<T: Clone>(v: &Value<T>, rename: &dyn Fn(&str) -> String) -> Value<T> {
            match v {
                Value::Lit(c) => Value::Lit(c.clone()),
                Value::Param(p) => Value::Param(rename(p)),
            }
        }
        fn bound(b: &TimeBound, rename: &dyn Fn(&str) -> String) -> TimeBound {
            match b {
                TimeBound::Unbounded => TimeBound::Unbounded,
                TimeBound::AtLeast(v) => TimeBound::AtLeast(val(v, rename)),
                TimeBound::AtMost(v) => TimeBound::AtMost(val(v, rename)),
                TimeBound::Window(a, b) => TimeBound::Window(val(a, rename), val(b, rename)),
            }
        }
        let rec = |f: &Formula| Box::new(f.rename_params(rename));
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(a) => Formula::Atom(Atom {
                cmp: a.cmp,
                threshold: val(&a.threshold, rename),
            }),
            Formula::Exists { count, chain, body } => Formula::Exists {
                count: val(count, rename),
                chain: chain
                    .iter()
                    .map(|r| EdgeAtom {
                        cmp: r.cmp,
                        threshold: val(&r.threshold, rename),
                    })
                    .collect(),
                body: rec(body),
            },
            Formula::Not(a) => Formula::Not(rec(a)),
            Formula::And(a, b) => Formula::And(rec(a), rec(b)),
            Formula::Or(a, b) => Formula::Or(rec(a), rec(b)),
            Formula::Implies(a, b) => Formula::Implies(rec(a), rec(b)),
            Formula::Until {
                bound: bd,
                lhs,
                rhs,
            } => Formula::Until {
                bound: bound(bd, rename),
                lhs: rec(lhs),
                rhs: rec(rhs),
            },
            Formula::Eventually { bound: bd, body } => Formula::Eventually {
                bound: bound(bd, rename),
                body: rec(body),
            },
            Formula::Always { bound: bd, body } => Formula::Always {
                bound: bound(bd, rename),
                body: rec(body),
            },
        }
    }

    /// Largest literal time bound appearing anywhere in the formula.
    pub fn max_time_bound(&self) -> u32 {
        fn b(bd: &TimeBound) -> u32 {
            let l = |v: &Value<u32>| v.literal().unwrap_or(0);
            match bd {
                TimeBound::Unbounded => 0,
                TimeBound::AtLeast(v) | TimeBound::AtMost(v) => l(v),
                TimeBound::Window(lo, hi) => l(lo).max(l(hi)),
            }
        }
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0,
            Formula::Exists { body, .. } | Formula::Not(body) => body.max_time_bound(),
            Formula::And(a, c) | Formula::Or(a, c) | Formula::Implies(a, c) => {
                a.max_time_bound().max(c.max_time_bound())
            }
            Formula::Until { bound, lhs, rhs } => b(bound)
                .max(lhs.max_time_bound())
                .max(rhs.max_time_bound()),
            Formula::Eventually { bound, body } | Formula::Always { bound, body } => {
                b(bound).max(body.max_time_bound())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParamKind {
    Continuous,
    Integer,
}

/// Assignment of real values to parameter names.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParameterValuation(BTreeMap<String, f64>);

impl ParameterValuation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: f64) -> Option<f64> {
        self.0.insert(name.into(), value)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<(S, f64)> for ParameterValuation {
    fn from_iter<I: IntoIterator<Item = (S, f64)>>(iter: I) -> Self {
        Self(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

/// Admissible range of one parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamRange {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub kind: ParamKind,
}

impl ParamRange {
    pub fn continuous(name: impl Into<String>, min: f64, max: f64) -> Self {
        Self {
            name: name.into(),
            min,
            max,
            kind: ParamKind::Continuous,
        }
    }

    pub fn integer(name: impl Into<String>, min: f64, max: f64) -> Self {
        Self {
            name: name.into(),
            min,
            max,
            kind: ParamKind::Integer,
        }
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    /// Clamps into the range and rounds integer kinds to the nearest admissible integer.
    pub fn snap(&self, value: f64) -> f64 {
        let v = value.clamp(self.min, self.max);
        match self.kind {
            ParamKind::Continuous => v,
            ParamKind::Integer => libm::round(v).clamp(self.min, self.max),
        }
    }
}

/// Box of admissible parameter valuations, one range per parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterBox {
    ranges: Vec<ParamRange>,
}

impl ParameterBox {
    pub fn new(ranges: Vec<ParamRange>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for r in &ranges {
            if !seen.insert(r.name.clone()) {
                return Err(Error::InvalidBox(format!("`{}` listed twice", r.name)));
            }
            if !(r.min.is_finite() && r.max.is_finite()) || r.min > r.max {
                return Err(Error::InvalidBox(format!(
                    "`{}` has bounds [{}, {}]",
                    r.name, r.min, r.max
                )));
            }
            if r.kind == ParamKind::Integer
                && (r.min != libm::floor(r.min) || r.max != libm::floor(r.max) || r.min < 0.0)
            {
                return Err(Error::InvalidBox(format!(
                    "integer parameter `{}` needs non-negative integral bounds",
                    r.name
                )));
            }
        }
        Ok(Self { ranges })
    }

    /// Reorders and validates the box against the parameters of `formula`: every parameter
    /// needs a range, integer positions need integer ranges, and ranges follow the formula's
    /// textual parameter order.
    pub fn for_formula(formula: &Formula, ranges: Vec<ParamRange>) -> Result<Self> {
        formula.check_unique_params()?;
        let mut by_name: BTreeMap<String, ParamRange> =
            ranges.into_iter().map(|r| (r.name.clone(), r)).collect();
        let mut ordered = Vec::new();
        for (name, kind) in formula.params() {
            let mut r = by_name
                .remove(&name)
                .ok_or_else(|| Error::InvalidBox(format!("no range for parameter `{name}`")))?;
            if kind == ParamKind::Integer {
                r.kind = ParamKind::Integer;
            }
            ordered.push(r);
        }
        if let Some(extra) = by_name.keys().next() {
            return Err(Error::InvalidBox(format!(
                "range for `{extra}` which the formula does not use"
            )));
        }
        let b = Self::new(ordered)?;
        b.check_windows(formula)?;
        Ok(b)
    }

    /// Paired bounds `[>=?lo][<=?hi]` must keep `lo < hi` across the whole box.
    fn check_windows(&self, formula: &Formula) -> Result<()> {
        fn walk(f: &Formula, out: &mut Vec<(Value<u32>, Value<u32>)>) {
            match f {
                Formula::True | Formula::False | Formula::Atom(_) => {}
                Formula::Exists { body, .. } | Formula::Not(body) => walk(body, out),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Formula::Until { bound, lhs, rhs } => {
                    if let TimeBound::Window(a, b) = bound {
                        out.push((a.clone(), b.clone()));
                    }
                    walk(lhs, out);
                    walk(rhs, out);
                }
                Formula::Eventually { bound, body } | Formula::Always { bound, body } => {
                    if let TimeBound::Window(a, b) = bound {
                        out.push((a.clone(), b.clone()));
                    }
                    walk(body, out);
                }
            }
        }
        let mut windows = Vec::new();
        walk(formula, &mut windows);
        for (lo, hi) in windows {
            let lo_max = match &lo {
                Value::Lit(v) => *v as f64,
                Value::Param(p) => self.range(p).map(|r| r.max).unwrap_or(0.0),
            };
            let hi_min = match &hi {
                Value::Lit(v) => *v as f64,
                Value::Param(p) => self.range(p).map(|r| r.min).unwrap_or(0.0),
            };
            if lo_max >= hi_min {
                return Err(Error::InvalidBox(format!(
                    "window bound needs max(lower) < min(upper), got {lo_max} >= {hi_min}"
                )));
            }
        }
        Ok(())
    }

    pub fn ranges(&self) -> &[ParamRange] {
        &self.ranges
    }

    pub fn range(&self, name: &str) -> Option<&ParamRange> {
        self.ranges.iter().find(|r| r.name == name)
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    /// Builds a valuation from raw coordinates in box order, snapping integer kinds.
    pub fn valuation(&self, coords: &[f64]) -> ParameterValuation {
        self.ranges
            .iter()
            .zip(coords)
            .map(|(r, &c)| (r.name.clone(), r.snap(c)))
            .collect()
    }

    /// Concatenation of two boxes with disjoint names.
    pub fn concat(&self, other: &ParameterBox) -> Result<ParameterBox> {
        let mut ranges = self.ranges.clone();
        ranges.extend(other.ranges.iter().cloned());
        ParameterBox::new(ranges)
    }
}
