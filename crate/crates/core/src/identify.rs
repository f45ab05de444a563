//! Information-guided parameter identification over a monotone parameter space.
//!
//! Parameters are mapped into `[0, 1]^z` so that larger coordinates always make the formula
//! easier to satisfy. The coverage constraint is then an up-closed region; the search brackets
//! its minimal points between known satisfying points (the front) and the knee points of the
//! known violating region, querying halfway across the widest remaining gap.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::formula::{polarity, Formula, ParamKind, ParameterBox, ParameterValuation, Polarity};
use crate::graph::Trajectory;
use crate::prob::{compute_ig, PriorModel};
use crate::{Error, Result};

/// Default coverage threshold.
pub const DEFAULT_P_TH: f64 = 0.98;
/// Default approximation tolerance.
pub const DEFAULT_EPSILON: f64 = 0.05;
/// Default cap on coverage evaluations per template.
pub const DEFAULT_BUDGET: usize = 500;
/// Queries answered from the cache are free, but the loop still stops after this many
/// queries per unit of budget.
const QUERY_CAP_FACTOR: usize = 20;

/// Affine map between a parameter box and the unit cube, oriented by polarity.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pbox: ParameterBox,
    polarities: Vec<Polarity>,
    /// Box indices of non-degenerate parameters, one cube coordinate each.
    free: Vec<usize>,
}

impl Normalization {
    /// Fails when a parameter of non-zero width has neither `+` nor `-` polarity.
    pub fn new(pbox: ParameterBox, polarities: Vec<Polarity>) -> Result<Self> {
        if polarities.len() != pbox.len() {
            return Err(Error::InvalidBox("one polarity per parameter is required".into()));
        }
        let mut free = Vec::new();
        for (i, (r, p)) in pbox.ranges().iter().zip(&polarities).enumerate() {
            if r.width() == 0.0 {
                continue;
            }
            if !matches!(p, Polarity::Positive | Polarity::Negative) {
                return Err(Error::BadPolarity {
                    name: r.name.clone(),
                    polarity: *p,
                });
            }
            free.push(i);
        }
        Ok(Self {
            pbox,
            polarities,
            free,
        })
    }

    /// Normalization for `template`, with polarities computed from its syntax.
    pub fn for_template(template: &Formula, pbox: ParameterBox) -> Result<Self> {
        let pols = pbox
            .ranges()
            .iter()
            .map(|r| polarity(template, &r.name))
            .collect();
        Self::new(pbox, pols)
    }

    pub fn dims(&self) -> usize {
        self.free.len()
    }

    pub fn parameter_box(&self) -> &ParameterBox {
        &self.pbox
    }

    pub fn polarities(&self) -> &[Polarity] {
        &self.polarities
    }

    /// Names of the cube coordinates in order.
    pub fn coordinate_names(&self) -> Vec<&str> {
        self.free
            .iter()
            .map(|&i| self.pbox.ranges()[i].name.as_str())
            .collect()
    }

    /// Grid step of each cube coordinate: `1 / (max - min)` for integer parameters, 0 for
    /// continuous ones.
    pub fn resolution(&self) -> Vec<f64> {
        self.free
            .iter()
            .map(|&i| {
                let r = &self.pbox.ranges()[i];
                match r.kind {
                    ParamKind::Integer => 1.0 / r.width(),
                    ParamKind::Continuous => 0.0,
                }
            })
            .collect()
    }

    /// `Π(θ)`.
    pub fn map(&self, theta: &ParameterValuation) -> Result<Vec<f64>> {
        self.free
            .iter()
            .map(|&i| {
                let r = &self.pbox.ranges()[i];
                let t = theta
                    .get(&r.name)
                    .ok_or_else(|| Error::MissingParameter(r.name.clone()))?;
                let w = (t - r.min) / r.width();
                Ok(match self.polarities[i] {
                    Polarity::Negative => 1.0 - w,
                    _ => w,
                })
            })
            .collect()
    }

    /// `Π⁻¹(ω)`, clamped into the box, with integer parameters snapped to the nearest integer.
    pub fn inverse(&self, omega: &[f64]) -> ParameterValuation {
        let mut theta = ParameterValuation::new();
        for (i, r) in self.pbox.ranges().iter().enumerate() {
            let value = match self.free.iter().position(|&f| f == i) {
                None => r.min,
                Some(j) => {
                    let w = omega[j].clamp(0.0, 1.0);
                    let w = match self.polarities[i] {
                        Polarity::Negative => 1.0 - w,
                        _ => w,
                    };
                    r.min + w * r.width()
                }
            };
            theta.insert(r.name.clone(), r.snap(value));
        }
        theta
    }
}

/// `Π(θ)` for an explicit polarity list.
pub fn map_pi(
    theta: &ParameterValuation,
    pbox: &ParameterBox,
    polarities: &[Polarity],
) -> Result<Vec<f64>> {
    Normalization::new(pbox.clone(), polarities.to_vec())?.map(theta)
}

/// `Π⁻¹(ω)` for an explicit polarity list.
pub fn map_pi_inv(
    omega: &[f64],
    pbox: &ParameterBox,
    polarities: &[Polarity],
) -> Result<ParameterValuation> {
    let n = Normalization::new(pbox.clone(), polarities.to_vec())?;
    if omega.len() != n.dims() {
        return Err(Error::InvalidBox(format!(
            "point has {} coordinates, the box has {} free parameters",
            omega.len(),
            n.dims()
        )));
    }
    Ok(n.inverse(omega))
}

/// `max_{s in S} min_{s' in S'} max_i (s_i - s'_i)^+`.
pub fn directed_hausdorff(s: &[Vec<f64>], s_prime: &[Vec<f64>]) -> Result<f64> {
    if s.is_empty() || s_prime.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(s.iter()
        .map(|a| {
            s_prime
                .iter()
                .map(|b| {
                    a.iter()
                        .zip(b)
                        .map(|(x, y)| (x - y).max(0.0))
                        .fold(0.0, f64::max)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max))
}

/// How far `front` still lies above `knee`: `min_f max_i (f_i - k_i)^+`. This is the directed
/// distance of the reflected cube, where the unexplored band between the two sets shows up.
///
/// `resolution[i]` is the grid step of coordinate `i` (0 for continuous ones, and a missing
/// entry counts as 0). A coordinate whose remaining interval fits within one step cannot be
/// refined further and contributes nothing.
pub fn knee_gap(knee: &[f64], front: &[Vec<f64>], resolution: &[f64]) -> f64 {
    front
        .iter()
        .map(|f| {
            f.iter()
                .zip(knee)
                .enumerate()
                .map(|(i, (a, b))| {
                    let d = (a - b).max(0.0);
                    let step = resolution.get(i).copied().unwrap_or(0.0);
                    if d <= step * (1.0 + 1e-9) {
                        0.0
                    } else {
                        d
                    }
                })
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Largest [`knee_gap`] over `knees`.
pub fn front_gap(knees: &[Vec<f64>], front: &[Vec<f64>], resolution: &[f64]) -> f64 {
    knees
        .iter()
        .map(|k| knee_gap(k, front, resolution))
        .fold(0.0, f64::max)
}

fn dominates_weakly(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Minimal points of `points` under the componentwise order, deduplicated and sorted.
pub fn minimal_points(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for p in points {
        if out.iter().any(|q| dominates_weakly(q, p)) {
            continue;
        }
        out.retain(|q| !dominates_weakly(p, q));
        out.push(p.clone());
    }
    out.sort_by(|a, b| lex(a, b));
    out
}

fn lex(a: &[f64], b: &[f64]) -> core::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            core::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    core::cmp::Ordering::Equal
}

/// Knee points of the down-closure of `unsat` in `[0, 1]^z`: the minimal points of the closure
/// of its complement. Subtracting any positive amount from any coordinate of a knee lands
/// strictly inside the violating region. A coordinate equal to 1 cannot be exceeded, so it
/// never bounds a knee. With no violating points the only knee is the origin.
pub fn knee_points(unsat: &[Vec<f64>], dims: usize) -> Vec<Vec<f64>> {
    let mut knees = vec![vec![0.0; dims]];
    for m in unsat {
        let (kept, added) = add_unsat(&knees, m);
        let mut next: Vec<Vec<f64>> = kept.into_iter().map(|i| knees[i].clone()).collect();
        next.extend(added);
        knees = next;
    }
    knees.sort_by(|a, b| lex(a, b));
    knees
}

/// Knee update after `m` joins the violating region: indices of knees that stay, and the new
/// knees replacing those strictly below `m`. Survivors stay minimal, so only the new ones
/// are filtered.
fn add_unsat(knees: &[Vec<f64>], m: &[f64]) -> (Vec<usize>, Vec<Vec<f64>>) {
    let below = |k: &[f64]| k.iter().zip(m).all(|(a, b)| *b >= 1.0 || a < b);
    let mut kept = Vec::new();
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    for (i, k) in knees.iter().enumerate() {
        if !below(k) {
            kept.push(i);
            continue;
        }
        for j in 0..m.len() {
            if m[j] >= 1.0 {
                continue;
            }
            let mut c = k.clone();
            c[j] = m[j];
            candidates.push(c);
        }
    }
    let mut added = minimal_points(&candidates);
    added.retain(|c| !kept.iter().any(|&i| dominates_weakly(&knees[i], c)));
    (kept, added)
}

/// One coverage query.
#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub omega: Vec<f64>,
    pub theta: ParameterValuation,
    pub coverage: f64,
    pub satisfied: bool,
    /// Answered from an earlier evaluation of the same snapped valuation.
    pub cached: bool,
}

/// A point of the explored minimal satisfying front and its information gain.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontPoint {
    /// Query coordinates.
    pub omega: Vec<f64>,
    /// Snapped valuation actually evaluated.
    pub theta: ParameterValuation,
    pub coverage: f64,
    pub average_ig: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentifyConfig {
    pub p_th: f64,
    pub epsilon: f64,
    pub budget: usize,
}

impl Default for IdentifyConfig {
    fn default() -> Self {
        Self {
            p_th: DEFAULT_P_TH,
            epsilon: DEFAULT_EPSILON,
            budget: DEFAULT_BUDGET,
        }
    }
}

impl IdentifyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_th > 0.0 && self.p_th <= 1.0) {
            return Err(Error::InvalidConfig(format!("p_th = {} outside (0, 1]", self.p_th)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon = {} outside (0, 1)",
                self.epsilon
            )));
        }
        if self.budget < 2 {
            return Err(Error::InvalidConfig("budget must allow at least 2 queries".into()));
        }
        Ok(())
    }
}

/// Outcome of identification for one template.
#[derive(Debug, Clone, PartialEq)]
pub struct Identification {
    pub template: Formula,
    pub coordinate_names: Vec<String>,
    /// False when even the easiest corner violates the coverage constraint.
    pub feasible: bool,
    /// Best instantiated formula, its valuation, cube point, coverage and average gain.
    pub best: Option<(Formula, FrontPoint)>,
    pub front: Vec<FrontPoint>,
    pub knees: Vec<Vec<f64>>,
    /// Remaining gap between knees and front when the search stopped.
    pub gap: f64,
    /// The budget ran out before the gap reached epsilon.
    pub approximate: bool,
    /// Number of coverage evaluations (cache hits excluded).
    pub evaluations: usize,
    pub queries: Vec<Query>,
}

/// Runs the search for one template. `coverage` evaluates an instantiated formula on the data;
/// `gain` returns its average information gain under the prior.
pub fn identify_with(
    template: &Formula,
    pbox: &ParameterBox,
    config: &IdentifyConfig,
    coverage: &mut dyn FnMut(&Formula) -> Result<f64>,
    gain: &mut dyn FnMut(&Formula) -> Result<f64>,
) -> Result<Identification> {
    config.validate()?;
    let pbox = ParameterBox::for_formula(template, pbox.ranges().to_vec())?;
    let norm = Normalization::for_template(template, pbox)?;
    let dims = norm.dims();
    let resolution = norm.resolution();
    let mut search = Search {
        template,
        norm: &norm,
        config,
        coverage,
        cache: BTreeMap::new(),
        queries: Vec::new(),
        evaluations: 0,
    };

    let mut sat: Vec<Vec<f64>> = Vec::new();
    let mut unsat: Vec<Vec<f64>> = Vec::new();
    let top = vec![1.0; dims];
    if !search.query(&top)? {
        let knees = knee_points(&[top], dims);
        return Ok(search.finish(Vec::new(), knees, 1.0, false, false, gain));
    }
    sat.push(top);
    let bottom = vec![0.0; dims];
    if dims > 0 {
        if search.query(&bottom)? {
            sat.push(bottom);
        } else {
            unsat.push(bottom);
        }
    }
    let mut front = minimal_points(&sat);
    let mut knees = if front.iter().any(|f| f.iter().all(|x| *x == 0.0)) {
        front.clone()
    } else {
        knee_points(&unsat, dims)
    };
    // gap of every knee to the current front, kept in step with `knees`
    let mut gaps: Vec<f64> = knees.iter().map(|k| knee_gap(k, &front, &resolution)).collect();
    let mut approximate = false;
    let query_cap = config.budget.saturating_mul(QUERY_CAP_FACTOR);
    loop {
        // widest gap first, ties to the lexicographically smallest knee
        let mut pick = 0;
        for i in 1..knees.len() {
            let better = gaps[i] > gaps[pick]
                || (gaps[i] == gaps[pick] && lex(&knees[i], &knees[pick]).is_lt());
            if better {
                pick = i;
            }
        }
        let r = gaps[pick];
        if r <= config.epsilon {
            break;
        }
        if search.evaluations >= config.budget || search.queries.len() >= query_cap {
            approximate = true;
            break;
        }
        let q: Vec<f64> = knees[pick].iter().map(|x| (x + r / 2.0).min(1.0)).collect();
        let inside_sat = sat.iter().any(|s| dominates_weakly(s, &q));
        let inside_unsat = unsat.iter().any(|u| dominates_weakly(&q, u));
        if inside_sat || inside_unsat {
            // only reachable through floating-point ties; nothing left to learn here
            log::warn!("query point already classified; stopping the search");
            approximate = true;
            break;
        }
        if search.query(&q)? {
            for (k, g) in knees.iter().zip(gaps.iter_mut()) {
                *g = g.min(knee_gap(k, core::slice::from_ref(&q), &resolution));
            }
            front.retain(|f| !dominates_weakly(&q, f));
            front.push(q.clone());
            sat.push(q);
        } else {
            let (kept, added) = add_unsat(&knees, &q);
            let mut next_knees = Vec::with_capacity(kept.len() + added.len());
            let mut next_gaps = Vec::with_capacity(kept.len() + added.len());
            for i in kept {
                next_knees.push(core::mem::take(&mut knees[i]));
                next_gaps.push(gaps[i]);
            }
            for k in added {
                next_gaps.push(knee_gap(&k, &front, &resolution));
                next_knees.push(k);
            }
            knees = next_knees;
            gaps = next_gaps;
            unsat.push(q);
        }
    }
    front.sort_by(|a, b| lex(a, b));
    knees.sort_by(|a, b| lex(a, b));
    let gap = front_gap(&knees, &front, &resolution);
    Ok(search.finish(front, knees, gap, true, approximate, gain))
}

struct Search<'a> {
    template: &'a Formula,
    norm: &'a Normalization,
    config: &'a IdentifyConfig,
    coverage: &'a mut dyn FnMut(&Formula) -> Result<f64>,
    cache: BTreeMap<Vec<u64>, f64>,
    queries: Vec<Query>,
    evaluations: usize,
}

impl Search<'_> {
    fn valuation(&self, omega: &[f64]) -> (ParameterValuation, Vec<u64>) {
        let theta = self.norm.inverse(omega);
        let key = theta.iter().map(|(_, v)| v.to_bits()).collect();
        (theta, key)
    }

    fn query(&mut self, omega: &[f64]) -> Result<bool> {
        let (theta, key) = self.valuation(omega);
        let (cov, cached) = match self.cache.get(&key) {
            Some(&c) => (c, true),
            None => {
                let f = self.template.instantiate(&theta)?;
                let c = (self.coverage)(&f)?;
                self.evaluations += 1;
                self.cache.insert(key, c);
                (c, false)
            }
        };
        let satisfied = cov >= self.config.p_th;
        self.queries.push(Query {
            omega: omega.to_vec(),
            theta,
            coverage: cov,
            satisfied,
            cached,
        });
        Ok(satisfied)
    }

    fn finish(
        self,
        front: Vec<Vec<f64>>,
        knees: Vec<Vec<f64>>,
        gap: f64,
        feasible: bool,
        approximate: bool,
        gain: &mut dyn FnMut(&Formula) -> Result<f64>,
    ) -> Identification {
        let mut points = Vec::new();
        let mut best: Option<(Formula, FrontPoint)> = None;
        let mut failure = None;
        for omega in &front {
            let (theta, key) = self.valuation(omega);
            let coverage = self.cache.get(&key).copied().unwrap_or(f64::NAN);
            let eval = self
                .template
                .instantiate(&theta)
                .and_then(|f| gain(&f).map(|g| (f, g)));
            let (formula, average_ig) = match eval {
                Ok(x) => x,
                Err(e) => {
                    failure.get_or_insert(e);
                    continue;
                }
            };
            let point = FrontPoint {
                omega: omega.clone(),
                theta,
                coverage,
                average_ig,
            };
            // front is sorted, so strict improvement keeps the lexicographically first tie
            if best.as_ref().is_none_or(|(_, b)| average_ig > b.average_ig) {
                best = Some((formula, point.clone()));
            }
            points.push(point);
        }
        if let Some(e) = failure {
            log::warn!("information gain failed on part of the front: {e}");
        }
        Identification {
            template: self.template.clone(),
            coordinate_names: self
                .norm
                .coordinate_names()
                .into_iter()
                .map(String::from)
                .collect(),
            feasible,
            best,
            front: points,
            knees,
            gap,
            approximate,
            evaluations: self.evaluations,
            queries: self.queries,
        }
    }
}

/// Identification against a trajectory set and a prior.
pub fn identify(
    set: &[Trajectory],
    prior: &PriorModel,
    template: &Formula,
    pbox: &ParameterBox,
    config: &IdentifyConfig,
) -> Result<Identification> {
    if set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !set[0].graph().same_structure(prior.graph()) {
        return Err(Error::GraphMismatch);
    }
    identify_with(
        template,
        pbox,
        config,
        &mut |f| crate::eval::coverage(set, f),
        &mut |f| compute_ig(prior, f, None).map(|r| r.average),
    )
}
