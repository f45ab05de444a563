//! Formula inference for two-class trajectory data: particle swarm search over each
//! template's box, then pruning and growing of Boolean combinations.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::{misclassification_rate, LabeledSet};
use crate::formula::{formula_size, Formula, ParamRange, ParameterBox, ParameterValuation};
use crate::templates::Template;
use crate::{Error, Result};

/// Classification threshold `m_th`.
pub const DEFAULT_M_TH: f64 = 0.02;
/// Size bound `η_th`.
pub const DEFAULT_ETA_TH: usize = 3;
/// Pruning threshold `m̂_th`.
pub const DEFAULT_M_HAT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct PsoConfig {
    pub swarm: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub seed: u64,
    /// Velocity limit as a fraction of each dimension's width.
    pub velocity_clamp: f64,
    /// Stop as soon as the best fitness is at or below this value.
    pub target: f64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            swarm: 40,
            iterations: 100,
            inertia: 0.7,
            cognitive: 1.5,
            social: 1.5,
            seed: 0,
            velocity_clamp: 0.5,
            target: 0.0,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swarm == 0 {
            return Err(Error::InvalidConfig("swarm size must be positive".into()));
        }
        if !(self.velocity_clamp > 0.0) {
            return Err(Error::InvalidConfig("velocity clamp must be positive".into()));
        }
        Ok(())
    }
}

/// Result of one swarm search.
#[derive(Debug, Clone, PartialEq)]
pub struct PsoOutcome {
    pub theta: ParameterValuation,
    pub fitness: f64,
    pub evaluations: usize,
}

/// Evaluates a batch of candidate valuations; one fitness per valuation, in order.
pub type BatchFitness<'a> = dyn FnMut(&[ParameterValuation]) -> Result<Vec<f64>> + 'a;

fn mix(seed: u64, salt: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Global-best swarm minimization over `pbox`. Each particle draws from its own random
/// stream, so results do not depend on how `fitness` schedules a batch. Particles listed in
/// `warm` start at those coordinates (box order); the rest start uniformly in the box.
pub fn pso_minimize(
    pbox: &ParameterBox,
    cfg: &PsoConfig,
    warm: &[Vec<f64>],
    fitness: &mut BatchFitness<'_>,
) -> Result<PsoOutcome> {
    cfg.validate()?;
    let ranges = pbox.ranges();
    let dims = ranges.len();
    let vmax: Vec<f64> = ranges.iter().map(|r| cfg.velocity_clamp * r.width()).collect();
    let mut rngs: Vec<ChaCha8Rng> = (0..cfg.swarm)
        .map(|i| {
            let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
            r.set_stream(i as u64);
            r
        })
        .collect();
    let mut pos: Vec<Vec<f64>> = Vec::with_capacity(cfg.swarm);
    let mut vel: Vec<Vec<f64>> = Vec::with_capacity(cfg.swarm);
    for (i, rng) in rngs.iter_mut().enumerate() {
        let p = match warm.get(i) {
            Some(w) if w.len() == dims => w.clone(),
            _ => ranges.iter().map(|r| sample(rng, r.min, r.max)).collect(),
        };
        let v = vmax.iter().map(|&m| sample(rng, -m, m)).collect();
        pos.push(p);
        vel.push(v);
    }
    let mut evaluations = 0;
    let mut evaluate = |pos: &[Vec<f64>]| -> Result<Vec<f64>> {
        let thetas: Vec<_> = pos.iter().map(|p| pbox.valuation(p)).collect();
        let f = fitness(&thetas)?;
        if f.len() != thetas.len() {
            return Err(Error::InvalidConfig("fitness returned the wrong batch size".into()));
        }
        evaluations += f.len();
        Ok(f)
    };
    let fit = evaluate(&pos)?;
    let mut pbest = pos.clone();
    let mut pbest_fit = fit.clone();
    let mut g = argmin(&fit);
    let mut gbest = pos[g].clone();
    let mut gbest_fit = fit[g];
    for _ in 0..cfg.iterations {
        if gbest_fit <= cfg.target {
            break;
        }
        for i in 0..cfg.swarm {
            let rng = &mut rngs[i];
            for d in 0..dims {
                let r = &ranges[d];
                if r.width() == 0.0 {
                    continue;
                }
                let (r1, r2): (f64, f64) = (rng.random(), rng.random());
                let v = cfg.inertia * vel[i][d]
                    + cfg.cognitive * r1 * (pbest[i][d] - pos[i][d])
                    + cfg.social * r2 * (gbest[d] - pos[i][d]);
                let v = v.clamp(-vmax[d], vmax[d]);
                let x = pos[i][d] + v;
                if x < r.min || x > r.max {
                    pos[i][d] = x.clamp(r.min, r.max);
                    vel[i][d] = 0.0;
                } else {
                    pos[i][d] = x;
                    vel[i][d] = v;
                }
            }
        }
        let fit = evaluate(&pos)?;
        for i in 0..cfg.swarm {
            if fit[i] < pbest_fit[i] {
                pbest_fit[i] = fit[i];
                pbest[i] = pos[i].clone();
            }
        }
        g = argmin(&pbest_fit);
        if pbest_fit[g] < gbest_fit {
            gbest_fit = pbest_fit[g];
            gbest = pbest[g].clone();
        }
    }
    Ok(PsoOutcome {
        theta: pbox.valuation(&gbest),
        fitness: gbest_fit,
        evaluations,
    })
}

fn sample(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        lo + (hi - lo) * rng.random::<f64>()
    } else {
        lo
    }
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[best] {
            best = i;
        }
    }
    best
}

/// Minimizes the nodal misclassification rate of `template` over `pbox`.
pub fn pso_minimize_mr(
    template: &Formula,
    pbox: &ParameterBox,
    data: &LabeledSet,
    cfg: &PsoConfig,
) -> Result<PsoOutcome> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let pbox = ParameterBox::for_formula(template, pbox.ranges().to_vec())?;
    pso_minimize(&pbox, cfg, &[], &mut |thetas| {
        thetas
            .iter()
            .map(|t| misclassification_rate(data, &template.instantiate(t)?))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierConfig {
    pub m_th: f64,
    pub eta_th: usize,
    pub m_hat: f64,
    pub pso: PsoConfig,
    /// Re-optimize all parameters of a combination (warm-started) instead of reusing the
    /// first-stage values as they are.
    pub joint: bool,
    /// Add `!φ` for every template to the pool.
    pub negations: bool,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            m_th: DEFAULT_M_TH,
            eta_th: DEFAULT_ETA_TH,
            m_hat: DEFAULT_M_HAT,
            pso: PsoConfig::default(),
            joint: true,
            negations: true,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.m_th && self.m_th < self.m_hat && self.m_hat < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "need 0 <= m_th < m_hat < 1, got m_th = {}, m_hat = {}",
                self.m_th, self.m_hat
            )));
        }
        if self.eta_th < 1 {
            return Err(Error::InvalidConfig("eta_th must be at least 1".into()));
        }
        self.pso.validate()
    }
}

/// First-stage result for one pool entry.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveResult {
    pub name: String,
    pub template: Formula,
    pub theta: ParameterValuation,
    pub mr: f64,
}

/// One step of the search, in order.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchStep {
    /// `primitive` or `combination`.
    pub stage: &'static str,
    pub description: String,
    pub mr: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierResult {
    pub success: bool,
    pub formula: Formula,
    /// Recomputed on the returned formula.
    pub mr: f64,
    pub size: usize,
    pub primitives: Vec<PrimitiveResult>,
    /// Pool indices that survived pruning.
    pub kept: Vec<usize>,
    pub log: Vec<SearchStep>,
    pub evaluations: usize,
}

struct PoolEntry {
    name: String,
    template: Formula,
    pbox: ParameterBox,
}

fn pool(templates: &[(Template, ParameterBox)], negations: bool) -> Result<Vec<PoolEntry>> {
    let mut out = Vec::new();
    for (t, b) in templates {
        let pbox = ParameterBox::for_formula(&t.formula, b.ranges().to_vec())?;
        out.push(PoolEntry {
            name: t.name.clone(),
            template: t.formula.clone(),
            pbox: pbox.clone(),
        });
        if negations {
            out.push(PoolEntry {
                name: format!("not {}", t.name),
                template: t.formula.clone().not(),
                pbox,
            });
        }
    }
    Ok(out)
}

/// Pool indices whose first-stage rate is below `m_hat`.
pub fn prune(primitives: &[PrimitiveResult], m_hat: f64) -> Vec<usize> {
    (0..primitives.len())
        .filter(|&i| primitives[i].mr < m_hat)
        .collect()
}

fn prefix(k: usize) -> String {
    let mut s = String::new();
    let mut k = k;
    loop {
        s.insert(0, (b'a' + (k % 26) as u8) as char);
        if k < 26 {
            break;
        }
        k = k / 26 - 1;
    }
    s
}

/// Ascending `k`-subsets of `0..n`, in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k == 0 || k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Prune-and-grow search with misclassification rates computed by `batch`, which maps a
/// list of ground formulas to their rates on the training data.
pub fn infer_classifier_with(
    templates: &[(Template, ParameterBox)],
    cfg: &ClassifierConfig,
    batch: &mut dyn FnMut(&[Formula]) -> Result<Vec<f64>>,
) -> Result<ClassifierResult> {
    cfg.validate()?;
    let entries = pool(templates, cfg.negations)?;
    if entries.is_empty() {
        return Err(Error::InvalidConfig("no templates given".into()));
    }
    let mut log = Vec::new();
    let mut evaluations = 0;
    let mut primitives = Vec::new();

    for (i, e) in entries.iter().enumerate() {
        let pso = PsoConfig {
            seed: mix(cfg.pso.seed, i as u64),
            target: cfg.m_th,
            ..cfg.pso.clone()
        };
        let out = pso_minimize(&e.pbox, &pso, &[], &mut |thetas| {
            let fs = thetas
                .iter()
                .map(|t| e.template.instantiate(t))
                .collect::<Result<Vec<_>>>()?;
            batch(&fs)
        })?;
        evaluations += out.evaluations;
        log.push(SearchStep {
            stage: "primitive",
            description: e.name.clone(),
            mr: out.fitness,
            evaluations: out.evaluations,
        });
        primitives.push(PrimitiveResult {
            name: e.name.clone(),
            template: e.template.clone(),
            theta: out.theta,
            mr: out.fitness,
        });
    }

    // best-so-far among formulas that respect the size bound
    let mut best: Option<(Formula, f64)> = None;
    let consider = |f: Formula, mr: f64, best: &mut Option<(Formula, f64)>| {
        if formula_size(&f) <= cfg.eta_th && best.as_ref().is_none_or(|(_, b)| mr < *b) {
            *best = Some((f, mr));
        }
    };
    for p in &primitives {
        consider(p.template.instantiate(&p.theta)?, p.mr, &mut best);
    }
    if best.as_ref().is_some_and(|(_, mr)| *mr <= cfg.m_th) {
        return finish(batch, cfg, best, Vec::new(), primitives, log, evaluations);
    }

    let mut kept = prune(&primitives, cfg.m_hat);
    kept.sort_by(|a, b| primitives[*a].mr.total_cmp(&primitives[*b].mr).then(a.cmp(b)));
    if kept.is_empty() {
        log::warn!("no template reaches the pruning threshold {}", cfg.m_hat);
        return finish(batch, cfg, best, kept, primitives, log, evaluations);
    }

    let sizes: Vec<usize> = kept
        .iter()
        .map(|&i| formula_size(&primitives[i].template))
        .collect();
    let mut k = 2;
    'grow: loop {
        let min_size: usize = {
            let mut s = sizes.clone();
            s.sort_unstable();
            s.iter().take(k).sum::<usize>() + (k - 1)
        };
        if k > kept.len() || min_size > cfg.eta_th {
            break;
        }
        let mut groups = subsets(kept.len(), k);
        let score = |g: &Vec<usize>| -> f64 { g.iter().map(|&j| primitives[kept[j]].mr).sum() };
        groups.sort_by(|a, b| score(a).total_cmp(&score(b)).then_with(|| a.cmp(b)));
        for group in groups {
            let members: Vec<usize> = group.iter().map(|&j| kept[j]).collect();
            let size: usize = members.iter().map(|&m| sizes_of(&primitives[m])).sum::<usize>() + k - 1;
            if size > cfg.eta_th {
                continue;
            }
            // connective patterns as bit masks: bit j set means `|` after member j
            for pattern in 0..(1u32 << (k - 1)) {
                let (formula, pbox, warm) = combine(&primitives, &entries, &members, pattern)?;
                let description = alloc::string::ToString::to_string(&formula);
                let (mr, theta, evals) = if cfg.joint {
                    let pso = PsoConfig {
                        seed: mix(cfg.pso.seed, 0x5eed ^ (evaluations as u64)),
                        target: cfg.m_th,
                        ..cfg.pso.clone()
                    };
                    let out = pso_minimize(&pbox, &pso, &[warm], &mut |thetas| {
                        let fs = thetas
                            .iter()
                            .map(|t| formula.instantiate(t))
                            .collect::<Result<Vec<_>>>()?;
                        batch(&fs)
                    })?;
                    (out.fitness, out.theta, out.evaluations)
                } else {
                    let theta = pbox.valuation(&warm);
                    let mr = batch(&[formula.instantiate(&theta)?])?[0];
                    (mr, theta, 1)
                };
                evaluations += evals;
                log.push(SearchStep {
                    stage: "combination",
                    description,
                    mr,
                    evaluations: evals,
                });
                consider(formula.instantiate(&theta)?, mr, &mut best);
                if mr <= cfg.m_th {
                    break 'grow;
                }
            }
        }
        k += 1;
    }
    finish(batch, cfg, best, kept, primitives, log, evaluations)
}

fn finish(
    batch: &mut dyn FnMut(&[Formula]) -> Result<Vec<f64>>,
    cfg: &ClassifierConfig,
    best: Option<(Formula, f64)>,
    kept: Vec<usize>,
    primitives: Vec<PrimitiveResult>,
    log: Vec<SearchStep>,
    evaluations: usize,
) -> Result<ClassifierResult> {
    let (formula, _) = best.unwrap_or((Formula::True, f64::INFINITY));
    // recomputed rather than carried over from the search
    let mr = batch(core::slice::from_ref(&formula))?[0];
    let size = formula_size(&formula);
    Ok(ClassifierResult {
        success: mr <= cfg.m_th && size <= cfg.eta_th,
        formula,
        mr,
        size,
        primitives,
        kept,
        log,
        evaluations,
    })
}

fn sizes_of(p: &PrimitiveResult) -> usize {
    formula_size(&p.template)
}

/// Joins pool members with `&`/`|` (left to right), renaming parameters apart with
/// per-member prefixes `a_`, `b_`, and so on. Returns the combined template, its box and the
/// first-stage optimum as a warm-start point.
fn combine(
    primitives: &[PrimitiveResult],
    entries: &[PoolEntry],
    members: &[usize],
    pattern: u32,
) -> Result<(Formula, ParameterBox, Vec<f64>)> {
    let mut formula: Option<Formula> = None;
    let mut ranges: Vec<ParamRange> = Vec::new();
    let mut warm = Vec::new();
    for (j, &m) in members.iter().enumerate() {
        let p = prefix(j);
        let rename = |name: &str| format!("{p}_{name}");
        let part = entries[m].template.rename_params(&rename);
        for r in entries[m].pbox.ranges() {
            let mut r = r.clone();
            warm.push(primitives[m].theta.get(&r.name).unwrap_or(r.min));
            r.name = rename(&r.name);
            ranges.push(r);
        }
        formula = Some(match formula {
            None => part,
            Some(f) if pattern & (1 << (j - 1)) != 0 => f.or(part),
            Some(f) => f.and(part),
        });
    }
    let formula = formula.expect("at least one member");
    let pbox = ParameterBox::for_formula(&formula, ranges.clone())?;
    // for_formula may reorder ranges; reorder the warm start to match
    let warm = pbox
        .ranges()
        .iter()
        .map(|r| {
            let i = ranges.iter().position(|q| q.name == r.name).expect("same names");
            warm[i]
        })
        .collect();
    Ok((formula, pbox, warm))
}

/// Prune-and-grow search evaluating rates sequentially on `data`.
pub fn infer_classifier(
    data: &LabeledSet,
    templates: &[(Template, ParameterBox)],
    cfg: &ClassifierConfig,
) -> Result<ClassifierResult> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    infer_classifier_with(templates, cfg, &mut |fs| {
        fs.iter().map(|f| misclassification_rate(data, f)).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::graph::{LabeledGraph, Trajectory};
    use alloc::sync::Arc;
    use alloc::vec;

    fn data(series: &[(&[f64], i8)]) -> LabeledSet {
        let g = Arc::new(LabeledGraph::complete(["v"]).unwrap());
        let items = series
            .iter()
            .map(|(s, l)| {
                let t = Trajectory::from_fn(g.clone(), s.len(), |_, k| s[k], |_, _| 0.0).unwrap();
                (t, Some(*l))
            })
            .collect();
        LabeledSet::new(items).unwrap()
    }

    #[test]
    fn prefixes_are_valid_names() {
        assert_eq!(prefix(0), "a");
        assert_eq!(prefix(25), "z");
        assert_eq!(prefix(26), "aa");
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(3, 3), [[0, 1, 2]]);
    }

    #[test]
    fn pso_finds_separating_threshold() {
        let d = data(&[(&[0.0, 3.0], 1), (&[0.0, 4.0], 1), (&[0.0, 1.0], -1), (&[0.5, 0.0], -1)]);
        let t = parse("F (x >= ?c)").unwrap();
        let b = ParameterBox::new(vec![ParamRange::continuous("c", 0.0, 5.0)]).unwrap();
        let out = pso_minimize_mr(&t, &b, &d, &PsoConfig::default()).unwrap();
        assert_eq!(out.fitness, 0.0);
        let c = out.theta.get("c").unwrap();
        assert!(c > 1.0 && c <= 3.0);
    }

    #[test]
    fn degenerate_swarm_returns_initial_sample() {
        let d = data(&[(&[0.0, 3.0], 1), (&[0.0, 1.0], -1)]);
        let t = parse("F (x >= ?c)").unwrap();
        let b = ParameterBox::new(vec![ParamRange::continuous("c", 0.0, 5.0)]).unwrap();
        let cfg = PsoConfig {
            swarm: 1,
            iterations: 0,
            seed: 3,
            ..PsoConfig::default()
        };
        let out = pso_minimize_mr(&t, &b, &d, &cfg).unwrap();
        assert_eq!(out.evaluations, 1);
        let again = misclassification_rate(&d, &t.instantiate(&out.theta).unwrap()).unwrap();
        assert_eq!(out.fitness, again);
    }

    #[test]
    fn pso_is_seed_deterministic() {
        let d = data(&[(&[0.0, 3.0, 1.0], 1), (&[2.0, 1.0, 0.0], -1)]);
        let t = parse("G[<=?i] (x <= ?c)").unwrap();
        let b = ParameterBox::new(vec![
            ParamRange::integer("i", 0.0, 2.0),
            ParamRange::continuous("c", 0.0, 5.0),
        ])
        .unwrap();
        let cfg = PsoConfig {
            seed: 11,
            target: -1.0,
            iterations: 5,
            ..PsoConfig::default()
        };
        let a = pso_minimize_mr(&t, &b, &d, &cfg).unwrap();
        let b2 = pso_minimize_mr(&t, &b, &d, &cfg).unwrap();
        assert_eq!(a, b2);
        assert_eq!(a.theta.get("i").unwrap().fract(), 0.0);
    }

    #[test]
    fn conjunction_found_when_no_primitive_separates() {
        // positives peak within (1, 3); negatives peak below 1 or above 3
        let d = data(&[
            (&[2.0, 0.0], 1),
            (&[0.0, 2.5], 1),
            (&[0.5, 0.0], -1),
            (&[0.0, 4.0], -1),
        ]);
        let t = Template::new("eventually", "F (x >= ?c)").unwrap();
        let u = Template::new("always", "G (x <= ?c)").unwrap();
        let b = ParameterBox::new(vec![ParamRange::continuous("c", 0.0, 5.0)]).unwrap();
        let cfg = ClassifierConfig {
            m_hat: 0.6,
            negations: false,
            ..ClassifierConfig::default()
        };
        let r = infer_classifier(&d, &[(t, b.clone()), (u, b)], &cfg).unwrap();
        assert!(r.success, "{r:?}");
        assert_eq!(r.mr, 0.0);
        assert_eq!(r.size, 1);
        assert_eq!(r.mr, misclassification_rate(&d, &r.formula).unwrap());
    }

    #[test]
    fn pruning_is_monotone() {
        let p = |mr| PrimitiveResult {
            name: String::new(),
            template: Formula::True,
            theta: ParameterValuation::new(),
            mr,
        };
        let prims = [p(0.05), p(0.2), p(0.09), p(0.5)];
        let wide = prune(&prims, 0.3);
        let narrow = prune(&prims, 0.1);
        assert!(narrow.iter().all(|i| wide.contains(i)));
        assert_eq!(narrow, [0, 2]);
    }
}
