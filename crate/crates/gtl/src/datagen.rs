//! Synthetic data: prior draws, swarm density trajectories and planted two-class sets.
//!
//! Every generator indexes its proposals and gives proposal `j` its own ChaCha stream, so the
//! output depends only on the seed, never on how many worker threads evaluated proposals.

use std::sync::Arc;

use gtl_core::eval::sat_table;
use gtl_core::formula::parse;
use gtl_core::graph::NodeId;
use gtl_core::prob::PriorModel;
use gtl_core::{Formula, LabeledGraph, Trajectory};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;
use rayon::prelude::*;

/// Proposals examined before the acceptance-rate floor is enforced.
pub const FLOOR_PROPOSALS: usize = 1_000_000;
/// Minimum acceptance rate once [`FLOOR_PROPOSALS`] have been drawn.
pub const FLOOR_RATE: f64 = 0.001;
const BATCH: usize = 2048;

/// Density threshold above which a subregion counts as crowded.
pub const CROWDED: f64 = 1.0 / 8.0;
/// Density threshold below which a subregion counts as sparse.
pub const SPARSE: f64 = 1.0 / 9.0;

/// Whenever a subregion is crowded, some subregion within distance 1 stays sparse for the
/// current and the next two time steps.
pub fn swarm_constraint() -> Formula {
    let text = format!(
        "G ((x >= {CROWDED:?}) -> G[<=2] E 1 via (y <= 1) : (x <= {SPARSE:?}))"
    );
    parse(&text).expect("constraint parses")
}

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error(
        "acceptance rate {rate:.2e} below {FLOOR_RATE} after {proposals} proposals \
         ({accepted} of {wanted} accepted{class})"
    )]
    AcceptanceFloor {
        proposals: usize,
        accepted: usize,
        wanted: usize,
        rate: f64,
        class: String,
    },
    #[error("invalid generator setting: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] gtl_core::Error),
}

pub type Result<T> = std::result::Result<T, GenError>;

fn stream(seed: u64, index: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index as u64);
    r
}

fn draw_label(rng: &mut ChaCha8Rng, bins: &[(f64, f64)], weights: &[f64]) -> f64 {
    let b = WeightedIndex::new(weights)
        .expect("prior masses are positive")
        .sample(rng);
    let (lo, hi) = bins[b];
    if hi > lo {
        // stay inside the half-open bin
        (lo + (hi - lo) * rng.random::<f64>()).min(f64::from_bits(hi.to_bits() - 1))
    } else {
        lo
    }
}

fn prior_draw(prior: &PriorModel, rng: &mut ChaCha8Rng, tilt: Option<&[f64]>) -> Trajectory {
    let bins = prior.bins();
    let nb = bins.len();
    let half = ((nb as f64 - 1.0) / 2.0).max(1.0);
    let edges = prior.edge_labels();
    let mut weights = vec![0.0; nb];
    Trajectory::from_fn(
        prior.graph_arc().clone(),
        prior.len(),
        |v, step| {
            let pmf = prior.pmf(v, step);
            match tilt {
                None => weights.copy_from_slice(pmf),
                Some(t) => {
                    for (b, w) in weights.iter_mut().enumerate() {
                        let z = (b as f64 - (nb as f64 - 1.0) / 2.0) / half;
                        *w = pmf[b] * (t[step] * z).exp();
                    }
                }
            }
            draw_label(rng, bins, &weights)
        },
        |e, _| edges[e.0],
    )
    .expect("prior shape is valid")
}

/// `n` independent trajectories from `prior`; edge labels are the prior's static labels.
pub fn sample_prior(prior: &PriorModel, n: usize, seed: u64) -> Vec<Trajectory> {
    (0..n)
        .into_par_iter()
        .map(|i| prior_draw(prior, &mut stream(seed, i), None))
        .collect()
}

/// Runs `propose` on consecutive proposal indices until `classify` has filled every class,
/// keeping acceptances in index order.
fn rejection<F>(wanted: &[usize], names: &[&str], propose: F) -> Result<Vec<Vec<Trajectory>>>
where
    F: Fn(usize) -> Result<(Trajectory, Option<usize>)> + Sync,
{
    let mut out: Vec<Vec<Trajectory>> = vec![Vec::new(); wanted.len()];
    let mut proposals = 0usize;
    let mut seen = vec![0usize; wanted.len()];
    while out.iter().zip(wanted).any(|(o, w)| o.len() < *w) {
        let batch: Vec<_> = (proposals..proposals + BATCH)
            .into_par_iter()
            .map(&propose)
            .collect::<Result<_>>()?;
        proposals += BATCH;
        for (t, class) in batch {
            if let Some(c) = class {
                seen[c] += 1;
                if out[c].len() < wanted[c] {
                    out[c].push(t);
                }
            }
        }
        if proposals >= FLOOR_PROPOSALS {
            for c in 0..wanted.len() {
                let rate = seen[c] as f64 / proposals as f64;
                if out[c].len() < wanted[c] && rate < FLOOR_RATE {
                    return Err(GenError::AcceptanceFloor {
                        proposals,
                        accepted: out[c].len(),
                        wanted: wanted[c],
                        rate,
                        class: if names[c].is_empty() {
                            String::new()
                        } else {
                            format!(", class {}", names[c])
                        },
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Grid of subregions for the swarm scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmScenario {
    pub rows: usize,
    pub cols: usize,
    pub len: usize,
    pub seed: u64,
    /// Dirichlet concentration per subregion.
    pub concentration: f64,
    /// Weight of the previous step's densities in each new step.
    pub smoothing: f64,
}

impl Default for SwarmScenario {
    fn default() -> Self {
        Self {
            rows: 3,
            cols: 3,
            len: 12,
            seed: 0,
            concentration: 0.5,
            smoothing: 0.5,
        }
    }
}

impl SwarmScenario {
    fn validate(&self) -> Result<()> {
        if self.rows * self.cols < 2 || self.len == 0 {
            return Err(GenError::Config("need at least 2 subregions and 1 step".into()));
        }
        if !(self.concentration > 0.0) || !(0.0..1.0).contains(&self.smoothing) {
            return Err(GenError::Config(
                "concentration must be positive and smoothing in [0, 1)".into(),
            ));
        }
        Ok(())
    }

    /// Complete graph over the cells, named `r{row}c{col}`, with centroid distances as edge
    /// labels (unit cell spacing), in edge id order.
    pub fn graph(&self) -> (Arc<LabeledGraph>, Vec<f64>) {
        let names: Vec<String> = (0..self.rows)
            .flat_map(|r| (0..self.cols).map(move |c| format!("r{}c{}", r + 1, c + 1)))
            .collect();
        let g = LabeledGraph::complete(names).expect("distinct names");
        let at = |v: NodeId| ((v.0 / self.cols) as f64, (v.0 % self.cols) as f64);
        let dist = g
            .edges()
            .map(|e| {
                let (a, b) = g.endpoints(e);
                let ((r1, c1), (r2, c2)) = (at(a), at(b));
                (r1 - r2).hypot(c1 - c2)
            })
            .collect();
        (Arc::new(g), dist)
    }

    /// One unconstrained density trajectory.
    pub fn propose(&self, graph: &Arc<LabeledGraph>, dist: &[f64], index: usize) -> Trajectory {
        let mut rng = stream(self.seed, index);
        let n = graph.node_count();
        let gamma = Gamma::new(self.concentration, 1.0).expect("positive shape");
        let mut rows = vec![vec![0.0; self.len]; n];
        let mut prev: Option<Vec<f64>> = None;
        for step in 0..self.len {
            let mut d: Vec<f64> = (0..n).map(|_| gamma.sample(&mut rng)).collect();
            let total: f64 = d.iter().sum();
            if total > 0.0 {
                d.iter_mut().for_each(|x| *x /= total);
            } else {
                d.iter_mut().for_each(|x| *x = 1.0 / n as f64);
            }
            if let Some(p) = &prev {
                for (x, q) in d.iter_mut().zip(p) {
                    *x = self.smoothing * q + (1.0 - self.smoothing) * *x;
                }
            }
            for (v, x) in d.iter().enumerate() {
                rows[v][step] = *x;
            }
            prev = Some(d);
        }
        let edges = dist.iter().map(|&y| vec![y; self.len]).collect();
        Trajectory::new(graph.clone(), self.len, rows, edges).expect("consistent shape")
    }
}

fn holds_everywhere(g: &Trajectory, f: &Formula) -> Result<bool> {
    Ok(sat_table(g, f)?.count_at_start() == g.graph().node_count())
}

/// `n` density trajectories satisfying [`swarm_constraint`] at every node.
pub fn gen_swarm(scenario: &SwarmScenario, n: usize) -> Result<Vec<Trajectory>> {
    scenario.validate()?;
    let (graph, dist) = scenario.graph();
    let constraint = swarm_constraint();
    let mut out = rejection(&[n], &[""], |j| {
        let t = scenario.propose(&graph, &dist, j);
        let ok = holds_everywhere(&t, &constraint)?;
        Ok((t, ok.then_some(0)))
    })?;
    Ok(out.remove(0))
}

/// Histogram prior fitted to `set` with add-`pseudo` smoothing per (node, time). Edge labels
/// come from the first trajectory's first step.
pub fn empirical_prior(set: &[Trajectory], bins: Vec<(f64, f64)>, pseudo: f64) -> Result<PriorModel> {
    let first = set.first().ok_or(gtl_core::Error::EmptyDataset)?;
    if !(pseudo > 0.0) {
        return Err(GenError::Config("smoothing mass must be positive".into()));
    }
    let graph = first.graph_arc().clone();
    let len = first.len();
    let nb = bins.len();
    let locate = |x: f64| {
        bins.iter()
            .position(|&(lo, hi)| (lo <= x && x < hi) || (lo == hi && x == lo))
            .or_else(|| (x >= bins[nb - 1].1).then_some(nb - 1))
            .unwrap_or(0)
    };
    let pmf = graph
        .nodes()
        .map(|v| {
            (0..len)
                .map(|step| {
                    let mut h = vec![pseudo; nb];
                    for g in set {
                        h[locate(g.node_label(v, step))] += 1.0;
                    }
                    let total: f64 = h.iter().sum();
                    h.iter().map(|c| c / total).collect()
                })
                .collect()
        })
        .collect();
    let edges = graph.edges().map(|e| first.edge_label(e, 0)).collect();
    Ok(PriorModel::new(graph, len, bins, pmf, edges)?)
}

/// `count` equal-width bins covering `[lo, hi)`.
pub fn uniform_bins(lo: f64, hi: f64, count: usize) -> Vec<(f64, f64)> {
    let w = (hi - lo) / count as f64;
    (0..count)
        .map(|i| (lo + w * i as f64, if i + 1 == count { hi } else { lo + w * (i + 1) as f64 }))
        .collect()
}

/// Prior for the swarm scenario: histograms of unconstrained proposals (the constraint is
/// what the data adds on top of the prior).
pub fn swarm_prior(scenario: &SwarmScenario, samples: usize, bins: usize) -> Result<PriorModel> {
    scenario.validate()?;
    let (graph, dist) = scenario.graph();
    let alt = SwarmScenario {
        seed: scenario.seed ^ 0x9e37_79b9,
        ..scenario.clone()
    };
    let set: Vec<Trajectory> = (0..samples)
        .into_par_iter()
        .map(|j| alt.propose(&graph, &dist, j))
        .collect();
    empirical_prior(&set, uniform_bins(0.0, 1.0, bins), 1.0)
}

/// Fraction of nodes needed for a trajectory to count towards a class.
pub const PLANTED_MAJORITY: f64 = 0.95;
const TILT: f64 = 3.0;

/// Labeled set where `+1` trajectories satisfy `separator` at no fewer than 95% of nodes and
/// `-1` trajectories violate it at no fewer than 95% of nodes. Proposals are prior draws with
/// a random exponential tilt per trajectory (a level plus a linear trend over time) so that
/// both classes stay reachable when the untilted prior rarely produces either extreme.
pub fn gen_planted(
    separator: &Formula,
    prior: &PriorModel,
    n_pos: usize,
    n_neg: usize,
    seed: u64,
) -> Result<Vec<(Trajectory, i8)>> {
    if !separator.is_parameter_free() {
        return Err(GenError::Core(gtl_core::Error::Parameterized(separator.to_string())));
    }
    let unreachable = match separator {
        Formula::True => (n_neg > 0).then_some("-1"),
        Formula::False => (n_pos > 0).then_some("+1"),
        _ => None,
    };
    if let Some(class) = unreachable {
        return Err(GenError::Config(format!(
            "separator `{separator}` admits no class {class} trajectory"
        )));
    }
    let n = prior.graph().node_count() as f64;
    let len = prior.len();
    let out = rejection(&[n_pos, n_neg], &["+1", "-1"], |j| {
        let mut rng = stream(seed, j);
        let level = TILT * (2.0 * rng.random::<f64>() - 1.0);
        let trend = TILT * (2.0 * rng.random::<f64>() - 1.0);
        let tilt: Vec<f64> = (0..len)
            .map(|k| {
                let pos = if len > 1 { k as f64 / (len - 1) as f64 - 0.5 } else { 0.0 };
                level + trend * pos
            })
            .collect();
        let t = prior_draw(prior, &mut rng, Some(&tilt));
        let frac = sat_table(&t, separator)?.count_at_start() as f64 / n;
        let class = if frac >= PLANTED_MAJORITY {
            Some(0)
        } else if 1.0 - frac >= PLANTED_MAJORITY {
            Some(1)
        } else {
            None
        };
        Ok((t, class))
    })?;
    let mut it = out.into_iter();
    let pos = it.next().unwrap_or_default();
    let neg = it.next().unwrap_or_default();
    Ok(pos
        .into_iter()
        .map(|t| (t, 1))
        .chain(neg.into_iter().map(|t| (t, -1)))
        .collect())
}
