//! Acceptance criteria 1 to 9. Each test writes one `criterion N: PASS|FAIL ...` line to
//! stderr (uncaptured) and then asserts.

#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use gtl::datagen::{gen_planted, gen_swarm, swarm_prior, uniform_bins, SwarmScenario};
use gtl::par;
use gtl_core::automata::{run_word, to_dfa};
use gtl_core::classify::{infer_classifier_with, ClassifierConfig};
use gtl_core::eval::{coverage, misclassification_rate, sat, LabeledSet};
use gtl_core::formula::{parse, Formula, ParamRange, ParameterBox};
use gtl_core::graph::NodeId;
use gtl_core::identify::{
    directed_hausdorff, front_gap, identify, identify_with, IdentifyConfig, Normalization,
};
use gtl_core::prob::{
    compute_ig, info_gain, satisfaction_probability, satisfaction_probability_counted, Counters,
    PriorModel,
};
use gtl_core::templates::{self, default_box, DataStats, Template};
use gtl_core::{LabeledGraph, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use oracle::gen;

const PROB_TOL: f64 = 1e-10;
const SPOT_TOL: f64 = 1e-12;
const EPSILON: f64 = 0.05;
const P_TH: f64 = 0.98;

fn report(n: usize, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr().lock(), "criterion {n}: {verdict} {detail}");
}

fn graph(nodes: usize, complete: bool) -> Arc<LabeledGraph> {
    let names: Vec<String> = (0..nodes).map(|i| format!("v{i}")).collect();
    if complete {
        return Arc::new(LabeledGraph::complete(names).unwrap());
    }
    // path
    let edges: Vec<_> = (1..nodes)
        .map(|i| (format!("e{i}"), names[i - 1].clone(), names[i].clone()))
        .collect();
    Arc::new(LabeledGraph::new(names, edges).unwrap())
}

/// Two bins on [0, 1) with random masses everywhere and edge labels from {0.5, 1, 2}.
fn two_bin_prior<R: Rng>(rng: &mut R, g: &Arc<LabeledGraph>, len: usize) -> PriorModel {
    let pmf = g
        .nodes()
        .map(|_| {
            (0..len)
                .map(|_| {
                    let p = rng.random_range(0.05..0.95);
                    vec![p, 1.0 - p]
                })
                .collect()
        })
        .collect();
    let edges = g.edges().map(|_| [0.5, 1.0, 2.0][rng.random_range(0..3)]).collect();
    PriorModel::new(g.clone(), len, uniform_bins(0.0, 1.0, 2), pmf, edges).unwrap()
}

/// Smallest horizon every library template accepts is 3; response templates also run at 2.
fn horizon_for<R: Rng>(rng: &mut R, t: &Template) -> usize {
    if t.name.starts_with("response") {
        rng.random_range(2..4)
    } else {
        3
    }
}

/// Template instance at a random cube point; node thresholds land on bin edges half the time.
fn instance<R: Rng>(rng: &mut R, t: &Template, pbox: &ParameterBox) -> (Formula, Vec<f64>) {
    let norm = Normalization::for_template(&t.formula, pbox.clone()).unwrap();
    let omega: Vec<f64> = (0..norm.dims()).map(|_| rng.random::<f64>()).collect();
    let mut theta = norm.inverse(&omega);
    if rng.random_bool(0.5) {
        for name in ["c", "a", "b"] {
            if theta.get(name).is_some() {
                theta.insert(name, [0.0, 0.5, 1.0][rng.random_range(0..3)]);
            }
        }
    }
    (t.formula.instantiate(&theta).unwrap(), omega)
}

#[test]
fn criterion_1_probability_matches_enumeration() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let library = templates::all_directions();
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for t in &library {
        for round in 0..12 {
            let nodes = 2 + round % 2;
            let g = graph(nodes, rng.random_bool(0.5));
            let len = horizon_for(&mut rng, t);
            let prior = two_bin_prior(&mut rng, &g, len);
            let pbox = default_box(&t.formula, &DataStats::from_prior(&prior)).unwrap();
            let (f, _) = instance(&mut rng, t, &pbox);
            for v in g.nodes() {
                let p = satisfaction_probability(&prior, &f, v).unwrap();
                let want = oracle::brute_probability(&prior, &f, v);
                let err = (p - want).abs();
                worst = worst.max(err);
                checked += 1;
                if err > PROB_TOL {
                    failures.push(format!("{f} at v{}: {p} vs {want}", v.0));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = failures.is_empty() && secs < 60.0;
    report(
        1,
        ok,
        &format!("{checked} cases, max error {worst:.1e} (tol {PROB_TOL:.0e}), {secs:.1}s (limit 60s)"),
    );
    assert!(ok, "{failures:?}");
}

#[test]
fn criterion_2_sat_agrees_with_automaton() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut cases, mut disagreements) = (0, 0);
    while cases < 10_000 {
        let nodes = rng.random_range(1..5);
        let len = rng.random_range(1..6);
        let g = gen::graph(&mut rng, nodes);
        let text = gen::formula(&mut rng, 3, len, true);
        let f = parse(&text).unwrap();
        let Ok(a) = to_dfa(&f, len) else { continue };
        for _ in 0..4 {
            let t = gen::trajectory(&mut rng, &g, len);
            let v = NodeId(rng.random_range(0..nodes));
            let accepted = run_word(&a.dfa, &a.label_word(&t, v)).unwrap() != a.negated;
            if accepted != sat(&t, &f, v, 1).unwrap() {
                disagreements += 1;
            }
            cases += 1;
        }
    }
    let ok = disagreements == 0;
    report(2, ok, &format!("{cases} cases, {disagreements} disagreements"));
    assert!(ok);
}

#[test]
fn criterion_3_constants_carry_no_information() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = graph(3, true);
    let prior = two_bin_prior(&mut rng, &g, 4);
    let t = compute_ig(&prior, &Formula::True, None).unwrap();
    let f = compute_ig(&prior, &Formula::False, None).unwrap();
    let all_zero = |r: &gtl_core::prob::InfoGainReport| {
        r.average == 0.0 && r.gains.iter().all(|x| *x == 0.0)
    };
    let ok = all_zero(&t) && all_zero(&f);
    report(3, ok, &format!("IG(TRUE) = {}, IG(FALSE) = {}", t.average, f.average));
    assert!(ok);
}

#[test]
fn criterion_4_spot_value() {
    let g = graph(1, true);
    let prior =
        PriorModel::homogeneous(g, 2, uniform_bins(0.0, 1.0, 2), vec![0.5, 0.5], vec![]).unwrap();
    let f = parse("F[<=1] (x >= 0.5)").unwrap();
    let p = satisfaction_probability(&prior, &f, NodeId(0)).unwrap();
    let ig = compute_ig(&prior, &f, None).unwrap().average;
    // four equiprobable bin sequences, three of which reach the upper bin
    let want_p = oracle::brute_probability(&prior, &f, NodeId(0));
    let want_ig = -want_p.ln() / 2.0;
    let ok = (want_p - 0.75).abs() <= SPOT_TOL
        && (p - want_p).abs() <= SPOT_TOL
        && (ig - want_ig).abs() <= SPOT_TOL;
    report(
        4,
        ok,
        &format!("P = {p} (want {want_p}), IG = {ig} (want {want_ig}), tol {SPOT_TOL:.0e}"),
    );
    assert!(ok);
}

#[test]
fn criterion_5_monotone_in_the_cube() {
    let start = Instant::now();
    let families = [("type-I", templates::type_i()), ("type-II", templates::type_ii())];
    let mut summary = Vec::new();
    let mut violations = Vec::new();
    for (fi, (family, list)) in families.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(50 + fi as u64);
        let (mut strict, mut pairs) = (0, 0);
        while pairs < 1000 {
            let t = &list[pairs % list.len()];
            let g = graph(2, true);
            let len = horizon_for(&mut rng, t);
            let prior = two_bin_prior(&mut rng, &g, len);
            let pbox = default_box(&t.formula, &DataStats::from_prior(&prior)).unwrap();
            let norm = Normalization::for_template(&t.formula, pbox).unwrap();
            let lo: Vec<f64> = (0..norm.dims()).map(|_| rng.random::<f64>()).collect();
            let hi: Vec<f64> = lo.iter().map(|x| x + (1.0 - x) * rng.random::<f64>()).collect();
            let f_lo = t.formula.instantiate(&norm.inverse(&lo)).unwrap();
            let f_hi = t.formula.instantiate(&norm.inverse(&hi)).unwrap();
            let v = NodeId(rng.random_range(0..2));
            let p_lo = satisfaction_probability(&prior, &f_lo, v).unwrap();
            let p_hi = satisfaction_probability(&prior, &f_hi, v).unwrap();
            pairs += 1;
            if p_lo > p_hi + PROB_TOL {
                violations.push(format!("{family}: P({f_lo}) = {p_lo} > P({f_hi}) = {p_hi}"));
                continue;
            }
            let (o_lo, o_hi) = (
                oracle::brute_probability(&prior, &f_lo, v),
                oracle::brute_probability(&prior, &f_hi, v),
            );
            // strict case: the oracle sees a real probability gap and the weaker event is possible
            if o_lo > 0.0 && o_hi - o_lo > PROB_TOL {
                strict += 1;
                if info_gain(p_lo, len) <= info_gain(p_hi, len) {
                    violations.push(format!("{family}: IG not strict for {f_lo} vs {f_hi}"));
                }
            }
        }
        summary.push(format!("{family}: {pairs} pairs, {strict} strict"));
    }
    let ok = violations.is_empty();
    report(
        5,
        ok,
        &format!(
            "{}; {} violations, {:.1}s",
            summary.join("; "),
            violations.len(),
            start.elapsed().as_secs_f64()
        ),
    );
    assert!(ok, "{violations:?}");
}

/// One node per value of `peaks`, constant series except a single peak.
fn peaked(peaks: &[f64], len: usize) -> Trajectory {
    let g = graph(peaks.len(), true);
    Trajectory::from_fn(g, len, |v, s| if s == 1 { peaks[v.0] } else { 0.0 }, |_, _| 1.0).unwrap()
}

#[test]
fn criterion_6_front_approximation() {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;

    // every node peaks at exactly 5, so the front is the single point c = 5
    let set = vec![peaked(&[5.0, 5.0, 5.0], 4), peaked(&[5.0, 5.0, 5.0], 5)];
    let template = parse("F (x >= ?c)").unwrap();
    let pbox = ParameterBox::for_formula(&template, vec![ParamRange::continuous("c", 0.0, 10.0)])
        .unwrap();
    let config = IdentifyConfig { p_th: 1.0, ..Default::default() };
    let r = identify_with(&template, &pbox, &config, &mut |f| coverage(&set, f), &mut |_| Ok(0.0))
        .unwrap();
    let norm = Normalization::for_template(&template, pbox).unwrap();
    let truth = vec![norm.map(&[("c".to_string(), 5.0)].into_iter().collect()).unwrap()];
    let found: Vec<Vec<f64>> = r.front.iter().map(|p| p.omega.clone()).collect();
    let d = directed_hausdorff(&found, &truth)
        .unwrap()
        .max(directed_hausdorff(&truth, &found).unwrap());
    let queries = r.queries.len();
    ok &= d <= EPSILON && queries <= 30 && !r.approximate;
    notes.push(format!("1-D: Hausdorff {d:.4} (tol {EPSILON}), {queries} queries (limit 30)"));

    // two parameters: a node needs a value of at least a and one of at most b
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let g = graph(25, false);
    let set: Vec<Trajectory> = (0..4)
        .map(|_| {
            Trajectory::from_fn(g.clone(), 6, |_, _| rng.random_range(0.0..1.0), |_, _| 1.0)
                .unwrap()
        })
        .collect();
    let template = parse("F (x >= ?a) & F (x <= ?b)").unwrap();
    let pbox = ParameterBox::for_formula(
        &template,
        vec![ParamRange::continuous("a", 0.0, 1.0), ParamRange::continuous("b", 0.0, 1.0)],
    )
    .unwrap();
    let config = IdentifyConfig { p_th: P_TH, ..Default::default() };
    let r = identify_with(&template, &pbox, &config, &mut |f| coverage(&set, f), &mut |_| Ok(0.0))
        .unwrap();
    let norm = Normalization::for_template(&template, pbox).unwrap();
    let front: Vec<Vec<f64>> = r.front.iter().map(|p| p.omega.clone()).collect();
    let certificate = directed_hausdorff(&r.knees, &front).unwrap();
    let gap = front_gap(&r.knees, &front, &norm.resolution());
    let mut reverified = 0;
    for p in &r.front {
        let f = template.instantiate(&norm.inverse(&p.omega)).unwrap();
        if coverage(&set, &f).unwrap() >= P_TH {
            reverified += 1;
        }
    }
    ok &= !r.approximate && certificate <= EPSILON && gap <= EPSILON && reverified == r.front.len();
    notes.push(format!(
        "2-D: certificate {certificate:.4}, knee gap {gap:.4}, {reverified}/{} front points re-verified, {} queries",
        r.front.len(),
        r.queries.len()
    ));
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 120.0;
    report(6, ok, &format!("{}; {secs:.1}s (limit 120s)", notes.join("; ")));
    assert!(ok);
}

#[test]
fn criterion_7_swarm_surrogate() {
    let start = Instant::now();
    let scenario = SwarmScenario { seed: 7, ..Default::default() };
    let train = gen_swarm(&scenario, 10).unwrap();
    let held = gen_swarm(&SwarmScenario { seed: 1007, ..scenario.clone() }, 10).unwrap();
    let prior = swarm_prior(&scenario, 2000, 18).unwrap();
    let stats = DataStats::from_trajectories(&train).unwrap();
    let mut library = templates::type_i();
    library.extend(templates::type_ii());
    let config = IdentifyConfig { p_th: P_TH, epsilon: EPSILON, ..Default::default() };
    let results: Vec<_> = library
        .par_iter()
        .map(|t| {
            let pbox = default_box(&t.formula, &stats).unwrap();
            (t.name.clone(), identify(&train, &prior, &t.formula, &pbox, &config).unwrap())
        })
        .collect();
    let (_, r) = results.iter().find(|(n, _)| n == "response-always").unwrap();
    let secs = start.elapsed().as_secs_f64();
    let Some((f, point)) = &r.best else {
        report(7, false, "response-always template infeasible");
        panic!("no formula");
    };
    let train_cov = coverage(&train, f).unwrap();
    let held_cov = coverage(&held, f).unwrap();
    let ig = point.average_ig;
    let (a, b) = (point.theta.get("a").unwrap(), point.theta.get("b").unwrap());
    let ok = train_cov == 1.0 && held_cov >= P_TH && ig > 0.0 && a > b && secs < 600.0;
    report(
        7,
        ok,
        &format!(
            "{f}: train coverage {train_cov:.4} (need 1), held-out {held_cov:.4} (need {P_TH}), \
             IG {ig:.4}, a = {a:.4} vs b = {b:.4} (need a > b), approximate {}, {secs:.1}s (limit 600s)",
            r.approximate
        ),
    );
    assert!(ok);
}

const C8_SEPARATOR: &str =
    "(F[>=2][<=6] E 5 via (y <= 1) : (x >= 0.8)) & (G[>=1][<=9] E 15 via (y <= 1) : (x <= 0.9))";

fn labeled(items: Vec<(Trajectory, i8)>) -> LabeledSet {
    LabeledSet::new(items.into_iter().map(|(t, l)| (t, Some(l))).collect()).unwrap()
}

#[test]
fn criterion_8_planted_classification() {
    let g = graph(20, true);
    let prior = PriorModel::homogeneous(
        g.clone(),
        10,
        uniform_bins(0.0, 1.0, 10),
        vec![0.1; 10],
        vec![1.0; g.edge_count()],
    )
    .unwrap();
    let sep = parse(C8_SEPARATOR).unwrap();
    let mut successes = 0;
    let mut slowest = Duration::ZERO;
    let mut lines = Vec::new();
    for seed in 0..10u64 {
        let start = Instant::now();
        let train = labeled(gen_planted(&sep, &prior, 5, 5, 100 + seed).unwrap());
        let held = labeled(gen_planted(&sep, &prior, 5, 5, 200 + seed).unwrap());
        let stats = DataStats::from_trajectories(train.trajectories()).unwrap();
        let library: Vec<_> = templates::all_directions()
            .into_iter()
            .map(|t| {
                let b = default_box(&t.formula, &stats).unwrap();
                (t, b)
            })
            .collect();
        let mut cfg = ClassifierConfig::default();
        cfg.pso.seed = seed;
        let r = infer_classifier_with(&library, &cfg, &mut |fs| {
            par::misclassification_rates(&train, fs)
        })
        .unwrap();
        let held_mr = misclassification_rate(&held, &r.formula).unwrap();
        let elapsed = start.elapsed();
        slowest = slowest.max(elapsed);
        let pass = r.success
            && r.mr <= 0.02
            && held_mr <= 0.10
            && elapsed <= Duration::from_secs(15 * 60);
        successes += usize::from(pass);
        lines.push(format!(
            "seed {seed}: train {:.3} held-out {held_mr:.3} size {} {:.0}s",
            r.mr,
            r.size,
            elapsed.as_secs_f64()
        ));
    }
    eprintln!("{}", lines.join("\n"));
    let ok = successes >= 9;
    report(
        8,
        ok,
        &format!(
            "{successes}/10 seeds with train MR <= 0.02 and held-out MR <= 0.10 (need 9), slowest {:.0}s (limit 900s)",
            slowest.as_secs_f64()
        ),
    );
    assert!(ok, "{lines:?}");
}

#[test]
fn criterion_9_linear_in_horizon() {
    // bounded operators only, so the automaton does not depend on the horizon
    let f = parse("G[<=2] ((x >= 0.5) -> F[<=1] E 1 via (y <= 1) : (x <= 0.25))").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g = graph(4, true);
    let run = |len: usize, rng: &mut ChaCha8Rng| {
        let prior = two_bin_prior(rng, &g, len);
        let mut c = Counters::default();
        for v in g.nodes() {
            satisfaction_probability_counted(&prior, &f, v, &mut c).unwrap();
        }
        (c.transition_evals, to_dfa(&f, len).unwrap().dfa.state_count())
    };
    let (short, k1) = run(10, &mut rng);
    let (long, k2) = run(20, &mut rng);
    let ratio = long as f64 / short as f64;
    let ok = k1 == k2 && (ratio - 2.0).abs() <= 0.2;
    report(
        9,
        ok,
        &format!("transition evaluations {short} -> {long} (ratio {ratio:.3}, want 2 +- 10%), states {k1} / {k2}"),
    );
    assert!(ok);
}
