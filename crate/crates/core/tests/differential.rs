//! Library against the reference implementations in `oracle`.

mod oracle;

use std::sync::Arc;

use gtl_core::automata::{to_dfa, run_word};
use gtl_core::eval::{sat_table, sat};
use gtl_core::formula::parse;
use gtl_core::graph::NodeId;
use gtl_core::identify::knee_points;
use gtl_core::prob::{poisson_binomial_tail, satisfaction_probability, PriorModel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oracle::gen;

#[test]
fn table_matches_naive_recursion() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for round in 0..400 {
        let n = rng.random_range(1..6);
        let len = rng.random_range(1..6);
        let graph = gen::graph(&mut rng, n);
        let g = gen::trajectory(&mut rng, &graph, len);
        let text = gen::formula(&mut rng, 4, len, false);
        let f = parse(&text).unwrap();
        let t = sat_table(&g, &f).unwrap();
        for v in graph.nodes() {
            for step in 0..len {
                assert_eq!(
                    t.get(v, step),
                    oracle::naive_sat(&g, &f, v, step),
                    "round {round}: `{text}` at node {} step {step}",
                    v.0
                );
            }
        }
    }
}

#[test]
fn automaton_agrees_with_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checked = 0;
    while checked < 300 {
        let n = rng.random_range(1..5);
        let len = rng.random_range(1..5);
        let graph = gen::graph(&mut rng, n);
        let text = gen::formula(&mut rng, 3, len, true);
        let f = parse(&text).unwrap();
        // formulas outside both fragments have no automaton
        let Ok(a) = to_dfa(&f, len) else { continue };
        checked += 1;
        for _ in 0..5 {
            let g = gen::trajectory(&mut rng, &graph, len);
            for v in graph.nodes() {
                let word = a.label_word(&g, v);
                let accepted = run_word(&a.dfa, &word).unwrap() != a.negated;
                assert_eq!(accepted, sat(&g, &f, v, 1).unwrap(), "`{text}` at node {}", v.0);
            }
        }
    }
}

fn two_bin_prior(rng: &mut ChaCha8Rng, graph: &Arc<gtl_core::LabeledGraph>, len: usize) -> PriorModel {
    let pmf = graph
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
    let edges = graph.edges().map(|_| gen::GRID[rng.random_range(0..5)]).collect();
    PriorModel::new(graph.clone(), len, vec![(0.0, 0.5), (0.5, 1.0)], pmf, edges).unwrap()
}

#[test]
fn probabilities_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut checked = 0;
    while checked < 150 {
        let n = rng.random_range(1..4);
        let len = rng.random_range(1..4);
        let graph = gen::graph(&mut rng, n);
        let prior = two_bin_prior(&mut rng, &graph, len);
        // type-I formulas, or one neighbor quantifier over a type-I body
        let mut text = gen::formula(&mut rng, 3, len, true);
        if rng.random_bool(0.3) {
            text = format!("E {} via (y <= {}) : ({text})", rng.random_range(0..3), gen::GRID[rng.random_range(0..5)]);
        }
        let f = parse(&text).unwrap();
        let v = NodeId(rng.random_range(0..n));
        let Ok(p) = satisfaction_probability(&prior, &f, v) else { continue };
        checked += 1;
        let want = oracle::brute_probability(&prior, &f, v);
        assert!((p - want).abs() <= 1e-10, "`{text}`: {p} vs {want}");
    }
}

#[test]
fn knees_match_grid_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..300 {
        let dims = rng.random_range(1..4);
        let count = rng.random_range(0..6);
        let unsat: Vec<Vec<f64>> = (0..count)
            .map(|_| (0..dims).map(|_| (rng.random_range(0..9) as f64) / 8.0).collect())
            .collect();
        let mut got = knee_points(&unsat, dims);
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got, oracle::grid_knees(&unsat, dims), "unsat {unsat:?}");
    }
}

proptest! {
    #[test]
    fn tail_matches_enumeration(ps in prop::collection::vec(0.0f64..=1.0, 0..9), n in 0usize..10) {
        let got = poisson_binomial_tail(&ps, n);
        prop_assert!((got - oracle::brute_tail(&ps, n)).abs() <= 1e-12);
    }
}
