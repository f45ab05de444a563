use std::sync::Arc;

use gtl::datagen::{
    gen_planted, gen_swarm, sample_prior, swarm_constraint, swarm_prior, uniform_bins, GenError,
    SwarmScenario,
};
use gtl_core::eval::{coverage, misclassification_rate, LabeledSet};
use gtl_core::formula::parse;
use gtl_core::graph::NodeId;
use gtl_core::prob::PriorModel;
use gtl_core::LabeledGraph;

#[test]
fn swarm_is_reproducible_and_constrained() {
    let sc = SwarmScenario { seed: 5, ..Default::default() };
    let a = gen_swarm(&sc, 4).unwrap();
    let b = gen_swarm(&sc, 4).unwrap();
    assert_eq!(a, b);
    let c = gen_swarm(&SwarmScenario { seed: 6, ..Default::default() }, 4).unwrap();
    assert_ne!(a, c);
    assert_eq!(coverage(&a, &swarm_constraint()).unwrap(), 1.0);
    for t in &a {
        assert_eq!(t.graph().node_count(), 9);
        for step in 0..t.len() {
            let total: f64 = t.graph().nodes().map(|v| t.node_label(v, step)).sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn swarm_prior_covers_the_unit_interval() {
    let prior = swarm_prior(&SwarmScenario::default(), 200, 18).unwrap();
    assert_eq!(prior.bins().len(), 18);
    assert_eq!(prior.bins()[0].0, 0.0);
    assert_eq!(prior.bins()[17].1, 1.0);
    assert_eq!(prior.len(), 12);
}

#[test]
fn prior_samples_follow_the_histogram() {
    let g = Arc::new(LabeledGraph::new(["v"], []).unwrap());
    let pmf = vec![0.1, 0.2, 0.3, 0.4];
    let prior =
        PriorModel::homogeneous(g, 3, uniform_bins(0.0, 1.0, 4), pmf.clone(), vec![]).unwrap();
    let n = 4000;
    let set = sample_prior(&prior, n, 9);
    assert_eq!(set, sample_prior(&prior, n, 9));
    let mut counts = [0usize; 4];
    for t in &set {
        for step in 0..3 {
            let x = t.node_label(NodeId(0), step);
            assert!((0.0..1.0).contains(&x));
            counts[(x * 4.0) as usize] += 1;
        }
    }
    let total = (3 * n) as f64;
    for (c, p) in counts.iter().zip(&pmf) {
        let sd = (p * (1.0 - p) / total).sqrt();
        assert!((*c as f64 / total - p).abs() < 5.0 * sd, "{counts:?}");
    }
}

fn small_prior() -> PriorModel {
    let g = Arc::new(LabeledGraph::complete(["a", "b", "c", "d"]).unwrap());
    let edges = vec![1.0; g.edge_count()];
    PriorModel::homogeneous(g, 4, uniform_bins(0.0, 1.0, 4), vec![0.25; 4], edges).unwrap()
}

#[test]
fn planted_classes_follow_the_separator() {
    let prior = small_prior();
    let sep = parse("F[<=1] (x >= 0.6) & G (x <= 0.9)").unwrap();
    let data = gen_planted(&sep, &prior, 6, 6, 3).unwrap();
    assert_eq!(data.iter().filter(|(_, l)| *l == 1).count(), 6);
    assert_eq!(data.iter().filter(|(_, l)| *l == -1).count(), 6);
    assert_eq!(data, gen_planted(&sep, &prior, 6, 6, 3).unwrap());
    let set = LabeledSet::new(data.into_iter().map(|(t, l)| (t, Some(l))).collect()).unwrap();
    assert!(misclassification_rate(&set, &sep).unwrap() <= 0.05);
}

#[test]
fn unreachable_classes_are_reported() {
    let prior = small_prior();
    assert!(matches!(
        gen_planted(&gtl_core::Formula::True, &prior, 1, 1, 0),
        Err(GenError::Config(_))
    ));
    assert!(gen_planted(&gtl_core::Formula::True, &prior, 2, 0, 0).is_ok());
    assert!(matches!(
        gen_planted(&parse("x >= ?c").unwrap(), &prior, 1, 1, 0),
        Err(GenError::Core(_))
    ));
    // never satisfiable, but only the sampler can find out
    assert!(matches!(
        gen_planted(&parse("x >= 5").unwrap(), &prior, 1, 0, 0),
        Err(GenError::AcceptanceFloor { .. })
    ));
}
