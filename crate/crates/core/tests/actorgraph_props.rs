mod common;

use std::collections::{BTreeMap, BTreeSet};

use actortrace_core::actorgraph::{allocate_weights, build_actor_graph, ego_graph, simplify, ActorEdge, GraphKind};
use actortrace_core::clustering::local_cluster;
use actortrace_core::txgraph::build_tx_subgraph;
use actortrace_core::{ActorGraph, ActorId, SubgraphLimits};
use proptest::prelude::*;
use rand::Rng;

fn random_graph(seed: u64, n: u32, m: usize) -> ActorGraph {
    let mut r = common::rng(seed);
    let edges = (0..m)
        .map(|_| ActorEdge {
            src: ActorId(r.random_range(0..n)),
            dst: ActorId(r.random_range(0..n)),
            weight: r.random_range(0.0..5.0),
            tx: None,
        })
        .collect();
    ActorGraph::new((0..n).map(ActorId), ActorId(r.random_range(0..n)), edges).unwrap()
}

/// Hop sets grown by rescanning every edge once per hop.
fn naive_ego(g: &ActorGraph, k: usize) -> BTreeSet<ActorId> {
    let mut set = BTreeSet::from([g.center()]);
    for _ in 0..k {
        let mut next = set.clone();
        for e in g.edges() {
            if set.contains(&e.src) {
                next.insert(e.dst);
            }
            if set.contains(&e.dst) {
                next.insert(e.src);
            }
        }
        set = next;
    }
    set
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn ego_membership_matches_oracle(seed in any::<u64>(), n in 1u32..=500, density in 0.5f64..3.0) {
        let g = random_graph(seed, n, (n as f64 * density) as usize);
        let mut prev = BTreeSet::new();
        for k in 1..=3 {
            let ego = ego_graph(&g, k).unwrap();
            let want = naive_ego(&g, k);
            prop_assert_eq!(ego.vertices(), &want);
            prop_assert_eq!(ego.center(), g.center());
            let induced = g.edges().iter().filter(|e| want.contains(&e.src) && want.contains(&e.dst)).count();
            prop_assert_eq!(ego.edge_count(), induced);
            prop_assert!(prev.is_subset(ego.vertices()));
            prev = ego.vertices().clone();
        }
        prop_assert!(ego_graph(&g, 0).is_err());
        prop_assert!(ego_graph(&g, 4).is_err());
    }

    #[test]
    fn simplify_is_idempotent_and_preserves_flow(seed in any::<u64>(), n in 1u32..40) {
        let g = random_graph(seed, n, 3 * n as usize);
        let s = simplify(&g);
        prop_assert_eq!(&simplify(&s), &s);
        prop_assert_eq!(s.vertices(), g.vertices());
        prop_assert!(s.edges().iter().all(|e| e.src != e.dst));
        let pairs: BTreeSet<_> = s.edges().iter().map(|e| (e.src, e.dst)).collect();
        prop_assert_eq!(pairs.len(), s.edge_count());
        let non_loop: f64 = g.edges().iter().filter(|e| e.src != e.dst).map(|e| e.weight).sum();
        prop_assert!((s.total_weight() - non_loop).abs() <= 1e-9 * non_loop.max(1.0));
    }

    #[test]
    fn conservation_on_random_chains(seed in any::<u64>()) {
        let index = common::random_chain(seed, 120, 30, 2);
        for tx in index.transactions() {
            let outs: f64 = tx.outputs.iter().map(|o| o.amount as f64 / 1e8).sum();
            match allocate_weights::<f64>(tx) {
                Ok(flows) => {
                    let total: f64 = flows.iter().map(|f| f.2).sum();
                    prop_assert!((total - outs).abs() <= 1e-9 * outs.max(1e-300));
                    prop_assert!(flows.iter().all(|f| f.2 >= 0.0 && f.2.is_finite()));
                }
                Err(_) => prop_assert!(tx.is_coinbase || tx.input_total() == 0),
            }
        }

        let seed_addr = index.transactions()[0].addresses().next().unwrap().clone();
        let sub = build_tx_subgraph(&index, seed_addr.as_str(), 10, &Default::default(), SubgraphLimits::default()).unwrap();
        let cm = local_cluster(&sub, &index).unwrap();
        let g: ActorGraph = build_actor_graph(&sub, &cm, &index).unwrap();
        let mut per_tx: BTreeMap<&str, f64> = BTreeMap::new();
        for e in g.edges() {
            *per_tx.entry(e.tx.as_ref().unwrap().as_str()).or_default() += e.weight;
        }
        let mut chain_total = 0.0;
        for id in &sub.nodes {
            let tx = index.get(id.as_str()).unwrap();
            let outs: f64 = tx.outputs.iter().map(|o| o.amount as f64 / 1e8).sum();
            chain_total += outs;
            let got = per_tx.get(id.as_str()).copied().unwrap_or(0.0);
            prop_assert!((got - outs).abs() <= 1e-9 * outs.max(1e-300), "{} vs {}", got, outs);
        }
        prop_assert!((g.total_weight() - chain_total).abs() <= 1e-6);

        for kind in GraphKind::ALL {
            let v = g.view(kind).unwrap();
            prop_assert!(v.vertices().contains(&g.center()));
            prop_assert!(v.edges().iter().all(|e| e.weight >= 0.0 && e.weight.is_finite()));
        }
    }
}

#[test]
fn unit_weights_make_closeness_agree() {
    use actortrace_core::features::centrality::{closeness, CompactGraph, Mode};
    for seed in 0..30 {
        let g = random_graph(seed, 30, 60);
        let unit = ActorGraph::new(
            g.vertices().iter().copied(),
            g.center(),
            g.edges().iter().map(|e| ActorEdge { weight: 1.0, ..e.clone() }).collect(),
        )
        .unwrap();
        let (cg, _, _) = CompactGraph::from_actor_graph(&unit);
        for mode in [Mode::In, Mode::Out, Mode::All] {
            assert_eq!(closeness(&cg, mode, true), closeness(&cg, mode, false));
        }
    }
}
