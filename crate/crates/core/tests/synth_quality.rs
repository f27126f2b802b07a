use std::collections::BTreeSet;

use actortrace_core::actorgraph::{build_actor_graph, GraphKind};
use actortrace_core::chainstore::{parse_chain, write_chain};
use actortrace_core::clustering::local_cluster;
use actortrace_core::features::{compute_features, summarize_by_class};
use actortrace_core::synth::{generate_chain, SynthConfig, SynthData};
use actortrace_core::txgraph::{build_tx_subgraph, is_coinjoin};
use actortrace_core::{ActorGraph, FeatureMatrix, SubgraphLimits};

fn data() -> SynthData {
    generate_chain(&SynthConfig::default()).unwrap()
}

/// Pairwise precision and recall of local clusters against wallet
/// ownership, over user (untagged, non-placeholder) addresses of every
/// labelled subgraph.
#[test]
fn clustering_against_wallet_ground_truth() {
    let d = data();
    let (mut tp, mut fp, mut fneg) = (0u64, 0u64, 0u64);
    for (seed, _) in &d.labels {
        let sub = build_tx_subgraph(&d.chain, seed.as_str(), 144, &d.tags, SubgraphLimits::default()).unwrap();
        let cm = local_cluster(&sub, &d.chain).unwrap();
        let users: Vec<_> = cm
            .actors()
            .flat_map(|(id, m)| m.iter().map(move |a| (id, a)))
            .filter(|(_, a)| !a.is_placeholder() && !d.tags.is_tagged(a.as_str()))
            .collect();
        for (i, (ca, a)) in users.iter().enumerate() {
            for (cb, b) in &users[i + 1..] {
                match (ca == cb, d.wallets[*a] == d.wallets[*b]) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => fneg += 1,
                    (false, false) => {}
                }
            }
        }
    }
    let precision = tp as f64 / (tp + fp) as f64;
    let recall = tp as f64 / (tp + fneg) as f64;
    assert!(precision >= 0.9, "precision {precision}");
    assert!(recall >= 0.6, "recall {recall}");
}

#[test]
fn chain_parses_and_coinjoins_are_planted_only() {
    let d = data();
    let mut buf = Vec::new();
    write_chain(&d.chain, &mut buf).unwrap();
    assert_eq!(parse_chain(buf.as_slice()).unwrap().len(), d.chain.len());
    for tx in d.chain.transactions() {
        // generated mixes are the only spends with more than two outputs
        if !tx.is_coinbase {
            assert_eq!(is_coinjoin(tx), tx.outputs.len() > 2, "{}", tx.txid);
            assert!(tx.output_total() <= tx.input_total());
        }
    }
    let seeds: BTreeSet<_> = d.labels.iter().map(|(a, _)| a).collect();
    assert_eq!(seeds.len(), 270);
}

#[test]
fn planted_signal_separates_classes() {
    let d = data();
    let mut m = FeatureMatrix::full(GraphKind::Ego1Simple);
    for (seed, class) in &d.labels {
        let sub = build_tx_subgraph(&d.chain, seed.as_str(), 144, &d.tags, SubgraphLimits::default()).unwrap();
        let cm = local_cluster(&sub, &d.chain).unwrap();
        let g: ActorGraph = build_actor_graph(&sub, &cm, &d.chain).unwrap();
        let mut fv = compute_features(&g.view(GraphKind::Ego1Simple).unwrap(), GraphKind::Ego1Simple).unwrap();
        fv.label = Some(*class);
        m.push(seed.as_str(), &fv).unwrap();
    }
    let summary = summarize_by_class(&m).unwrap();
    let separated = summary.iter().any(|a| {
        summary.iter().any(|b| {
            a.feature == b.feature
                && a.class != b.class
                && (a.median - b.median).abs() >= (a.p75 - a.p25).max(b.p75 - b.p25).max(f64::MIN_POSITIVE)
        })
    });
    assert!(separated);
}
