//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any of them fails.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::time::{Duration, Instant};

use actortrace_cli::config::PipelineConfig;
use actortrace_cli::pipeline::{build_features, train, Chain};
use actortrace_core::actorgraph::{build_actor_graph, GraphKind};
use actortrace_core::chainstore::{OutputKind, ServiceTag, TxInput, TxOutput};
use actortrace_core::clustering::local_cluster;
use actortrace_core::features::centrality::{
    closeness, coreness, hits, local_clustering, pagerank, CompactGraph, Mode, PageRankParams,
};
use actortrace_core::synth::{generate_chain, SynthConfig};
use actortrace_core::txgraph::{build_tx_subgraph, is_coinjoin};
use actortrace_core::{
    ActorGraph, Address, ChainIndex, ClusterMap, ServiceTagRegistry, SubgraphLimits, Transaction, TxSubgraph, Txid,
};
use actortrace_learn::{group_folds, stack_kind, BaseKind, LabeledDataset};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- fixtures

fn random_chain(seed: u64, n_tx: usize, pool: usize, max_gap: u64) -> ChainIndex {
    let mut r = rng(seed);
    let pool: Vec<Address> = (0..pool).map(|i| Address::new(format!("p{i}")).unwrap()).collect();
    let (mut fresh, mut height, mut index) = (0usize, 0u64, 0u32);
    let mut txs = Vec::with_capacity(n_tx);
    for t in 0..n_tx {
        if t > 0 {
            let gap = r.random_range(0..=max_gap);
            if gap == 0 {
                index += 1;
            } else {
                height += gap;
                index = 0;
            }
        }
        let txid = Txid::new(format!("{t:064x}"));
        let coinbase = r.random_bool(0.1);
        let inputs: Vec<TxInput> = if coinbase {
            Vec::new()
        } else {
            (0..r.random_range(1..=5))
                .map(|_| TxInput { address: pool.choose(&mut r).unwrap().clone(), amount: r.random_range(0..100_000_000) })
                .collect()
        };
        let budget: i64 = if coinbase { 5_000_000_000 } else { inputs.iter().map(|i| i.amount).sum() };
        let n_out = r.random_range(1..=8);
        let equal = r.random_bool(0.2);
        let share = budget / (n_out as i64 + 1);
        let outputs = (0..n_out)
            .map(|pos| {
                let amount = if equal || share == 0 { share } else { r.random_range(0..=share) };
                let roll: f64 = r.random();
                let (address, kind) = if roll < 0.05 {
                    (Address::burn(), OutputKind::OpReturn)
                } else if roll < 0.1 {
                    (Address::dummy(&txid, pos), OutputKind::NonStandard)
                } else if roll < 0.3 {
                    fresh += 1;
                    (Address::new(format!("f{fresh}")).unwrap(), OutputKind::Standard)
                } else {
                    (pool.choose(&mut r).unwrap().clone(), OutputKind::Standard)
                };
                TxOutput { address, amount, kind }
            })
            .collect();
        txs.push(Transaction { txid, height, index_in_block: index, inputs, outputs, is_coinbase: coinbase });
    }
    ChainIndex::from_transactions(txs).unwrap()
}

fn random_tags(seed: u64, pool: usize, p: f64) -> ServiceTagRegistry {
    let mut r = rng(seed ^ 0xfeed);
    let mut tags = ServiceTagRegistry::new();
    for i in 0..pool {
        if r.random_bool(p) {
            let tag = if r.random_bool(0.5) { ServiceTag::Exchange } else { ServiceTag::Gambling };
            tags.insert(Address::new(format!("p{i}")).unwrap(), tag).unwrap();
        }
    }
    tags
}

fn random_seed_address(index: &ChainIndex, r: &mut ChaCha8Rng) -> Option<Address> {
    let txs = index.transactions();
    let t = &txs[r.random_range(0..txs.len())];
    t.addresses().find(|a| !a.is_placeholder()).cloned()
}

// ---------------------------------------------------------------- coinjoin

/// Decision table with the four rules spelled out as frequency counts.
fn coinjoin_table(n_in: usize, outs: &[i64]) -> bool {
    let n_out = outs.len();
    if n_in < 2 || n_out < 3 {
        return false;
    }
    if 2 * n_in < n_out {
        return false;
    }
    let mut freq: HashMap<i64, usize> = HashMap::new();
    for &v in outs {
        *freq.entry(v).or_default() += 1;
    }
    let top = freq.values().copied().max().unwrap_or(0);
    if n_out < 6 {
        freq.len() == 1
    } else {
        top >= 5
    }
}

fn shaped(n_in: usize, outs: &[i64]) -> Transaction {
    Transaction {
        txid: Txid::new("cj"),
        height: 0,
        index_in_block: 0,
        inputs: (0..n_in).map(|i| TxInput { address: Address::new(format!("i{i}")).unwrap(), amount: 1 << 40 }).collect(),
        outputs: outs
            .iter()
            .enumerate()
            .map(|(i, &v)| TxOutput { address: Address::new(format!("o{i}")).unwrap(), amount: v, kind: OutputKind::Standard })
            .collect(),
        is_coinbase: n_in == 0,
    }
}

fn random_amounts(r: &mut ChaCha8Rng, n: usize) -> Vec<i64> {
    let unit = 10_000_000;
    match r.random_range(0..3) {
        0 => vec![unit; n],
        1 => {
            let equal = r.random_range(0..=n);
            let mut v: Vec<i64> = (0..n).map(|i| if i < equal { unit } else { r.random_range(1..unit) }).collect();
            v.rotate_left(if n > 0 { r.random_range(0..n) } else { 0 });
            v
        }
        _ => (0..n).map(|_| r.random_range(1..=3) * unit).collect(),
    }
}

fn check_coinjoin() -> Outcome {
    let mut r = rng(1);
    let shapes: Vec<(usize, usize)> = (0..=10).flat_map(|i| (0..=10).map(move |o| (i, o))).collect();
    let mut disagree = 0;
    let cases = 1_000.max(shapes.len());
    for c in 0..cases {
        let (n_in, n_out) = shapes[c % shapes.len()];
        let outs = random_amounts(&mut r, n_out);
        if is_coinjoin(&shaped(n_in, &outs)) != coinjoin_table(n_in, &outs) {
            disagree += 1;
        }
    }
    outcome(disagree == 0, format!("{cases} cases over {} shapes, {disagree} disagreements", shapes.len()))
}

// ---------------------------------------------------------------- clustering

type Partition = BTreeSet<BTreeSet<Address>>;

/// Pairwise label merging, rescanned until nothing changes.
fn naive_partition(sub: &TxSubgraph, index: &ChainIndex) -> Partition {
    let txs = index.transactions();
    let mut pos: Vec<usize> = sub.nodes.iter().map(|t| index.lookup(t.as_str()).unwrap().idx()).collect();
    pos.sort_unstable();
    let mut label: BTreeMap<Address, Address> = BTreeMap::new();
    let mut pairs: Vec<(Address, Address)> = Vec::new();
    for &p in &pos {
        let tx = &txs[p];
        for a in tx.addresses() {
            label.insert(a.clone(), a.clone());
        }
        if tx.is_coinbase || coinjoin_table(tx.inputs.len(), &tx.outputs.iter().map(|o| o.amount).collect::<Vec<_>>()) {
            continue;
        }
        let mut joined: Vec<&Address> = tx.inputs.iter().map(|i| &i.address).filter(|a| !a.is_placeholder()).collect();
        let outs: BTreeSet<&Address> = tx.outputs.iter().map(|o| &o.address).filter(|a| !a.is_placeholder()).collect();
        let fresh: Vec<&Address> = outs
            .iter()
            .copied()
            .filter(|a| !txs[..p].iter().any(|earlier| earlier.addresses().any(|b| b == *a)))
            .collect();
        if fresh.len() == 1 {
            joined.push(fresh[0]);
        }
        for w in joined.windows(2) {
            pairs.push((w[0].clone(), w[1].clone()));
        }
    }
    loop {
        let mut changed = false;
        for (a, b) in &pairs {
            let (la, lb) = (label[a].clone(), label[b].clone());
            if la != lb {
                let low = la.clone().min(lb.clone());
                for v in label.values_mut() {
                    if *v == la || *v == lb {
                        *v = low.clone();
                    }
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut groups: BTreeMap<Address, BTreeSet<Address>> = BTreeMap::new();
    for (a, l) in label {
        groups.entry(l).or_default().insert(a);
    }
    groups.into_values().collect()
}

fn partition_of(cm: &ClusterMap) -> Partition {
    cm.actors().map(|(_, m)| m.iter().cloned().collect()).collect()
}

fn check_clustering() -> Outcome {
    let (mut equal, mut largest, mut total) = (0, 0, 0);
    let mut seed = 0u64;
    while total < 100 {
        seed += 1;
        let index = random_chain(seed, 300, 40, 1);
        let tags = random_tags(seed, 40, 0.05);
        let mut r = rng(seed);
        let Some(addr) = random_seed_address(&index, &mut r) else { continue };
        let window = r.random_range(5..120);
        let sub = build_tx_subgraph(&index, addr.as_str(), window, &tags, SubgraphLimits::default()).unwrap();
        if sub.len() > 200 {
            continue;
        }
        total += 1;
        largest = largest.max(sub.len());
        let cm = local_cluster(&sub, &index).unwrap();
        if partition_of(&cm) == naive_partition(&sub, &index) {
            equal += 1;
        }
    }
    outcome(equal == total, format!("{equal}/{total} partitions equal, largest subgraph {largest} tx"))
}

// ---------------------------------------------------------------- conservation

fn check_conservation(data: &actortrace_core::synth::SynthData) -> Outcome {
    let index = &data.chain;
    let txs = index.transactions();
    let first = txs[0].addresses().next().unwrap().clone();
    let sub = TxSubgraph {
        seed: first,
        seed_tx: txs[0].txid.clone(),
        window: u64::MAX,
        nodes: txs.iter().map(|t| t.txid.clone()).collect(),
        edges: BTreeSet::new(),
    };
    let cm = local_cluster(&sub, index).unwrap();
    let g: ActorGraph = build_actor_graph(&sub, &cm, index).unwrap();
    let mut per_tx: HashMap<&str, f64> = HashMap::new();
    for e in g.edges() {
        *per_tx.entry(e.tx.as_ref().unwrap().as_str()).or_default() += e.weight;
    }
    let (mut worst, mut chain_total, mut bad) = (0.0f64, 0.0, 0);
    for tx in txs {
        let outs: f64 = tx.outputs.iter().map(|o| o.amount as f64 / 1e8).sum();
        chain_total += outs;
        let got = per_tx.get(tx.txid.as_str()).copied().unwrap_or(0.0);
        let rel = if outs > 0.0 { (got - outs).abs() / outs } else { got.abs() };
        worst = worst.max(rel);
        if rel > 1e-9 {
            bad += 1;
        }
    }
    let chain_err = (g.total_weight() - chain_total).abs();
    outcome(
        txs.len() >= 10_000 && bad == 0 && chain_err <= 1e-6,
        format!("{} tx, worst relative error {worst:.2e}, chain total error {chain_err:.2e} BTC", txs.len()),
    )
}

// ---------------------------------------------------------------- window

fn check_window() -> Outcome {
    let mut violations = 0;
    let mut built = 0;
    let mut r = rng(7);
    let chains: Vec<(ChainIndex, ServiceTagRegistry)> =
        (0..10).map(|s| (random_chain(100 + s, 400, 60, 3), random_tags(100 + s, 60, 0.1))).collect();
    while built < 1_000 {
        let (index, tags) = chains.choose(&mut r).unwrap();
        let Some(addr) = random_seed_address(index, &mut r) else { continue };
        let n = r.random_range(1..40u64);
        let sub = build_tx_subgraph(index, addr.as_str(), n, tags, SubgraphLimits::default()).unwrap();
        built += 1;
        let h = index.first_transaction_of(addr.as_str()).unwrap().height;
        violations += sub.nodes.iter().filter(|t| index.get(t.as_str()).unwrap().height.abs_diff(h) > n).count();

        let mut adj: HashMap<&Txid, Vec<&Txid>> = HashMap::new();
        for e in &sub.edges {
            adj.entry(&e.from).or_default().push(&e.to);
            adj.entry(&e.to).or_default().push(&e.from);
        }
        let mut seen: BTreeSet<&Txid> = BTreeSet::from([&sub.seed_tx]);
        let mut queue = VecDeque::from([&sub.seed_tx]);
        while let Some(t) = queue.pop_front() {
            for &u in adj.get(t).map(Vec::as_slice).unwrap_or(&[]) {
                if seen.insert(u) {
                    queue.push_back(u);
                }
            }
        }
        violations += sub.nodes.iter().filter(|t| !seen.contains(t)).count();
    }
    outcome(violations == 0, format!("{built} seeds, {violations} violations"))
}

// ---------------------------------------------------------------- centrality

fn unit(n: usize, edges: &[(usize, usize)]) -> CompactGraph<f64> {
    CompactGraph::new(n, edges.iter().map(|&(s, d)| (s, d, 1.0)).collect())
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

struct Fixture {
    name: &'static str,
    g: CompactGraph<f64>,
    closeness: [Vec<f64>; 3],
    coreness: [Vec<usize>; 3],
    clustering: Vec<f64>,
    hub: Vec<f64>,
    authority: Vec<f64>,
}

fn fixtures() -> Vec<Fixture> {
    let k4: Vec<(usize, usize)> = (0..4).flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    vec![
        Fixture {
            name: "path",
            g: unit(3, &[(0, 1), (1, 2)]),
            closeness: [vec![0.0, 0.5, 2.0 / 3.0], vec![2.0 / 3.0, 0.5, 0.0], vec![2.0 / 3.0, 1.0, 2.0 / 3.0]],
            coreness: [vec![0, 0, 0], vec![0, 0, 0], vec![1, 1, 1]],
            clustering: vec![0.0; 3],
            hub: vec![1.0, 1.0, 0.0],
            authority: vec![0.0, 1.0, 1.0],
        },
        Fixture {
            name: "star",
            g: unit(4, &[(0, 1), (0, 2), (0, 3)]),
            closeness: [vec![0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], vec![1.0, 0.0, 0.0, 0.0], vec![1.0, 0.6, 0.6, 0.6]],
            coreness: [vec![0; 4], vec![0; 4], vec![1; 4]],
            clustering: vec![0.0; 4],
            hub: vec![1.0, 0.0, 0.0, 0.0],
            authority: vec![0.0, 1.0, 1.0, 1.0],
        },
        Fixture {
            name: "cycle",
            g: unit(3, &[(0, 1), (1, 2), (2, 0)]),
            closeness: [vec![2.0 / 3.0; 3], vec![2.0 / 3.0; 3], vec![1.0; 3]],
            coreness: [vec![1; 3], vec![1; 3], vec![2; 3]],
            clustering: vec![1.0; 3],
            hub: vec![1.0; 3],
            authority: vec![1.0; 3],
        },
        Fixture {
            name: "K4",
            g: unit(4, &k4),
            closeness: [vec![1.0; 4], vec![1.0; 4], vec![1.0; 4]],
            coreness: [vec![3; 4], vec![3; 4], vec![6; 4]],
            clustering: vec![1.0; 4],
            hub: vec![1.0; 4],
            authority: vec![1.0; 4],
        },
        Fixture {
            name: "triangle with tail",
            g: unit(4, &[(0, 1), (1, 2), (2, 0), (2, 3)]),
            closeness: [
                vec![4.0 / 9.0, 4.0 / 9.0, 4.0 / 9.0, 0.5],
                vec![0.5, 0.6, 0.75, 0.0],
                vec![0.75, 0.75, 1.0, 0.6],
            ],
            coreness: [vec![1, 1, 1, 1], vec![1, 1, 1, 0], vec![2, 2, 2, 1]],
            clustering: vec![1.0, 1.0, 1.0 / 3.0, 0.0],
            hub: vec![0.0, 0.0, 1.0, 0.0],
            authority: vec![1.0, 0.0, 0.0, 1.0],
        },
    ]
}

fn pagerank_oracle(g: &CompactGraph<f64>, d: f64) -> Vec<f64> {
    let n = g.n;
    let mut w = vec![vec![0.0; n]; n];
    for &(s, t, x) in &g.edges {
        w[s][t] += x;
    }
    let mut google = vec![vec![0.0; n]; n];
    for s in 0..n {
        let out: f64 = w[s].iter().sum();
        for t in 0..n {
            let step = if out > 0.0 { w[s][t] / out } else { 1.0 / n as f64 };
            google[t][s] = d * step + (1.0 - d) / n as f64;
        }
    }
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..2_000 {
        x = google.iter().map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum()).collect();
    }
    x
}

fn check_centrality() -> Outcome {
    let mut failures = Vec::new();
    let modes = [Mode::In, Mode::Out, Mode::All];
    for f in fixtures() {
        for (i, &mode) in modes.iter().enumerate() {
            for weighted in [false, true] {
                if !close(&closeness(&f.g, mode, weighted), &f.closeness[i], 1e-12) {
                    failures.push(format!("{} closeness {mode:?}", f.name));
                }
            }
            if coreness(&f.g, mode) != f.coreness[i] {
                failures.push(format!("{} coreness {mode:?}", f.name));
            }
        }
        if !close(&local_clustering(&f.g), &f.clustering, 1e-12) {
            failures.push(format!("{} clustering", f.name));
        }
        let (hub, auth) = hits(&f.g);
        if !close(&hub, &f.hub, 1e-9) || !close(&auth, &f.authority, 1e-9) {
            failures.push(format!("{} hits", f.name));
        }
    }
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let mut r = rng(500 + seed);
        let n = 50;
        let m = r.random_range(n..4 * n);
        let edges = (0..m)
            .map(|_| {
                let w = if r.random_bool(0.05) { 0.0 } else { r.random_range(0.01..10.0) };
                (r.random_range(0..n), r.random_range(0..n), w)
            })
            .collect();
        let g = CompactGraph::new(n, edges);
        let got = pagerank(&g, PageRankParams::default());
        let want = pagerank_oracle(&g, 0.85);
        worst = got.iter().zip(&want).fold(worst, |acc, (a, b)| acc.max((a - b).abs()));
    }
    if worst > 1e-6 {
        failures.push(format!("pagerank off by {worst:.2e}"));
    }
    let detail = if failures.is_empty() {
        format!("5 fixtures exact, pagerank worst deviation {worst:.2e} on 20 graphs")
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

// ---------------------------------------------------------------- pipeline

struct PipelineRun {
    outcome: actortrace_cli::pipeline::TrainOutcome,
    matrices: BTreeMap<GraphKind, actortrace_core::features::FeatureMatrix<f64>>,
    elapsed: Duration,
    kept: usize,
}

fn run_pipeline(data: &actortrace_core::synth::SynthData, out: &std::path::Path) -> PipelineRun {
    let start = Instant::now();
    let cfg = PipelineConfig { out: out.to_path_buf(), keep_intermediate: false, ..PipelineConfig::default() };
    let chain = Chain { index: data.chain.clone(), tags: data.tags.clone() };
    let tables = build_features(&chain, &cfg, &data.labels, &GraphKind::EGO).expect("features");
    let outcome = train(&cfg, &tables.matrices).expect("training");
    PipelineRun { outcome, matrices: tables.matrices, elapsed: start.elapsed(), kept: tables.kept }
}

fn check_end_to_end(run: &PipelineRun, labelled: usize) -> Outcome {
    let report = &run.outcome.report;
    let held_out = run.outcome.test.balanced_accuracy;
    let final_cv = report.final_cv.balanced_accuracy;
    let best_base = report.best_base_score();
    let pass = held_out >= 0.85 && final_cv >= best_base - 0.02 && run.elapsed < Duration::from_secs(600);
    outcome(
        pass,
        format!(
            "{}/{labelled} addresses kept, held-out BA {held_out:.4} (>= 0.85), final CV {final_cv:.4} vs best base {best_base:.4} - 0.02, {:.1}s",
            run.kept,
            run.elapsed.as_secs_f64()
        ),
    )
}

fn check_structure(run: &PipelineRun) -> Outcome {
    let mut failures = Vec::new();
    let cfg = PipelineConfig::default();
    let bundle = &run.outcome.bundle;
    for m in &bundle.ensemble.stacked {
        if m.meta_width() != cfg.bases.len() * 2 {
            failures.push(format!("{} meta width {}", m.kind, m.meta_width()));
        }
    }
    let fusion = bundle.ensemble.fusion.width();
    if fusion != 12 || bundle.ensemble.stacked.len() != 6 {
        failures.push(format!("fusion width {fusion}"));
    }

    let mut worst_sum = 0.0f64;
    for (_, _, p) in &run.outcome.test_predictions {
        worst_sum = worst_sum.max((p.probs.iter().sum::<f64>() - 1.0).abs());
    }
    if worst_sum > 1e-9 {
        failures.push(format!("probability sum off by {worst_sum:.2e}"));
    }

    // group-level leakage: split sides and every fold of every view
    let train_groups: BTreeSet<String> =
        run.outcome.split.iter().filter(|(_, _, t)| !t).map(|(g, _, _)| g.clone()).collect();
    let test_groups: BTreeSet<String> =
        run.outcome.split.iter().filter(|(_, _, t)| *t).map(|(g, _, _)| g.clone()).collect();
    if !train_groups.is_disjoint(&test_groups) {
        failures.push("split shares groups".into());
    }
    let classes: BTreeMap<String, actortrace_core::Class> =
        run.outcome.split.iter().filter(|(_, _, t)| !t).map(|(g, c, _)| (g.clone(), *c)).collect();
    let folds = group_folds(&classes, cfg.folds, cfg.seed).unwrap();
    let mut leaks = 0;
    for m in run.matrices.values() {
        for f in 0..cfg.folds {
            let side = |keep: bool| -> BTreeSet<&String> {
                m.rows
                    .iter()
                    .map(|r| &r.group)
                    .filter(|g| train_groups.contains(*g) && (folds[*g] == f) == keep)
                    .collect()
            };
            leaks += side(false).intersection(&side(true)).count();
        }
        let rows_test: BTreeSet<&String> = m.rows.iter().map(|r| &r.group).filter(|g| test_groups.contains(*g)).collect();
        let rows_train: BTreeSet<&String> = m.rows.iter().map(|r| &r.group).filter(|g| train_groups.contains(*g)).collect();
        leaks += rows_test.intersection(&rows_train).count();
    }
    if leaks > 0 {
        failures.push(format!("{leaks} leaked groups"));
    }

    // the mandatory three-base set stacks into a six-column meta input
    let kind = GraphKind::Ego1Simple;
    let schema = bundle.schemas.get(kind).unwrap();
    let projected = LabeledDataset::new([run.matrices[&kind].project(schema).unwrap()]).unwrap().restrict(&train_groups);
    let small = stack_kind(&projected.views[&kind], &BaseKind::MANDATORY, &folds, cfg.seed).unwrap();
    if small.model.meta_width() != 6 {
        failures.push(format!("three-base meta width {}", small.model.meta_width()));
    }

    let detail = if failures.is_empty() {
        format!(
            "meta width {} (six bases) and 6 (three), fusion width {fusion}, max |sum p - 1| {worst_sum:.1e}, 0 leaked groups over {} folds x 6 views",
            cfg.bases.len() * 2,
            cfg.folds
        )
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

const FEATURE_IMPORTANCE_ORDER: [&str; 11] = [
    "Closeness(wtd/out)",
    "sum of weights",
    "Closeness(uwtd/out)",
    "# of vertices",
    "Closeness(wtd/in)",
    "cluster coefficient",
    "Closeness(wtd/all)",
    "Closeness(uwtd/in)",
    "Coreness(all)",
    "Authority",
    "Coreness(IN)",
];

fn check_schema(run: &PipelineRun) -> Outcome {
    let expected_counts = [
        (GraphKind::Ego3, 11),
        (GraphKind::Ego3Simple, 16),
        (GraphKind::Ego2, 13),
        (GraphKind::Ego2Simple, 16),
        (GraphKind::Ego1, 12),
        (GraphKind::Ego1Simple, 11),
    ];
    let schemas = &run.outcome.bundle.schemas;
    let mut failures = Vec::new();
    for (kind, n) in expected_counts {
        let got = schemas.get(kind).map_or(0, |s| s.len());
        if got != n {
            failures.push(format!("{kind}: {got} features, want {n}"));
        }
    }
    let simple = schemas.get(GraphKind::Ego1Simple).map(<[String]>::to_vec).unwrap_or_default();
    if simple.iter().map(String::as_str).ne(FEATURE_IMPORTANCE_ORDER) {
        failures.push(format!("ego1_simple schema {simple:?}"));
    }
    let detail = if failures.is_empty() {
        "ego1_simple verbatim, counts 11/16/13/16/12/11".to_string()
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

// ---------------------------------------------------------------- main

fn timed(name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if let Some(limit) = limit {
        if took >= limit {
            o.pass = false;
            o.detail.push_str(&format!("; over the {}s budget", limit.as_secs()));
        }
    }
    println!("{} {name}: {} [{:.2}s]", if o.pass { "PASS" } else { "FAIL" }, o.detail, took.as_secs_f64());
    o.pass
}

fn main() {
    // `cargo test -- --list` and filters are not meaningful here
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut ok = true;
    ok &= timed("coinjoin decision table", Some(Duration::from_secs(5)), check_coinjoin);
    ok &= timed("clustering oracle", Some(Duration::from_secs(30)), check_clustering);
    let data = generate_chain(&SynthConfig::default()).expect("synthetic chain");
    ok &= timed("conservation", None, || check_conservation(&data));
    ok &= timed("window and connectivity", None, check_window);
    ok &= timed("centrality oracles", None, check_centrality);

    let dir = tempfile::tempdir().expect("scratch directory");
    let run = run_pipeline(&data, dir.path());
    ok &= timed("end-to-end synthetic analogue", None, || check_end_to_end(&run, data.labels.len()));
    ok &= timed("structural ml checks", None, || check_structure(&run));
    ok &= timed("ego1_simple schema and feature counts", None, || check_schema(&run));

    println!("acceptance: {}", if ok { "all criteria pass" } else { "FAILED" });
    if !ok {
        std::process::exit(1);
    }
}
