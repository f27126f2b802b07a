//! Actor-to-actor weighted multigraphs and the ego / simple views used for
//! feature extraction.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::chainstore::{Address, ChainIndex, Transaction, Txid};
use crate::clustering::{ActorId, ClusterMap};
use crate::error::{Error, Result};
use crate::scalar::{Scalar, SATS_PER_BTC};
use crate::txgraph::TxSubgraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphKind {
    Whole,
    Ego1,
    Ego2,
    Ego3,
    Ego1Simple,
    Ego2Simple,
    Ego3Simple,
    WholeSimple,
}

impl GraphKind {
    pub const ALL: [GraphKind; 8] = [
        GraphKind::Whole,
        GraphKind::Ego1,
        GraphKind::Ego2,
        GraphKind::Ego3,
        GraphKind::Ego1Simple,
        GraphKind::Ego2Simple,
        GraphKind::Ego3Simple,
        GraphKind::WholeSimple,
    ];

    /// The six views the classifier is trained on.
    pub const EGO: [GraphKind; 6] = [
        GraphKind::Ego1Simple,
        GraphKind::Ego1,
        GraphKind::Ego2Simple,
        GraphKind::Ego2,
        GraphKind::Ego3Simple,
        GraphKind::Ego3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GraphKind::Whole => "whole",
            GraphKind::Ego1 => "ego1",
            GraphKind::Ego2 => "ego2",
            GraphKind::Ego3 => "ego3",
            GraphKind::Ego1Simple => "ego1_simple",
            GraphKind::Ego2Simple => "ego2_simple",
            GraphKind::Ego3Simple => "ego3_simple",
            GraphKind::WholeSimple => "whole_simple",
        }
    }

    /// Ego order, `None` for whole-graph views.
    pub fn order(self) -> Option<usize> {
        match self {
            GraphKind::Ego1 | GraphKind::Ego1Simple => Some(1),
            GraphKind::Ego2 | GraphKind::Ego2Simple => Some(2),
            GraphKind::Ego3 | GraphKind::Ego3Simple => Some(3),
            GraphKind::Whole | GraphKind::WholeSimple => None,
        }
    }

    pub fn is_simple(self) -> bool {
        matches!(
            self,
            GraphKind::Ego1Simple | GraphKind::Ego2Simple | GraphKind::Ego3Simple | GraphKind::WholeSimple
        )
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        GraphKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown graph kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActorEdge<F> {
    pub src: ActorId,
    pub dst: ActorId,
    /// Bitcoin flow in BTC.
    pub weight: F,
    /// Originating transaction; `None` once parallel edges are collapsed.
    pub tx: Option<Txid>,
}

impl<F> ActorEdge<F> {
    pub fn is_loop(&self) -> bool {
        self.src == self.dst
    }
}

/// Directed weighted multigraph of actors with a distinguished center.
/// Edges are kept sorted by `(src, dst, tx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorGraph<F> {
    vertices: BTreeSet<ActorId>,
    center: ActorId,
    edges: Vec<ActorEdge<F>>,
}

fn sort_edges<F>(edges: &mut [ActorEdge<F>]) {
    edges.sort_by(|a, b| (a.src, a.dst, &a.tx).cmp(&(b.src, b.dst, &b.tx)));
}

impl<F: Scalar> ActorGraph<F> {
    /// Vertices referenced by edges are added automatically; the center must
    /// be among the resulting vertices.
    pub fn new(
        vertices: impl IntoIterator<Item = ActorId>,
        center: ActorId,
        mut edges: Vec<ActorEdge<F>>,
    ) -> Result<Self> {
        let mut vertices: BTreeSet<ActorId> = vertices.into_iter().collect();
        for e in &edges {
            if !(e.weight.is_finite() && e.weight >= F::zero()) {
                return Err(Error::InvalidArgument(format!(
                    "edge {} -> {} has weight {}",
                    e.src, e.dst, e.weight
                )));
            }
            vertices.insert(e.src);
            vertices.insert(e.dst);
        }
        if !vertices.contains(&center) {
            return Err(Error::InvalidArgument(format!("center {center} is not a vertex")));
        }
        sort_edges(&mut edges);
        Ok(ActorGraph { vertices, center, edges })
    }

    pub fn center(&self) -> ActorId {
        self.center
    }

    pub fn vertices(&self) -> &BTreeSet<ActorId> {
        &self.vertices
    }

    pub fn edges(&self) -> &[ActorEdge<F>] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_weight(&self) -> F {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Number of vertices that are real actors (the coinbase source excluded).
    pub fn actor_count(&self) -> usize {
        self.vertices.iter().filter(|v| !v.is_coinbase()).count()
    }

    pub fn is_too_small(&self, min_actors: usize) -> bool {
        self.actor_count() < min_actors
    }

    pub fn map_scalar<G: Scalar>(&self) -> ActorGraph<G> {
        ActorGraph {
            vertices: self.vertices.clone(),
            center: self.center,
            edges: self
                .edges
                .iter()
                .map(|e| ActorEdge {
                    src: e.src,
                    dst: e.dst,
                    weight: G::of(e.weight.as_f64()),
                    tx: e.tx.clone(),
                })
                .collect(),
        }
    }

    /// Undirected hop distance from the center to each reachable vertex.
    pub fn hop_distances(&self) -> HashMap<ActorId, usize> {
        let mut adj: HashMap<ActorId, Vec<ActorId>> = HashMap::new();
        for e in &self.edges {
            if !e.is_loop() {
                adj.entry(e.src).or_default().push(e.dst);
                adj.entry(e.dst).or_default().push(e.src);
            }
        }
        let mut dist = HashMap::from([(self.center, 0usize)]);
        let mut queue = VecDeque::from([self.center]);
        while let Some(v) = queue.pop_front() {
            let d = dist[&v];
            for &n in adj.get(&v).into_iter().flatten() {
                dist.entry(n).or_insert_with(|| {
                    queue.push_back(n);
                    d + 1
                });
            }
        }
        dist
    }

    fn induced(&self, keep: &BTreeSet<ActorId>) -> Self {
        ActorGraph {
            vertices: keep.clone(),
            center: self.center,
            edges: self
                .edges
                .iter()
                .filter(|e| keep.contains(&e.src) && keep.contains(&e.dst))
                .cloned()
                .collect(),
        }
    }

    /// The view of this graph selected by `kind`.
    pub fn view(&self, kind: GraphKind) -> Result<Self> {
        let base = match kind.order() {
            Some(k) => ego_graph(self, k)?,
            None => self.clone(),
        };
        Ok(if kind.is_simple() { simplify(&base) } else { base })
    }

    /// CSV export with two metadata comment lines (center and kind, then the
    /// full vertex list) followed by `src_actor,dst_actor,weight_btc,txid`.
    pub fn write_csv<W: Write>(&self, kind: GraphKind, mut w: W) -> Result<()> {
        writeln!(w, "# center={},kind={}", self.center, kind)?;
        let vs: Vec<String> = self.vertices.iter().map(ToString::to_string).collect();
        writeln!(w, "# vertices={}", vs.join(";"))?;
        writeln!(w, "src_actor,dst_actor,weight_btc,txid")?;
        for e in &self.edges {
            let tx = e.tx.as_ref().map_or("", |t| t.as_str());
            writeln!(w, "{},{},{},{}", e.src, e.dst, e.weight, tx)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<(GraphKind, Self)> {
        let mut center = None;
        let mut kind = None;
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        let mut header_seen = false;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let bad = |msg: String| Error::Parse { line: i + 1, msg };
            if let Some(meta) = line.strip_prefix('#') {
                for kv in meta.trim().split(',') {
                    match kv.split_once('=') {
                        Some(("center", v)) => center = Some(v.parse::<ActorId>().map_err(bad)?),
                        Some(("kind", v)) => kind = Some(v.parse::<GraphKind>()?),
                        Some(("vertices", v)) => {
                            for id in v.split(';').filter(|s| !s.is_empty()) {
                                vertices.push(id.parse::<ActorId>().map_err(bad)?);
                            }
                        }
                        _ => {}
                    }
                }
                continue;
            }
            if !header_seen {
                header_seen = true;
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 4 {
                return Err(bad("expected 4 columns".into()));
            }
            let weight: f64 = parts[2].parse().map_err(|_| bad("bad weight".into()))?;
            edges.push(ActorEdge {
                src: parts[0].parse().map_err(bad)?,
                dst: parts[1].parse().map_err(bad)?,
                weight: F::of(weight),
                tx: (!parts[3].is_empty()).then(|| Txid::new(parts[3])),
            });
        }
        let center = center.ok_or_else(|| Error::Format("missing center metadata".into()))?;
        let kind = kind.ok_or_else(|| Error::Format("missing kind metadata".into()))?;
        Ok((kind, ActorGraph::new(vertices, center, edges)?))
    }
}

/// Proportional allocation of a transaction's outputs to its inputs:
/// `weight(i, j) = IA_i / sum(IA) * OA_j`, in BTC. The fee never appears
/// because only output amounts are distributed.
pub fn allocate_weights<F: Scalar>(tx: &Transaction) -> Result<Vec<(Address, Address, F)>> {
    let total_in = tx.input_total();
    if tx.is_coinbase || total_in <= 0 {
        return Err(Error::InvalidArgument(format!(
            "transaction {} has no input value to allocate",
            tx.txid
        )));
    }
    let mut out = Vec::with_capacity(tx.inputs.len() * tx.outputs.len());
    for input in &tx.inputs {
        let share = input.amount as f64 / total_in as f64;
        for output in &tx.outputs {
            let w = share * output.amount as f64 / SATS_PER_BTC;
            out.push((input.address.clone(), output.address.clone(), F::of(w)));
        }
    }
    Ok(out)
}

/// Relabel address-level flows of every subgraph transaction to actors.
/// Flows between the same pair of actors within one transaction are summed;
/// parallel edges across transactions and self-loops are kept.
pub fn build_actor_graph<F: Scalar>(
    sub: &TxSubgraph,
    cm: &ClusterMap,
    index: &ChainIndex,
) -> Result<ActorGraph<F>> {
    let refs = sub.resolve(index)?;
    let center = cm.actor_of(sub.seed.as_str())?;
    let mut vertices: BTreeSet<ActorId> = BTreeSet::new();
    let mut edges = Vec::new();

    for r in refs {
        let tx = index.tx(r);
        let mut flows: BTreeMap<(ActorId, ActorId), f64> = BTreeMap::new();
        for a in tx.addresses() {
            vertices.insert(cm.actor_of(a.as_str())?);
        }
        if tx.is_coinbase {
            vertices.insert(ActorId::COINBASE);
            for o in &tx.outputs {
                let dst = cm.actor_of(o.address.as_str())?;
                *flows.entry((ActorId::COINBASE, dst)).or_default() += o.amount as f64 / SATS_PER_BTC;
            }
        } else {
            let total_in = tx.input_total();
            let n_in = tx.inputs.len() as f64;
            for input in &tx.inputs {
                let src = cm.actor_of(input.address.as_str())?;
                // all-zero inputs carry all-zero outputs: split evenly so the
                // link survives with zero weight
                let share = if total_in > 0 {
                    input.amount as f64 / total_in as f64
                } else {
                    1.0 / n_in
                };
                for output in &tx.outputs {
                    let dst = cm.actor_of(output.address.as_str())?;
                    *flows.entry((src, dst)).or_default() +=
                        share * output.amount as f64 / SATS_PER_BTC;
                }
            }
        }
        edges.extend(flows.into_iter().map(|((src, dst), w)| ActorEdge {
            src,
            dst,
            weight: F::of(w),
            tx: Some(tx.txid.clone()),
        }));
    }
    ActorGraph::new(vertices, center, edges)
}

/// Vertices within undirected hop distance `k` of the center, with every
/// edge between them.
pub fn ego_graph<F: Scalar>(g: &ActorGraph<F>, k: usize) -> Result<ActorGraph<F>> {
    if !(1..=3).contains(&k) {
        return Err(Error::InvalidArgument(format!("ego order {k} outside 1..=3")));
    }
    if !g.vertices.contains(&g.center) {
        return Err(Error::InvalidArgument("center missing from graph".into()));
    }
    let keep: BTreeSet<ActorId> = g
        .hop_distances()
        .into_iter()
        .filter(|&(_, d)| d <= k)
        .map(|(v, _)| v)
        .collect();
    Ok(g.induced(&keep))
}

/// Drop self-loops and collapse parallel edges into one edge carrying the
/// summed weight.
pub fn simplify<F: Scalar>(g: &ActorGraph<F>) -> ActorGraph<F> {
    let mut groups: BTreeMap<(ActorId, ActorId), Vec<&ActorEdge<F>>> = BTreeMap::new();
    for e in g.edges.iter().filter(|e| !e.is_loop()) {
        groups.entry((e.src, e.dst)).or_default().push(e);
    }
    let edges = groups
        .into_iter()
        .map(|((src, dst), group)| match group.as_slice() {
            [single] => (*single).clone(),
            many => ActorEdge {
                src,
                dst,
                weight: many.iter().map(|e| e.weight).sum(),
                tx: None,
            },
        })
        .collect();
    ActorGraph {
        vertices: g.vertices.clone(),
        center: g.center,
        edges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chainstore::{OutputKind, ServiceTagRegistry, TxInput, TxOutput};
    use crate::clustering::local_cluster;
    use crate::txgraph::{build_tx_subgraph, SubgraphLimits};

    const BTC: i64 = 100_000_000;

    fn tx(txid: &str, h: u64, ins: &[(&str, i64)], outs: &[(&str, i64)]) -> Transaction {
        Transaction {
            txid: Txid::new(txid),
            height: h,
            index_in_block: 0,
            inputs: ins.iter().map(|&(a, v)| TxInput { address: Address::new(a).unwrap(), amount: v }).collect(),
            outputs: outs
                .iter()
                .map(|&(a, v)| TxOutput { address: Address::new(a).unwrap(), amount: v, kind: OutputKind::Standard })
                .collect(),
            is_coinbase: ins.is_empty(),
        }
    }

    fn weights(alloc: &[(Address, Address, f64)]) -> Vec<(&str, &str, f64)> {
        alloc.iter().map(|(i, o, w)| (i.as_str(), o.as_str(), *w)).collect()
    }

    #[test]
    fn proportional_allocation() {
        let t = tx("01", 1, &[("i1", 3 * BTC), ("i2", BTC)], &[("o1", 2 * BTC), ("o2", 2 * BTC)]);
        let w = allocate_weights::<f64>(&t).unwrap();
        assert_eq!(
            weights(&w),
            vec![("i1", "o1", 1.5), ("i1", "o2", 1.5), ("i2", "o1", 0.5), ("i2", "o2", 0.5)]
        );

        let t = tx("02", 1, &[("i", 7 * BTC)], &[("o", 7 * BTC)]);
        assert_eq!(weights(&allocate_weights::<f64>(&t).unwrap()), vec![("i", "o", 7.0)]);

        // the fee is never allocated
        let t = tx("03", 1, &[("i1", BTC), ("i2", BTC)], &[("o1", BTC)]);
        let w = allocate_weights::<f64>(&t).unwrap();
        assert_eq!(weights(&w), vec![("i1", "o1", 0.5), ("i2", "o1", 0.5)]);
        assert_eq!(w.iter().map(|x| x.2).sum::<f64>(), 1.0);

        let t = tx("04", 1, &[("i", 0)], &[("o", 0)]);
        assert!(allocate_weights::<f64>(&t).is_err());
        let t = tx("05", 1, &[], &[("o", 5)]);
        assert!(allocate_weights::<f32>(&t).is_err());
    }

    fn graph_for(txs: Vec<Transaction>, seed: &str) -> (ClusterMap, ActorGraph<f64>) {
        let idx = ChainIndex::from_transactions(txs).unwrap();
        let sub = build_tx_subgraph(&idx, seed, 100, &ServiceTagRegistry::new(), SubgraphLimits::default()).unwrap();
        let cm = local_cluster(&sub, &idx).unwrap();
        let g = build_actor_graph(&sub, &cm, &idx).unwrap();
        (cm, g)
    }

    #[test]
    fn self_payment_is_a_loop() {
        let (cm, g) = graph_for(
            vec![
                tx("00", 0, &[("z", BTC)], &[("used", BTC)]),
                tx("01", 1, &[("a", 3 * BTC), ("b", BTC)], &[("change", 2 * BTC), ("used", 2 * BTC)]),
            ],
            "a",
        );
        let me = cm.actor_of("a").unwrap();
        assert_eq!(cm.actor_of("change").unwrap(), me);
        let loops: Vec<_> = g.edges().iter().filter(|e| e.is_loop()).collect();
        assert_eq!(loops.len(), 1);
        assert_eq!(loops[0].src, me);
        assert_eq!(loops[0].weight, 2.0);
    }

    #[test]
    fn single_payment_single_edge() {
        let (cm, g) = graph_for(
            vec![
                tx("00", 0, &[("z", BTC)], &[("b", BTC)]),
                tx("01", 1, &[("a", 2 * BTC)], &[("b", 2 * BTC)]),
            ],
            "a",
        );
        assert_eq!(g.edge_count(), 1);
        let e = &g.edges()[0];
        assert_eq!((e.src, e.dst, e.weight), (cm.actor_of("a").unwrap(), cm.actor_of("b").unwrap(), 2.0));
    }

    #[test]
    fn parallel_edges_are_kept_then_collapsed() {
        let (cm, g) = graph_for(
            vec![
                tx("00", 0, &[("z", BTC)], &[("b", BTC)]),
                tx("01", 1, &[("a", 3 * BTC)], &[("b", BTC), ("a", 2 * BTC)]),
                tx("03", 3, &[("a", 2 * BTC)], &[("b", 2 * BTC)]),
            ],
            "a",
        );
        let (ia, ib) = (cm.actor_of("a").unwrap(), cm.actor_of("b").unwrap());
        let ab: Vec<_> = g.edges().iter().filter(|e| e.src == ia && e.dst == ib).collect();
        assert_eq!(ab.len(), 2);

        let s = simplify(&g);
        assert_eq!(s.edge_count(), 1);
        assert_eq!(s.edges()[0].weight, 3.0);
        assert_eq!(s.edges()[0].tx, None);
        assert_eq!(s.vertices(), g.vertices());
    }

    #[test]
    fn coinbase_source() {
        let (cm, g) = graph_for(vec![tx("01", 1, &[], &[("m", 50 * BTC)])], "m");
        assert!(g.vertices().contains(&ActorId::COINBASE));
        assert_eq!(g.edges()[0].src, ActorId::COINBASE);
        assert_eq!(g.edges()[0].dst, cm.actor_of("m").unwrap());
        assert_eq!(g.actor_count(), 1);
        assert!(g.is_too_small(5));
    }

    fn a(i: u32) -> ActorId {
        ActorId(i)
    }

    fn e(s: u32, d: u32, w: f64) -> ActorEdge<f64> {
        ActorEdge { src: a(s), dst: a(d), weight: w, tx: Some(Txid::new(format!("{s}{d}"))) }
    }

    #[test]
    fn ego_membership() {
        // X(1) - C(0) - Y(2) - Z(3)
        let g = ActorGraph::new([], a(0), vec![e(1, 0, 1.0), e(0, 2, 1.0), e(2, 3, 1.0)]).unwrap();
        let ego1 = ego_graph(&g, 1).unwrap();
        assert_eq!(ego1.vertices().iter().map(|v| v.0).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(ego1.edge_count(), 2);
        assert_eq!(ego_graph(&g, 3).unwrap(), g);
        assert!(ego_graph(&g, 0).is_err());
        assert!(ego_graph(&g, 4).is_err());

        let flipped = ActorGraph::new([], a(0), vec![e(0, 1, 1.0), e(2, 0, 1.0), e(3, 2, 1.0)]).unwrap();
        assert_eq!(ego_graph(&flipped, 1).unwrap().vertices(), ego1.vertices());
    }

    #[test]
    fn simplify_cases() {
        let g = ActorGraph::new([], a(0), vec![e(0, 1, 1.0), e(0, 1, 2.0)]).unwrap();
        let s = simplify(&g);
        assert_eq!(s.edge_count(), 1);
        assert_eq!(s.edges()[0].weight, 3.0);

        let g = ActorGraph::new([], a(0), vec![e(0, 0, 1.0)]).unwrap();
        let s = simplify(&g);
        assert_eq!(s.vertex_count(), 1);
        assert_eq!(s.edge_count(), 0);

        let g = ActorGraph::new([a(5)], a(0), vec![e(0, 1, 1.0), e(1, 0, 2.0)]).unwrap();
        assert_eq!(simplify(&g), g);
        assert_eq!(simplify(&simplify(&g)), simplify(&g));
    }

    #[test]
    fn rejects_bad_weights_and_centers() {
        assert!(ActorGraph::new([], a(0), vec![e(0, 1, f64::NAN)]).is_err());
        assert!(ActorGraph::new([], a(0), vec![e(0, 1, -1.0)]).is_err());
        assert!(ActorGraph::<f64>::new([a(1)], a(0), vec![]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = ActorGraph::new(
            [a(9)],
            a(0),
            vec![e(0, 1, 0.125), ActorEdge { src: ActorId::COINBASE, dst: a(0), weight: 50.0, tx: None }],
        )
        .unwrap();
        let mut buf = Vec::new();
        g.write_csv(GraphKind::Ego2Simple, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# center=0,kind=ego2_simple\n"));
        let (kind, back) = ActorGraph::<f64>::read_csv(buf.as_slice()).unwrap();
        assert_eq!(kind, GraphKind::Ego2Simple);
        assert_eq!(back, g);
    }

    #[test]
    fn kind_names() {
        for k in GraphKind::ALL {
            assert_eq!(k.name().parse::<GraphKind>().unwrap(), k);
        }
        assert_eq!("ego1-simple".parse::<GraphKind>().unwrap(), GraphKind::Ego1Simple);
        assert!("ego4".parse::<GraphKind>().is_err());
    }
}
