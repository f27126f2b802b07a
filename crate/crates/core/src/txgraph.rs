//! Temporally-bounded transaction subgraphs around a seed address, and the
//! CoinJoin classifier used by clustering.
//!
//! Transactions are linked through addresses: a payment to address `a` in
//! transaction X is drained by the next transaction that spends from `a`.
//! A directed edge X -> Y therefore means an output of X was spent by Y.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::io::{BufRead, Write};

use crate::chainstore::{Address, ChainIndex, ServiceTagRegistry, Transaction, TxRef, Txid};
use crate::error::{Error, Result};

/// CoinJoin detection over input/output slot counts and exact output amounts.
pub fn is_coinjoin(tx: &Transaction) -> bool {
    let inputs = tx.inputs.len();
    let outputs = tx.outputs.len();
    if inputs < 2 || outputs < 3 {
        return false;
    }
    if 2 * inputs < outputs {
        return false;
    }
    let mut counts: HashMap<i64, usize> = HashMap::new();
    for o in &tx.outputs {
        *counts.entry(o.amount).or_default() += 1;
    }
    let most_common = counts.values().copied().max().unwrap_or(0);
    if outputs < 6 {
        most_common == outputs
    } else {
        most_common >= 5
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubgraphLimits {
    pub max_addresses: usize,
    pub max_transactions: usize,
}

impl Default for SubgraphLimits {
    fn default() -> Self {
        SubgraphLimits {
            max_addresses: 1_000_000,
            max_transactions: 500_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TxEdge {
    pub from: Txid,
    pub to: Txid,
    pub via: Address,
    pub amount: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxSubgraph {
    pub seed: Address,
    pub seed_tx: Txid,
    pub window: u64,
    pub nodes: BTreeSet<Txid>,
    pub edges: BTreeSet<TxEdge>,
}

impl TxSubgraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Resolve every node against `index`, returning refs in chain order.
    pub fn resolve(&self, index: &ChainIndex) -> Result<Vec<TxRef>> {
        let mut refs = self
            .nodes
            .iter()
            .map(|t| {
                index
                    .lookup(t.as_str())
                    .ok_or_else(|| Error::UnknownTransaction(t.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        refs.sort_unstable();
        Ok(refs)
    }

    /// Undirected reachability of every node from `seed_tx`.
    pub fn is_connected(&self) -> bool {
        if !self.nodes.contains(&self.seed_tx) {
            return false;
        }
        let mut adj: HashMap<&Txid, Vec<&Txid>> = HashMap::new();
        for e in &self.edges {
            adj.entry(&e.from).or_default().push(&e.to);
            adj.entry(&e.to).or_default().push(&e.from);
        }
        let mut seen = HashSet::from([&self.seed_tx]);
        let mut queue = VecDeque::from([&self.seed_tx]);
        while let Some(t) = queue.pop_front() {
            for &n in adj.get(t).into_iter().flatten() {
                if seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        seen.len() == self.nodes.len()
    }

    /// Edge-list export: one header line, then
    /// `from_txid<TAB>to_txid<TAB>address<TAB>amount_sat` per edge.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "#seed={}\tseed_tx={}\tn={}", self.seed, self.seed_tx, self.window)?;
        for e in &self.edges {
            writeln!(w, "{}\t{}\t{}\t{}", e.from, e.to, e.via, e.amount)?;
        }
        Ok(())
    }

    /// Inverse of [`write_edge_list`](Self::write_edge_list). The node set
    /// is the seed transaction plus every edge endpoint, which is complete
    /// because subgraphs are connected.
    pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Parse { line: 1, msg: "missing header".into() })?;
        let header = header?;
        let fields: HashMap<&str, &str> = header
            .strip_prefix('#')
            .ok_or_else(|| Error::Parse { line: 1, msg: "header must start with '#'".into() })?
            .split('\t')
            .filter_map(|kv| kv.split_once('='))
            .collect();
        let field = |k: &str| {
            fields.get(k).copied().ok_or_else(|| Error::Parse {
                line: 1,
                msg: format!("header missing {k}"),
            })
        };
        let seed = Address::new(field("seed")?)
            .ok_or_else(|| Error::Parse { line: 1, msg: "empty seed".into() })?;
        let seed_tx = Txid::new(field("seed_tx")?);
        let window = field("n")?.parse().map_err(|e| Error::Parse {
            line: 1,
            msg: format!("bad n: {e}"),
        })?;

        let mut nodes = BTreeSet::from([seed_tx.clone()]);
        let mut edges = BTreeSet::new();
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |msg: &str| Error::Parse { line: i + 1, msg: msg.to_string() };
            let parts: Vec<&str> = line.split('\t').collect();
            if parts.len() != 4 {
                return Err(parse_err("expected 4 tab-separated fields"));
            }
            let edge = TxEdge {
                from: Txid::new(parts[0]),
                to: Txid::new(parts[1]),
                via: Address::new(parts[2]).ok_or_else(|| parse_err("empty address"))?,
                amount: parts[3].parse().map_err(|_| parse_err("bad amount"))?,
            };
            nodes.insert(edge.from.clone());
            nodes.insert(edge.to.clone());
            edges.insert(edge);
        }
        Ok(TxSubgraph { seed, seed_tx, window, nodes, edges })
    }
}

impl fmt::Display for TxSubgraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "subgraph of {} around {}: {} transactions, {} edges",
            self.seed,
            self.seed_tx,
            self.nodes.len(),
            self.edges.len()
        )
    }
}

fn paid_to(tx: &Transaction, address: &Address) -> i64 {
    tx.outputs
        .iter()
        .filter(|o| &o.address == address)
        .map(|o| o.amount)
        .sum()
}

fn distinct<'a>(it: impl Iterator<Item = &'a Address>) -> Vec<&'a Address> {
    let mut v: Vec<_> = it.collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Breadth-first bidirectional closure around the first transaction of
/// `seed`, restricted to `±window` blocks. Forward steps never pass through
/// a tagged service address; coinbase transactions have no parents.
pub fn build_tx_subgraph(
    index: &ChainIndex,
    seed: &str,
    window: u64,
    tags: &ServiceTagRegistry,
    limits: SubgraphLimits,
) -> Result<TxSubgraph> {
    if window == 0 {
        return Err(Error::InvalidArgument("window must be at least one block".into()));
    }
    let seed_ref = index
        .first_occurrence(seed)
        .ok_or_else(|| Error::UnknownAddress(seed.to_string()))?;
    let seed_tx = index.tx(seed_ref);
    let lo = seed_tx.height.saturating_sub(window);
    let hi = seed_tx.height.saturating_add(window);
    let in_window = |r: TxRef| (lo..=hi).contains(&index.tx(r).height);

    let mut visited: HashSet<TxRef> = HashSet::new();
    let mut addresses: HashSet<&Address> = HashSet::new();
    let mut queue = VecDeque::new();
    let mut edges = BTreeSet::new();

    let mut admit = |r: TxRef,
                     visited: &mut HashSet<TxRef>,
                     queue: &mut VecDeque<TxRef>|
     -> Result<()> {
        if visited.insert(r) {
            addresses.extend(index.tx(r).addresses());
            if visited.len() > limits.max_transactions || addresses.len() > limits.max_addresses {
                return Err(Error::SizeLimit {
                    transactions: visited.len(),
                    addresses: addresses.len(),
                });
            }
            queue.push_back(r);
        }
        Ok(())
    };

    admit(seed_ref, &mut visited, &mut queue)?;
    while let Some(r) = queue.pop_front() {
        let tx = index.tx(r);
        if !tx.is_coinbase {
            for a in distinct(tx.inputs.iter().map(|i| &i.address)) {
                for &p in index.funders_of(r, a.as_str()) {
                    if !in_window(p) {
                        continue;
                    }
                    let parent = index.tx(p);
                    edges.insert(TxEdge {
                        from: parent.txid.clone(),
                        to: tx.txid.clone(),
                        via: a.clone(),
                        amount: paid_to(parent, a),
                    });
                    admit(p, &mut visited, &mut queue)?;
                }
            }
        }
        for a in distinct(tx.outputs.iter().map(|o| &o.address)) {
            if tags.is_tagged(a.as_str()) {
                continue;
            }
            if let Some(c) = index.spender_of(r, a.as_str()) {
                if !in_window(c) {
                    continue;
                }
                edges.insert(TxEdge {
                    from: tx.txid.clone(),
                    to: index.tx(c).txid.clone(),
                    via: a.clone(),
                    amount: paid_to(tx, a),
                });
                admit(c, &mut visited, &mut queue)?;
            }
        }
    }

    let nodes = visited.into_iter().map(|r| index.tx(r).txid.clone()).collect();
    Ok(TxSubgraph {
        seed: Address::new(seed).expect("seed found in index is non-empty"),
        seed_tx: seed_tx.txid.clone(),
        window,
        nodes,
        edges,
    })
}
