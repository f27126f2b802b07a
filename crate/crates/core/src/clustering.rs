//! Local address clustering over a transaction subgraph.
//!
//! Within a non-CoinJoin transaction all input addresses belong to one actor,
//! and a single fresh output address is taken to be the actor's change.
//! CoinJoin transactions contribute no links. Placeholder addresses (`burn`,
//! `dummy:*`) always stay singletons.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::chainstore::{Address, ChainIndex};
use crate::error::{Error, Result};
use crate::txgraph::{is_coinjoin, TxSubgraph};
use crate::union_find::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActorId(pub u32);

impl ActorId {
    /// Source of newly minted coins in actor graphs.
    pub const COINBASE: ActorId = ActorId(u32::MAX);

    pub fn is_coinbase(self) -> bool {
        self == Self::COINBASE
    }
}

impl fmt::Display for ActorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_coinbase() {
            f.write_str("COINBASE")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl std::str::FromStr for ActorId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "COINBASE" {
            Ok(ActorId::COINBASE)
        } else {
            s.parse().map(ActorId).map_err(|_| format!("bad actor id {s:?}"))
        }
    }
}

/// Which outputs join the input set when exactly one output is fresh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChangeRule {
    /// Only the fresh change output joins the inputs.
    #[default]
    ChangeOnly,
    /// Every output joins the inputs (literal reading of the pseudo-code).
    AllOutputs,
}

/// Address to actor assignment. Actor ids are dense and ordered by each
/// actor's smallest address, so reruns on identical input agree.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClusterMap {
    actor: HashMap<Address, ActorId>,
    members: Vec<Vec<Address>>,
}

impl ClusterMap {
    fn from_members(mut members: Vec<Vec<Address>>) -> Self {
        for m in members.iter_mut() {
            m.sort_unstable();
        }
        members.sort_unstable_by(|a, b| a[0].cmp(&b[0]));
        let mut actor = HashMap::new();
        for (id, m) in members.iter().enumerate() {
            for a in m {
                actor.insert(a.clone(), ActorId(id as u32));
            }
        }
        ClusterMap { actor, members }
    }

    pub fn actor_of(&self, address: &str) -> Result<ActorId> {
        self.actor
            .get(address)
            .copied()
            .ok_or_else(|| Error::UnknownAddress(address.to_string()))
    }

    pub fn get(&self, address: &str) -> Option<ActorId> {
        self.actor.get(address).copied()
    }

    pub fn actor_count(&self) -> usize {
        self.members.len()
    }

    pub fn address_count(&self) -> usize {
        self.actor.len()
    }

    /// Member addresses of an actor, sorted; the first is the representative.
    pub fn members(&self, id: ActorId) -> &[Address] {
        self.members.get(id.0 as usize).map_or(&[], Vec::as_slice)
    }

    pub fn representative(&self, id: ActorId) -> Option<&Address> {
        self.members(id).first()
    }

    pub fn actors(&self) -> impl Iterator<Item = (ActorId, &[Address])> {
        self.members
            .iter()
            .enumerate()
            .map(|(i, m)| (ActorId(i as u32), m.as_slice()))
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["address", "actor_id"])?;
        for (id, members) in self.actors() {
            for a in members {
                w.write_record([a.as_str(), &id.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut groups: HashMap<u32, Vec<Address>> = HashMap::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let bad = |msg: &str| Error::Parse { line, msg: msg.to_string() };
            if rec.len() != 2 {
                return Err(bad("expected address,actor_id"));
            }
            let address = Address::new(&rec[0]).ok_or_else(|| bad("empty address"))?;
            let id: u32 = rec[1].parse().map_err(|_| bad("bad actor id"))?;
            groups.entry(id).or_default().push(address);
        }
        Ok(Self::from_members(groups.into_values().collect()))
    }
}

struct Interner<'a> {
    ids: HashMap<&'a Address, usize>,
    addresses: Vec<&'a Address>,
    uf: UnionFind,
}

impl<'a> Interner<'a> {
    fn id(&mut self, a: &'a Address) -> usize {
        if let Some(&id) = self.ids.get(a) {
            return id;
        }
        let id = self.uf.push();
        self.ids.insert(a, id);
        self.addresses.push(a);
        id
    }
}

pub fn local_cluster(sub: &TxSubgraph, index: &ChainIndex) -> Result<ClusterMap> {
    local_cluster_with(sub, index, ChangeRule::default())
}

pub fn local_cluster_with(
    sub: &TxSubgraph,
    index: &ChainIndex,
    rule: ChangeRule,
) -> Result<ClusterMap> {
    let refs = sub.resolve(index)?;
    let mut interner = Interner {
        ids: HashMap::new(),
        addresses: Vec::new(),
        uf: UnionFind::default(),
    };

    for r in refs {
        let tx = index.tx(r);
        let ids: Vec<usize> = tx.addresses().map(|a| interner.id(a)).collect();
        if tx.is_coinbase || is_coinjoin(tx) {
            continue;
        }

        let mut group: Vec<usize> = tx
            .inputs
            .iter()
            .zip(&ids)
            .filter(|(i, _)| !i.address.is_placeholder())
            .map(|(_, &id)| id)
            .collect();

        let mut outputs: Vec<_> = tx
            .outputs
            .iter()
            .zip(&ids[tx.inputs.len()..])
            .filter(|(o, _)| !o.address.is_placeholder())
            .map(|(o, &id)| (&o.address, id))
            .collect();
        outputs.sort_unstable();
        outputs.dedup();
        let fresh: Vec<usize> = outputs
            .iter()
            .filter(|(a, _)| !index.seen_before(a.as_str(), r))
            .map(|&(_, id)| id)
            .collect();
        if fresh.len() == 1 {
            match rule {
                ChangeRule::ChangeOnly => group.push(fresh[0]),
                ChangeRule::AllOutputs => group.extend(outputs.iter().map(|&(_, id)| id)),
            }
        }

        if let Some((&first, rest)) = group.split_first() {
            for &other in rest {
                interner.uf.union(first, other);
            }
        }
    }

    let mut by_root: HashMap<usize, Vec<Address>> = HashMap::new();
    for (id, a) in interner.addresses.iter().enumerate() {
        let root = interner.uf.find(id);
        by_root.entry(root).or_default().push((*a).clone());
    }
    Ok(ClusterMap::from_members(by_root.into_values().collect()))
}
