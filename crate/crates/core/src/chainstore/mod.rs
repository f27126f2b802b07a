//! Line-delimited chain ingestion, address/transaction indexing and the
//! service-tag registry consulted by subgraph traversal.

mod index;
mod tags;

pub use index::{parse_chain, write_chain, ChainIndex, TxRef};
pub use tags::{load_service_tags, ServiceTag, ServiceTagRegistry};

use std::borrow::Borrow;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Address token used for every OpReturn output.
pub const BURN: &str = "burn";
/// Prefix of the per-output placeholder for unparseable scripts.
pub const DUMMY_PREFIX: &str = "dummy:";

/// A non-empty address token. Cheap to clone.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Address(Arc<str>);

impl Address {
    pub fn new(s: impl AsRef<str>) -> Option<Self> {
        let s = s.as_ref();
        if s.is_empty() {
            None
        } else {
            Some(Address(Arc::from(s)))
        }
    }

    pub fn burn() -> Self {
        Address(Arc::from(BURN))
    }

    pub fn dummy(txid: &Txid, position: usize) -> Self {
        Address(Arc::from(format!("{DUMMY_PREFIX}{txid}:{position}")))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_burn(&self) -> bool {
        &*self.0 == BURN
    }

    pub fn is_dummy(&self) -> bool {
        self.0.starts_with(DUMMY_PREFIX)
    }

    /// Burn and dummy tokens are placeholders, not owned addresses.
    pub fn is_placeholder(&self) -> bool {
        self.is_burn() || self.is_dummy()
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Address({})", self.0)
    }
}

impl Borrow<str> for Address {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Txid(Arc<str>);

impl Txid {
    pub fn new(s: impl AsRef<str>) -> Self {
        Txid(Arc::from(s.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Txid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Txid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Txid({})", self.0)
    }
}

impl Borrow<str> for Txid {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Standard,
    OpReturn,
    NonStandard,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxInput {
    pub address: Address,
    pub amount: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxOutput {
    pub address: Address,
    pub amount: i64,
    pub kind: OutputKind,
}

/// One validated transfer. Amounts are integer satoshis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub txid: Txid,
    pub height: u64,
    pub index_in_block: u32,
    pub inputs: Vec<TxInput>,
    pub outputs: Vec<TxOutput>,
    pub is_coinbase: bool,
}

impl Transaction {
    /// Chain position; transactions are totally ordered by it.
    pub fn position(&self) -> (u64, u32) {
        (self.height, self.index_in_block)
    }

    pub fn input_total(&self) -> i64 {
        self.inputs.iter().map(|i| i.amount).sum()
    }

    pub fn output_total(&self) -> i64 {
        self.outputs.iter().map(|o| o.amount).sum()
    }

    /// `None` for coinbase transactions.
    pub fn fee(&self) -> Option<i64> {
        if self.is_coinbase {
            None
        } else {
            Some(self.input_total() - self.output_total())
        }
    }

    /// Every address appearing on either side, in slot order, with repeats.
    pub fn addresses(&self) -> impl Iterator<Item = &Address> {
        self.inputs
            .iter()
            .map(|i| &i.address)
            .chain(self.outputs.iter().map(|o| &o.address))
    }
}
