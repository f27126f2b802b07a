use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{Address, OutputKind, Transaction, TxInput, TxOutput, Txid};
use crate::error::{Error, Result};

/// Position of a transaction inside a [`ChainIndex`]. Ordering of refs is
/// chain order: `(height, index_in_block)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TxRef(pub u32);

impl TxRef {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

/// Per-address occurrence lists, ascending, one entry per transaction.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
struct Occurrences {
    as_input: Vec<TxRef>,
    as_output: Vec<TxRef>,
}

/// Immutable index over a parsed chain.
#[derive(Debug, Default, Clone)]
pub struct ChainIndex {
    txs: Vec<Transaction>,
    by_txid: HashMap<Txid, TxRef>,
    by_address: HashMap<Address, Occurrences>,
}

impl PartialEq for ChainIndex {
    fn eq(&self, other: &Self) -> bool {
        self.txs == other.txs
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TxRecord {
    txid: String,
    height: u64,
    index_in_block: u32,
    coinbase: bool,
    inputs: Vec<InputRecord>,
    outputs: Vec<OutputRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputRecord {
    address: String,
    value_sat: i64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputRecord {
    address: Option<String>,
    value_sat: i64,
    kind: OutputKind,
}

fn invalid(txid: &str, msg: impl Into<String>) -> Error {
    Error::InvalidTransaction {
        txid: txid.to_string(),
        msg: msg.into(),
    }
}

impl TxRecord {
    fn into_transaction(self) -> Result<Transaction> {
        let txid_str = self.txid.as_str();
        if txid_str.is_empty() || !txid_str.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(invalid(txid_str, "txid must be a non-empty hex string"));
        }
        let txid = Txid::new(txid_str);

        let mut inputs = Vec::with_capacity(self.inputs.len());
        for input in self.inputs {
            if input.value_sat < 0 {
                return Err(invalid(txid_str, "negative input amount"));
            }
            let address = Address::new(&input.address)
                .ok_or_else(|| invalid(txid_str, "empty input address"))?;
            if address.is_burn() {
                return Err(invalid(txid_str, "burn outputs cannot be spent"));
            }
            inputs.push(TxInput {
                address,
                amount: input.value_sat,
            });
        }

        let mut outputs = Vec::with_capacity(self.outputs.len());
        for (position, output) in self.outputs.into_iter().enumerate() {
            if output.value_sat < 0 {
                return Err(invalid(txid_str, "negative output amount"));
            }
            let address = match output.kind {
                OutputKind::OpReturn => Address::burn(),
                OutputKind::NonStandard => Address::dummy(&txid, position),
                OutputKind::Standard => output
                    .address
                    .as_deref()
                    .and_then(Address::new)
                    .unwrap_or_else(|| Address::dummy(&txid, position)),
            };
            outputs.push(TxOutput {
                address,
                amount: output.value_sat,
                kind: output.kind,
            });
        }

        if self.coinbase && !inputs.is_empty() {
            return Err(invalid(txid_str, "coinbase transaction with inputs"));
        }
        if !self.coinbase && inputs.is_empty() {
            return Err(invalid(txid_str, "non-coinbase transaction without inputs"));
        }
        let total = |amounts: Vec<i64>| {
            amounts
                .into_iter()
                .try_fold(0i64, |acc, v| acc.checked_add(v))
                .ok_or_else(|| invalid(txid_str, "amount overflow"))
        };
        let input_total = total(inputs.iter().map(|i| i.amount).collect())?;
        let output_total = total(outputs.iter().map(|o| o.amount).collect())?;
        if !self.coinbase && output_total > input_total {
            return Err(invalid(
                txid_str,
                format!("outputs {output_total} sat exceed inputs {input_total} sat"),
            ));
        }

        Ok(Transaction {
            txid,
            height: self.height,
            index_in_block: self.index_in_block,
            inputs,
            outputs,
            is_coinbase: self.coinbase,
        })
    }

    fn from_transaction(tx: &Transaction) -> Self {
        TxRecord {
            txid: tx.txid.to_string(),
            height: tx.height,
            index_in_block: tx.index_in_block,
            coinbase: tx.is_coinbase,
            inputs: tx
                .inputs
                .iter()
                .map(|i| InputRecord {
                    address: i.address.to_string(),
                    value_sat: i.amount,
                })
                .collect(),
            outputs: tx
                .outputs
                .iter()
                .enumerate()
                .map(|(pos, o)| OutputRecord {
                    address: match o.kind {
                        OutputKind::Standard if o.address != Address::dummy(&tx.txid, pos) => {
                            Some(o.address.to_string())
                        }
                        _ => None,
                    },
                    value_sat: o.amount,
                    kind: o.kind,
                })
                .collect(),
        }
    }
}

/// Parse a line-delimited chain. Blank lines are ignored; records may appear
/// in any order and are sorted into chain order.
pub fn parse_chain<R: BufRead>(reader: R) -> Result<ChainIndex> {
    let mut txs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TxRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        let tx = record.into_transaction().map_err(|e| match e {
            Error::InvalidTransaction { txid, msg } => Error::Parse {
                line: line_no,
                msg: format!("transaction {txid}: {msg}"),
            },
            other => other,
        })?;
        txs.push(tx);
    }
    ChainIndex::from_transactions(txs)
}

/// Serialize every transaction back into the line-delimited format, in
/// chain order.
pub fn write_chain<W: Write>(index: &ChainIndex, mut writer: W) -> Result<()> {
    for tx in index.transactions() {
        write_transaction(tx, &mut writer)?;
    }
    Ok(())
}

pub(crate) fn write_transaction<W: Write>(tx: &Transaction, writer: &mut W) -> Result<()> {
    let line = serde_json::to_string(&TxRecord::from_transaction(tx))
        .map_err(|e| Error::Format(e.to_string()))?;
    writeln!(writer, "{line}")?;
    Ok(())
}

impl ChainIndex {
    /// Build an index from already-validated transactions.
    pub fn from_transactions(mut txs: Vec<Transaction>) -> Result<Self> {
        txs.sort_by_key(|a| a.position());
        for pair in txs.windows(2) {
            if pair[0].position() == pair[1].position() {
                return Err(invalid(
                    pair[1].txid.as_str(),
                    format!(
                        "position ({}, {}) already taken by {}",
                        pair[1].height, pair[1].index_in_block, pair[0].txid
                    ),
                ));
            }
        }

        let mut by_txid = HashMap::with_capacity(txs.len());
        let mut by_address: HashMap<Address, Occurrences> = HashMap::new();
        for (i, tx) in txs.iter().enumerate() {
            let r = TxRef(u32::try_from(i).map_err(|_| Error::Format("chain too large".into()))?);
            if by_txid.insert(tx.txid.clone(), r).is_some() {
                return Err(Error::DuplicateTxid(tx.txid.to_string()));
            }
            for input in &tx.inputs {
                let occ = by_address.entry(input.address.clone()).or_default();
                if occ.as_input.last() != Some(&r) {
                    occ.as_input.push(r);
                }
            }
            for output in &tx.outputs {
                let occ = by_address.entry(output.address.clone()).or_default();
                if occ.as_output.last() != Some(&r) {
                    occ.as_output.push(r);
                }
            }
        }

        Ok(ChainIndex {
            txs,
            by_txid,
            by_address,
        })
    }

    pub fn len(&self) -> usize {
        self.txs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.txs.is_empty()
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.txs
    }

    pub fn tx(&self, r: TxRef) -> &Transaction {
        &self.txs[r.idx()]
    }

    pub fn lookup(&self, txid: &str) -> Option<TxRef> {
        self.by_txid.get(txid).copied()
    }

    pub fn get(&self, txid: &str) -> Result<&Transaction> {
        self.lookup(txid)
            .map(|r| self.tx(r))
            .ok_or_else(|| Error::UnknownTransaction(txid.to_string()))
    }

    pub fn contains_address(&self, address: &str) -> bool {
        self.by_address.contains_key(address)
    }

    pub fn address_count(&self) -> usize {
        self.by_address.len()
    }

    pub fn addresses(&self) -> impl Iterator<Item = &Address> {
        self.by_address.keys()
    }

    /// Transactions spending from `address`, in chain order.
    pub fn input_occurrences(&self, address: &str) -> &[TxRef] {
        self.by_address
            .get(address)
            .map_or(&[][..], |o| o.as_input.as_slice())
    }

    /// Transactions paying to `address`, in chain order.
    pub fn output_occurrences(&self, address: &str) -> &[TxRef] {
        self.by_address
            .get(address)
            .map_or(&[][..], |o| o.as_output.as_slice())
    }

    /// All transactions in a given block, in intra-block order.
    pub fn block(&self, height: u64) -> &[Transaction] {
        let lo = self.txs.partition_point(|t| t.height < height);
        let hi = self.txs.partition_point(|t| t.height <= height);
        &self.txs[lo..hi]
    }

    /// Earliest transaction in which `address` appears on either side.
    pub fn first_occurrence(&self, address: &str) -> Option<TxRef> {
        let occ = self.by_address.get(address)?;
        match (occ.as_input.first(), occ.as_output.first()) {
            (Some(&a), Some(&b)) => Some(a.min(b)),
            (Some(&a), None) => Some(a),
            (None, Some(&b)) => Some(b),
            (None, None) => None,
        }
    }

    pub fn first_transaction_of(&self, address: &str) -> Result<&Transaction> {
        self.first_occurrence(address)
            .map(|r| self.tx(r))
            .ok_or_else(|| Error::UnknownAddress(address.to_string()))
    }

    /// True when `address` appears in some transaction strictly before `at`.
    pub fn seen_before(&self, address: &str, at: TxRef) -> bool {
        self.first_occurrence(address).is_some_and(|first| first < at)
    }

    /// The transaction that spends the balance `address` received in
    /// `producer`: the first spend of the address after the producer.
    pub fn spender_of(&self, producer: TxRef, address: &str) -> Option<TxRef> {
        let spends = self.input_occurrences(address);
        let i = spends.partition_point(|&r| r <= producer);
        spends.get(i).copied()
    }

    /// Transactions whose payments to `address` are drained by the spend in
    /// `consumer`: outputs since the previous spend of the address (the
    /// previous spend itself included, its outputs follow its inputs).
    pub fn funders_of(&self, consumer: TxRef, address: &str) -> &[TxRef] {
        let spends = self.input_occurrences(address);
        let prev = spends[..spends.partition_point(|&r| r < consumer)]
            .last()
            .copied();
        let outputs = self.output_occurrences(address);
        let hi = outputs.partition_point(|&r| r < consumer);
        let lo = prev.map_or(0, |p| outputs.partition_point(|&r| r < p));
        &outputs[lo..hi]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<ChainIndex> {
        parse_chain(s.as_bytes())
    }

    fn line(txid: &str, h: u64, i: u32, cb: bool, ins: &str, outs: &str) -> String {
        format!(
            r#"{{"txid":"{txid}","height":{h},"index_in_block":{i},"coinbase":{cb},"inputs":[{ins}],"outputs":[{outs}]}}"#
        )
    }

    fn inp(a: &str, v: i64) -> String {
        format!(r#"{{"address":"{a}","value_sat":{v}}}"#)
    }

    fn out(a: Option<&str>, v: i64, kind: &str) -> String {
        match a {
            Some(a) => format!(r#"{{"address":"{a}","value_sat":{v},"kind":"{kind}"}}"#),
            None => format!(r#"{{"address":null,"value_sat":{v},"kind":"{kind}"}}"#),
        }
    }

    #[test]
    fn empty_stream() {
        let idx = parse("").unwrap();
        assert!(idx.is_empty());
        assert_eq!(idx.address_count(), 0);
    }

    #[test]
    fn opreturn_becomes_burn() {
        let s = line(
            "01",
            1,
            0,
            false,
            &inp("a", 10),
            &[out(Some("b"), 10, "standard"), out(None, 0, "opreturn")].join(","),
        );
        let idx = parse(&s).unwrap();
        assert_eq!(idx.get("01").unwrap().outputs[1].address.as_str(), "burn");
    }

    #[test]
    fn nonstandard_becomes_dummy() {
        let s = line(
            "aa",
            1,
            0,
            false,
            &inp("a", 10),
            &[out(Some("b"), 5, "standard"), out(Some("xx"), 5, "nonstandard")].join(","),
        );
        let idx = parse(&s).unwrap();
        assert_eq!(idx.get("aa").unwrap().outputs[1].address.as_str(), "dummy:aa:1");
        // null standard address is also rewritten
        let s = line("ab", 1, 0, false, &inp("a", 10), &out(None, 3, "standard"));
        let idx = parse(&s).unwrap();
        assert_eq!(idx.get("ab").unwrap().outputs[0].address.as_str(), "dummy:ab:0");
    }

    #[test]
    fn fee_is_exact() {
        let s = line("0a", 3, 0, false, &inp("a", 1_000_000_007), &out(Some("b"), 999_999_999, "standard"));
        let idx = parse(&s).unwrap();
        assert_eq!(idx.get("0a").unwrap().fee(), Some(8));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let good = line("01", 1, 0, true, "", &out(Some("a"), 5, "standard"));
        let err = parse(&format!("{good}\nnot json")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");

        let overspend = line("02", 2, 0, false, &inp("a", 5), &out(Some("b"), 6, "standard"));
        let err = parse(&format!("{good}\n\n{overspend}")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");

        let negative = line("03", 2, 0, false, &inp("a", -5), &out(Some("b"), 0, "standard"));
        assert!(matches!(parse(&negative).unwrap_err(), Error::Parse { line: 1, .. }));

        let unknown_field = r#"{"txid":"04","height":1,"index_in_block":0,"coinbase":true,"inputs":[],"outputs":[],"extra":1}"#;
        assert!(matches!(parse(unknown_field).unwrap_err(), Error::Parse { line: 1, .. }));

        let bad_hex = line("zz", 1, 0, true, "", "");
        assert!(parse(&bad_hex).is_err());
    }

    #[test]
    fn duplicate_txid_rejected() {
        let a = line("01", 1, 0, true, "", &out(Some("a"), 5, "standard"));
        let b = line("01", 2, 0, true, "", &out(Some("b"), 5, "standard"));
        assert!(matches!(
            parse(&format!("{a}\n{b}")).unwrap_err(),
            Error::DuplicateTxid(_)
        ));
    }

    #[test]
    fn first_transaction_ordering() {
        let s = [
            line("0c", 12, 0, false, &inp("x", 5), &out(Some("y"), 5, "standard")),
            line("0a", 10, 0, true, "", &out(Some("x"), 5, "standard")),
            line("b3", 20, 3, true, "", &out(Some("q"), 5, "standard")),
            line("b7", 20, 7, false, &inp("q", 5), &out(Some("q2"), 5, "standard")),
            line("b1", 20, 1, true, "", &out(Some("z"), 5, "standard")),
        ]
        .join("\n");
        let idx = parse(&s).unwrap();
        assert_eq!(idx.first_transaction_of("y").unwrap().txid.as_str(), "0c");
        assert_eq!(idx.first_transaction_of("x").unwrap().txid.as_str(), "0a");
        assert_eq!(idx.first_transaction_of("q").unwrap().txid.as_str(), "b3");
        assert!(matches!(
            idx.first_transaction_of("nope").unwrap_err(),
            Error::UnknownAddress(_)
        ));
        assert_eq!(idx.block(20).len(), 3);
        assert_eq!(idx.block(20)[0].txid.as_str(), "b1");
    }

    #[test]
    fn spend_links_follow_balance_semantics() {
        // a receives in t1 and t2, spends in t3, receives in t4, spends in t5
        let s = [
            line("01", 1, 0, true, "", &out(Some("a"), 5, "standard")),
            line("02", 2, 0, true, "", &out(Some("a"), 5, "standard")),
            line("03", 3, 0, false, &inp("a", 10), &[out(Some("b"), 4, "standard"), out(Some("a"), 6, "standard")].join(",")),
            line("04", 4, 0, true, "", &out(Some("a"), 1, "standard")),
            line("05", 5, 0, false, &inp("a", 7), &out(Some("c"), 7, "standard")),
        ]
        .join("\n");
        let idx = parse(&s).unwrap();
        let r = |t: &str| idx.lookup(t).unwrap();
        assert_eq!(idx.funders_of(r("03"), "a"), &[r("01"), r("02")]);
        assert_eq!(idx.funders_of(r("05"), "a"), &[r("03"), r("04")]);
        assert_eq!(idx.spender_of(r("01"), "a"), Some(r("03")));
        assert_eq!(idx.spender_of(r("03"), "a"), Some(r("05")));
        assert_eq!(idx.spender_of(r("05"), "c"), None);
        assert!(idx.seen_before("a", r("02")));
        assert!(!idx.seen_before("c", r("05")));
    }

    #[test]
    fn round_trip() {
        let s = [
            line("01", 1, 0, true, "", &[out(Some("a"), 5, "standard"), out(None, 0, "opreturn")].join(",")),
            line("02", 2, 0, false, &inp("a", 5), &[out(None, 2, "standard"), out(Some("s"), 2, "nonstandard")].join(",")),
        ]
        .join("\n");
        let idx = parse(&s).unwrap();
        let mut buf = Vec::new();
        write_chain(&idx, &mut buf).unwrap();
        let again = parse_chain(buf.as_slice()).unwrap();
        assert_eq!(idx, again);
    }
}
