#![allow(dead_code)]

use actortrace_core::chainstore::{OutputKind, ServiceTag, TxInput, TxOutput};
use actortrace_core::{Address, ChainIndex, ServiceTagRegistry, Transaction, Txid};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random but valid chain over a small address pool so that addresses are
/// reused, spent repeatedly and occasionally fresh.
pub fn random_chain(seed: u64, n_tx: usize, pool: usize, max_gap: u64) -> ChainIndex {
    let mut r = rng(seed);
    let pool: Vec<Address> = (0..pool).map(|i| Address::new(format!("p{i}")).unwrap()).collect();
    let mut fresh = 0usize;
    let mut height = 0u64;
    let mut index = 0u32;
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

/// Tag a random subset of the pool.
pub fn random_tags(seed: u64, pool: usize, p: f64) -> ServiceTagRegistry {
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
