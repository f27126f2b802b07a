//! Seeded generator of labelled synthetic chains.
//!
//! Every labelled actor lives through one episode of activity shorter than
//! the default subgraph window. Episodes share only never-spent service
//! receive addresses, so each actor's subgraph stays local. Ground truth
//! (labels and wallet ownership) is returned separately from the chain.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::chainstore::{
    Address, ChainIndex, OutputKind, ServiceTag, ServiceTagRegistry, Transaction, TxInput, TxOutput, Txid,
};
use crate::class::Class;
use crate::error::{Error, Result};

/// Longest span of one episode, in blocks, including its funding.
const EPISODE_SPAN: u64 = 150;
const LEAD: u64 = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassProfile {
    /// Typical number of counterparties (victims, bets, community size).
    pub fan_out: f64,
    pub coinjoin_prob: f64,
    /// Chance that change goes to a fresh address rather than back to the
    /// first input address.
    pub change_prob: f64,
    /// Chance that a payment goes to an exchange rather than a peer.
    pub service_prob: f64,
    /// Log-normal parameters of payment sizes, in ln(BTC).
    pub amount_mu: f64,
    pub amount_sigma: f64,
}

impl ClassProfile {
    fn validate(&self, class: Class) -> Result<()> {
        let probs = [self.coinjoin_prob, self.change_prob, self.service_prob];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidArgument(format!("{class} profile: probabilities must lie in [0, 1]")));
        }
        if !(self.fan_out >= 1.0 && self.fan_out.is_finite()) {
            return Err(Error::InvalidArgument(format!("{class} profile: fan_out must be at least 1")));
        }
        if !(self.amount_sigma >= 0.0 && self.amount_sigma.is_finite() && self.amount_mu.is_finite()) {
            return Err(Error::InvalidArgument(format!("{class} profile: bad amount distribution")));
        }
        Ok(())
    }
}

/// Generator settings; absent JSON fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub seed: u64,
    pub actors_per_class: usize,
    pub blocks: u64,
    /// Subgraph window the chain is meant for; bounds `blocks` from below.
    pub window: u64,
    pub exchanges: usize,
    pub gambling_sites: usize,
    pub ransom: ClassProfile,
    pub gambling: ClassProfile,
    pub random: ClassProfile,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 7,
            actors_per_class: 90,
            blocks: 30_000,
            window: 144,
            exchanges: 6,
            gambling_sites: 5,
            ransom: ClassProfile {
                fan_out: 20.0,
                coinjoin_prob: 0.3,
                change_prob: 0.9,
                service_prob: 0.3,
                amount_mu: -3.9,
                amount_sigma: 0.7,
            },
            gambling: ClassProfile {
                fan_out: 12.0,
                coinjoin_prob: 0.0,
                change_prob: 0.5,
                service_prob: 0.5,
                amount_mu: -3.5,
                amount_sigma: 1.0,
            },
            random: ClassProfile {
                fan_out: 7.0,
                coinjoin_prob: 0.05,
                change_prob: 0.8,
                service_prob: 0.2,
                amount_mu: -2.5,
                amount_sigma: 1.0,
            },
        }
    }
}

impl SynthConfig {
    pub fn profile(&self, class: Class) -> &ClassProfile {
        match class {
            Class::Gambling => &self.gambling,
            Class::Random => &self.random,
            Class::Ransom => &self.ransom,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.actors_per_class == 0 {
            return Err(Error::InvalidArgument("actors_per_class must be positive".into()));
        }
        if self.window == 0 || self.blocks < 2 * self.window + 1 {
            return Err(Error::InvalidArgument(format!(
                "blocks ({}) must be at least 2 * window + 1 ({})",
                self.blocks,
                2 * self.window + 1
            )));
        }
        if self.blocks < EPISODE_SPAN + LEAD {
            return Err(Error::InvalidArgument(format!("blocks must be at least {}", EPISODE_SPAN + LEAD)));
        }
        if self.exchanges == 0 || self.gambling_sites < 2 {
            return Err(Error::InvalidArgument("need at least one exchange and two gambling sites".into()));
        }
        for class in Class::ALL {
            self.profile(class).validate(class)?;
        }
        Ok(())
    }
}

/// A generated chain with its ground truth.
#[derive(Debug, Clone)]
pub struct SynthData {
    pub chain: ChainIndex,
    pub tags: ServiceTagRegistry,
    /// One seed address per labelled actor, in generation order.
    pub labels: Vec<(Address, Class)>,
    /// Owning wallet of every non-placeholder address.
    pub wallets: BTreeMap<Address, u32>,
}

impl SynthData {
    pub fn write_labels_csv<W: Write>(&self, w: W) -> Result<()> {
        write_labels(&self.labels, w)
    }

    pub fn write_wallets_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["address", "wallet_id"])?;
        for (a, id) in &self.wallets {
            w.write_record([a.as_str(), &id.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn write_labels<W: Write>(labels: &[(Address, Class)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["actor_address", "class"])?;
    for (a, c) in labels {
        w.write_record([a.as_str(), c.name()])?;
    }
    w.flush()?;
    Ok(())
}

/// Read an `actor_address,class` file.
pub fn read_labels<R: Read>(reader: R) -> Result<Vec<(Address, Class)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.len() != 2 || &header[0] != "actor_address" || &header[1] != "class" {
        return Err(Error::Format("label file header must be actor_address,class".into()));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let address = Address::new(&rec[0]).ok_or(Error::Parse { line, msg: "empty address".into() })?;
        let class = rec[1].parse().map_err(|e: Error| Error::Parse { line, msg: e.to_string() })?;
        out.push((address, class));
    }
    Ok(out)
}

pub fn read_wallets<R: Read>(reader: R) -> Result<BTreeMap<Address, u32>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let address = Address::new(&rec[0]).ok_or(Error::Parse { line, msg: "empty address".into() })?;
        let id = rec[1].parse().map_err(|e: std::num::ParseIntError| Error::Parse { line, msg: e.to_string() })?;
        out.insert(address, id);
    }
    Ok(out)
}

/// Generate a chain for `cfg`. Identical configs give identical output.
pub fn generate_chain(cfg: &SynthConfig) -> Result<SynthData> {
    cfg.validate()?;
    let mut world = World::new(cfg);
    let mut plan: Vec<Class> = Class::ALL
        .iter()
        .flat_map(|&c| std::iter::repeat_n(c, cfg.actors_per_class))
        .collect();
    plan.shuffle(&mut world.rng);
    let mut labels = Vec::with_capacity(plan.len());
    for class in plan {
        let start = world.rng.random_range(LEAD..=cfg.blocks - EPISODE_SPAN);
        world.episode += 1;
        world.step = 0;
        let seed = match class {
            Class::Ransom => world.ransom_episode(start),
            Class::Gambling => world.gambling_episode(start),
            Class::Random => world.random_episode(start),
        };
        labels.push((seed, class));
    }
    world.finish(labels)
}

#[derive(Debug, Clone, Copy)]
enum Change {
    Fresh,
    Reuse,
}

struct Pending {
    key: (u64, u32, u32),
    coinbase: bool,
    inputs: Vec<(Address, i64)>,
    outputs: Vec<(Address, i64)>,
}

#[derive(Default)]
struct Wallet {
    id: u32,
    balances: BTreeMap<Address, i64>,
    /// Most recently created address.
    home: Option<Address>,
}

impl Wallet {
    fn total(&self) -> i64 {
        self.balances.values().sum()
    }
}

struct Exchange {
    wallet: u32,
    deposits: Vec<Address>,
}

struct Site {
    wallet: u32,
    recv: Address,
}

struct World<'a> {
    cfg: &'a SynthConfig,
    rng: ChaCha8Rng,
    next_address: u64,
    next_wallet: u32,
    episode: u32,
    step: u32,
    pending: Vec<Pending>,
    tags: ServiceTagRegistry,
    owners: BTreeMap<Address, u32>,
    wallets: Vec<Wallet>,
    tracked: HashMap<Address, usize>,
    exchanges: Vec<Exchange>,
    sites: Vec<Site>,
}

const DEPOSIT_POOL: usize = 40;

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn sats(btc: f64) -> i64 {
    (btc * 1e8).round() as i64
}

impl<'a> World<'a> {
    fn new(cfg: &'a SynthConfig) -> Self {
        let mut w = World {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            next_address: 0,
            next_wallet: 0,
            episode: 0,
            step: 0,
            pending: Vec::new(),
            tags: ServiceTagRegistry::new(),
            owners: BTreeMap::new(),
            wallets: Vec::new(),
            tracked: HashMap::new(),
            exchanges: Vec::new(),
            sites: Vec::new(),
        };
        for _ in 0..cfg.exchanges {
            let wallet = w.new_wallet_id();
            w.exchanges.push(Exchange { wallet, deposits: Vec::new() });
        }
        for _ in 0..cfg.gambling_sites {
            let wallet = w.new_wallet_id();
            let recv = w.address_for(wallet);
            w.tags.insert(recv.clone(), ServiceTag::Gambling).expect("fresh address");
            w.sites.push(Site { wallet, recv });
        }
        w
    }

    fn new_wallet_id(&mut self) -> u32 {
        self.next_wallet += 1;
        self.next_wallet - 1
    }

    /// Unique address owned by ground-truth wallet `owner`.
    fn address_for(&mut self, owner: u32) -> Address {
        let c = self.next_address;
        self.next_address += 1;
        let a = Address::new(format!("bc1q{:016x}{:016x}", mix(c), mix(c ^ 0x5bd1_e995))).expect("non-empty");
        self.owners.insert(a.clone(), owner);
        a
    }

    fn new_wallet(&mut self) -> usize {
        let id = self.new_wallet_id();
        self.wallets.push(Wallet { id, ..Wallet::default() });
        self.wallets.len() - 1
    }

    fn fresh(&mut self, w: usize) -> Address {
        let a = self.address_for(self.wallets[w].id);
        self.tracked.insert(a.clone(), w);
        self.wallets[w].home = Some(a.clone());
        a
    }

    fn home(&mut self, w: usize) -> Address {
        match self.wallets[w].home.clone() {
            Some(a) => a,
            None => self.fresh(w),
        }
    }

    fn tagged(&mut self, owner: u32, tag: ServiceTag) -> Address {
        let a = self.address_for(owner);
        self.tags.insert(a.clone(), tag).expect("fresh address");
        a
    }

    fn amount(&mut self, class: Class) -> i64 {
        let p = self.cfg.profile(class);
        let d = LogNormal::new(p.amount_mu, p.amount_sigma).expect("validated profile");
        sats(d.sample(&mut self.rng)).max(20_000)
    }

    fn fee(&mut self) -> i64 {
        self.rng.random_range(500..=3_000)
    }

    fn count(&mut self, mean: f64, min: usize) -> usize {
        let lo = (mean * 0.5).round().max(min as f64) as usize;
        let hi = (mean * 1.5).round().max(lo as f64) as usize;
        self.rng.random_range(lo..=hi)
    }

    fn clamp_height(&self, h: u64) -> u64 {
        h.min(self.cfg.blocks - 1)
    }

    fn emit(&mut self, height: u64, coinbase: bool, inputs: Vec<(Address, i64)>, outputs: Vec<(Address, i64)>) {
        for (a, v) in &outputs {
            if let Some(&w) = self.tracked.get(a) {
                *self.wallets[w].balances.entry(a.clone()).or_default() += v;
            }
        }
        self.step += 1;
        let height = self.clamp_height(height);
        self.pending.push(Pending { key: (height, self.episode, self.step), coinbase, inputs, outputs });
    }

    fn coinbase(&mut self, height: u64, outputs: Vec<(Address, i64)>) {
        self.emit(height, true, Vec::new(), outputs);
    }

    /// Drain every address of wallet `w`, paying `payees` and returning the
    /// rest as change.
    fn spend(&mut self, height: u64, w: usize, payees: Vec<(Address, i64)>, change: Change) {
        let inputs: Vec<(Address, i64)> = std::mem::take(&mut self.wallets[w].balances).into_iter().collect();
        let total: i64 = inputs.iter().map(|(_, v)| v).sum();
        let fee = self.fee();
        let paid: i64 = payees.iter().map(|(_, v)| v).sum();
        let rest = total - paid - fee;
        assert!(rest > 0 && payees.iter().all(|(_, v)| *v > 0), "payment exceeds wallet balance");
        let change_to = match change {
            Change::Fresh => self.fresh(w),
            Change::Reuse => inputs[0].0.clone(),
        };
        let mut outputs = payees;
        outputs.push((change_to, rest));
        self.emit(height, false, inputs, outputs);
    }

    /// Drain wallet `w` into a single output.
    fn sweep(&mut self, height: u64, w: usize, to: Address) {
        let inputs: Vec<(Address, i64)> = std::mem::take(&mut self.wallets[w].balances).into_iter().collect();
        let total: i64 = inputs.iter().map(|(_, v)| v).sum();
        let fee = self.fee();
        self.emit(height, false, inputs, vec![(to, total - fee)]);
    }

    fn change_mode(&mut self, class: Class) -> Change {
        if self.rng.random_bool(self.cfg.profile(class).change_prob) {
            Change::Fresh
        } else {
            Change::Reuse
        }
    }

    /// Exchange withdrawal of `amount` to a fresh address of wallet `w`.
    /// Returns the receiving address.
    fn withdraw(&mut self, height: u64, w: usize, amount: i64) -> Address {
        let ex = self.rng.random_range(0..self.exchanges.len());
        let owner = self.exchanges[ex].wallet;
        let hot = self.tagged(owner, ServiceTag::Exchange);
        let spare = self.rng.random_range(amount / 2..=amount * 4);
        let fee = self.fee();
        self.coinbase(height, vec![(hot.clone(), amount + spare + fee)]);
        let to = self.fresh(w);
        let back = self.tagged(owner, ServiceTag::Exchange);
        self.emit(height, false, vec![(hot, amount + spare + fee)], vec![(to.clone(), amount), (back, spare)]);
        to
    }

    /// A customer deposit address at a random exchange; reused once the
    /// pool is full.
    fn deposit_address(&mut self) -> Address {
        let ex = self.rng.random_range(0..self.exchanges.len());
        if self.exchanges[ex].deposits.len() < DEPOSIT_POOL {
            let owner = self.exchanges[ex].wallet;
            let a = self.tagged(owner, ServiceTag::Exchange);
            self.exchanges[ex].deposits.push(a.clone());
            a
        } else {
            let i = self.rng.random_range(0..DEPOSIT_POOL);
            self.exchanges[ex].deposits[i].clone()
        }
    }

    /// Wallets funded by one coinbase each with a single known address.
    fn funded_wallets(&mut self, height: u64, n: usize, class: Class) -> Vec<usize> {
        let mut out = Vec::with_capacity(n);
        let mut outputs = Vec::with_capacity(n);
        for _ in 0..n {
            let w = self.new_wallet();
            let a = self.fresh(w);
            let v = self.amount(class) * 4;
            outputs.push((a, v));
            out.push(w);
        }
        self.coinbase(height, outputs);
        out
    }

    /// Equal-denomination mix of wallet `w` with 4–5 coinbase-funded peers.
    fn coinjoin(&mut self, height: u64, w: usize) {
        let balance = self.wallets[w].total();
        let denom = (balance as f64 * self.rng.random_range(0.3..0.6)) as i64;
        let peers = self.rng.random_range(4..=5);
        let mut parties = vec![w];
        let mut cb = Vec::new();
        for _ in 0..peers {
            let p = self.new_wallet();
            let a = self.fresh(p);
            cb.push((a, denom + 10_000 + self.rng.random_range(denom / 4..=denom)));
            parties.push(p);
        }
        self.coinbase(height.saturating_sub(1), cb);
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        for &p in &parties {
            let ins: Vec<(Address, i64)> = std::mem::take(&mut self.wallets[p].balances).into_iter().collect();
            let total: i64 = ins.iter().map(|(_, v)| v).sum();
            let fee = self.fee();
            inputs.extend(ins);
            let mixed = self.fresh(p);
            let change = self.fresh(p);
            outputs.push((mixed, denom));
            outputs.push((change, total - denom - fee));
        }
        outputs.shuffle(&mut self.rng);
        self.emit(height, false, inputs, outputs);
    }

    fn ransom_episode(&mut self, start: u64) -> Address {
        let class = Class::Ransom;
        let p = self.cfg.ransom.clone();
        let r = self.new_wallet();
        let n_addr = self.rng.random_range(1..=3);
        let ransom_addrs: Vec<Address> = (0..n_addr).map(|_| self.fresh(r)).collect();
        let partners = {
            let n = self.rng.random_range(2..=4);
            let at = start - self.rng.random_range(1..=LEAD);
            self.funded_wallets(at, n, Class::Random)
        };

        let victims = self.count(p.fan_out, 2);
        let mut times: Vec<u64> = (0..victims).map(|_| start + self.rng.random_range(0..60)).collect();
        times.sort_unstable();
        times[0] = start;
        for (i, &t) in times.iter().enumerate() {
            let v = self.new_wallet();
            let pay = self.amount(class);
            let extra = self.rng.random_range(pay / 5..=pay * 2);
            let at = t.saturating_sub(self.rng.random_range(1..=LEAD));
            self.withdraw(at, v, pay + extra + 5_000);
            let to = if i == 0 { ransom_addrs[0].clone() } else { ransom_addrs.choose(&mut self.rng).expect("non-empty").clone() };
            self.spend(t, v, vec![(to, pay)], Change::Fresh);
        }

        let mut t = times[times.len() - 1] + self.rng.random_range(1..=5);
        let pooled = self.fresh(r);
        self.sweep(t, r, pooled);
        if self.rng.random_bool(p.coinjoin_prob) {
            t += self.rng.random_range(1..=5);
            self.coinjoin(t, r);
        }
        let steps = self.count(p.fan_out / 4.0, 2);
        for _ in 0..steps {
            t += self.rng.random_range(1..=8);
            let balance = self.wallets[r].total();
            let pay = (balance as f64 * self.rng.random_range(0.1..0.3)) as i64;
            let to = if self.rng.random_bool(p.service_prob) {
                self.deposit_address()
            } else {
                let w = *partners.choose(&mut self.rng).expect("non-empty");
                self.home(w)
            };
            let change = self.change_mode(class);
            self.spend(t, r, vec![(to, pay)], change);
        }
        t += self.rng.random_range(1..=8);
        let out = self.deposit_address();
        self.sweep(t, r, out);
        ransom_addrs[0].clone()
    }

    fn gambling_episode(&mut self, start: u64) -> Address {
        let class = Class::Gambling;
        let p = self.cfg.gambling.clone();
        let player = self.new_wallet();
        let stake = self.amount(class) * self.rng.random_range(5..=15);
        let seed = self.withdraw(start, player, stake);

        let n_sites = self.rng.random_range(2..=self.sites.len().min(4));
        let sites: Vec<usize> = rand::seq::index::sample(&mut self.rng, self.sites.len(), n_sites).into_vec();
        let mut hot = Vec::with_capacity(n_sites);
        let mut cb = Vec::new();
        for &s in &sites {
            let h = self.new_wallet();
            self.wallets[h].id = self.sites[s].wallet;
            let a = self.fresh(h);
            let float = stake * 10;
            cb.push((a.clone(), float));
            self.tags.insert(a, ServiceTag::Gambling).expect("fresh address");
            hot.push(h);
        }
        let at = start.saturating_sub(self.rng.random_range(1..=LEAD));
        self.coinbase(at, cb);

        #[derive(Clone, Copy)]
        enum Event {
            Bet(usize),
            Payout(usize, i64),
        }
        let bets = self.count(p.fan_out, 2);
        let mut times: Vec<u64> = (0..bets).map(|_| start + self.rng.random_range(1..120)).collect();
        times.sort_unstable();
        let mut queue: Vec<(u64, u32, Event)> = times
            .into_iter()
            .enumerate()
            .map(|(i, t)| (t, i as u32, Event::Bet(self.rng.random_range(0..n_sites))))
            .collect();
        let mut seq = queue.len() as u32;
        let mut done = 0;
        while done < queue.len() {
            queue[done..].sort_by_key(|(t, s, _)| (*t, *s));
            let (t, _, ev) = queue[done];
            done += 1;
            match ev {
                Event::Bet(k) => {
                    let balance = self.wallets[player].total();
                    let bet = (balance as f64 * self.rng.random_range(0.1..0.4)) as i64;
                    if bet < 10_000 {
                        continue;
                    }
                    let recv = self.sites[sites[k]].recv.clone();
                    let change = self.change_mode(class);
                    self.spend(t, player, vec![(recv, bet)], change);
                    if self.rng.random_bool(0.45) {
                        let at = t + self.rng.random_range(1..=4);
                        queue.push((at, seq, Event::Payout(k, bet * 19 / 10)));
                        seq += 1;
                    }
                }
                Event::Payout(k, win) => {
                    let win = win.min(self.wallets[hot[k]].total() - 20_000);
                    if win < 10_000 {
                        continue;
                    }
                    let to = self.home(player);
                    self.spend(t, hot[k], vec![(to, win)], Change::Reuse);
                }
            }
        }
        let last = queue.last().map_or(start, |(t, _, _)| *t);
        if self.rng.random_bool(p.service_prob) && self.wallets[player].total() > 20_000 {
            let out = self.deposit_address();
            let at = last + self.rng.random_range(1..=4);
            self.sweep(at, player, out);
        }
        seed
    }

    fn random_episode(&mut self, start: u64) -> Address {
        let class = Class::Random;
        let p = self.cfg.random.clone();
        let size = self.count(p.fan_out, 4);
        let members: Vec<usize> = (0..size).map(|_| self.new_wallet()).collect();
        let mut seed = None;
        for (i, &m) in members.iter().enumerate() {
            let v = self.amount(class) * self.rng.random_range(3..=8);
            let at = if i == 0 { start } else { start + self.rng.random_range(0..=LEAD) };
            let a = self.withdraw(at, m, v);
            seed.get_or_insert(a);
        }
        // peers pay ring neighbours at distance one or two, which closes
        // triangles around every member
        let payments = size * self.rng.random_range(2..=3);
        let mut times: Vec<u64> = (0..payments).map(|_| start + LEAD + 1 + self.rng.random_range(0..110)).collect();
        times.sort_unstable();
        let cj_at = if self.rng.random_bool(p.coinjoin_prob) { Some(self.rng.random_range(0..payments)) } else { None };
        for (i, t) in times.into_iter().enumerate() {
            let from = if i % 3 == 0 { 0 } else { self.rng.random_range(0..size) };
            let payer = members[from];
            if cj_at == Some(i) && self.wallets[payer].total() > 100_000 {
                self.coinjoin(t, payer);
                continue;
            }
            let balance = self.wallets[payer].total();
            let pay = (balance as f64 * self.rng.random_range(0.1..0.4)) as i64;
            if pay < 10_000 {
                continue;
            }
            let to = if self.rng.random_bool(p.service_prob) {
                self.deposit_address()
            } else {
                let step = *[1usize, 2, size - 1, size - 2].choose(&mut self.rng).expect("non-empty");
                let payee = members[(from + step) % size];
                self.home(payee)
            };
            let change = self.change_mode(class);
            self.spend(t, payer, vec![(to, pay)], change);
        }
        seed.expect("community is non-empty")
    }

    fn finish(mut self, labels: Vec<(Address, Class)>) -> Result<SynthData> {
        self.pending.sort_by_key(|p| p.key);
        let mut txs = Vec::with_capacity(self.pending.len());
        let mut last_height = None;
        let mut index_in_block = 0u32;
        for (n, p) in self.pending.into_iter().enumerate() {
            let height = p.key.0;
            if last_height == Some(height) {
                index_in_block += 1;
            } else {
                index_in_block = 0;
                last_height = Some(height);
            }
            let n = n as u64;
            let txid = Txid::new(format!(
                "{:016x}{:016x}{:016x}{:016x}",
                mix(n),
                mix(n ^ 0xa5a5),
                mix(n ^ 0x5a5a),
                mix(n.rotate_left(32))
            ));
            txs.push(Transaction {
                txid,
                height,
                index_in_block,
                inputs: p.inputs.into_iter().map(|(address, amount)| TxInput { address, amount }).collect(),
                outputs: p
                    .outputs
                    .into_iter()
                    .map(|(address, amount)| TxOutput { address, amount, kind: OutputKind::Standard })
                    .collect(),
                is_coinbase: p.coinbase,
            });
        }
        Ok(SynthData {
            chain: ChainIndex::from_transactions(txs)?,
            tags: self.tags,
            labels,
            wallets: self.owners,
        })
    }
}
