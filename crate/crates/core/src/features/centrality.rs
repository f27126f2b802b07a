//! Centrality measures on a compact, index-based copy of an actor graph.
//!
//! Conventions follow the igraph defaults: weighted path lengths use the
//! edge weight as a distance, closeness is normalized over the reachable
//! set, and betweenness is left unnormalized.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use crate::actorgraph::ActorGraph;
use crate::clustering::ActorId;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    In,
    Out,
    All,
}

/// Multigraph over dense vertex indices `0..n`.
#[derive(Debug, Clone)]
pub struct CompactGraph<F> {
    pub n: usize,
    pub edges: Vec<(usize, usize, F)>,
}

impl<F: Scalar> CompactGraph<F> {
    pub fn new(n: usize, edges: Vec<(usize, usize, F)>) -> Self {
        assert!(edges.iter().all(|&(s, d, _)| s < n && d < n), "edge endpoint out of range");
        CompactGraph { n, edges }
    }

    /// Returns the graph, the vertex ids in index order and the center index.
    pub fn from_actor_graph(g: &ActorGraph<F>) -> (Self, Vec<ActorId>, usize) {
        let ids: Vec<ActorId> = g.vertices().iter().copied().collect();
        let pos: HashMap<ActorId, usize> = ids.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let edges = g
            .edges()
            .iter()
            .map(|e| (pos[&e.src], pos[&e.dst], e.weight))
            .collect();
        let center = pos[&g.center()];
        (CompactGraph { n: ids.len(), edges }, ids, center)
    }

    /// Weighted adjacency lists in the traversal direction of `mode`,
    /// loops dropped.
    fn adjacency(&self, mode: Mode) -> Vec<Vec<(usize, F)>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(s, d, w) in &self.edges {
            if s == d {
                continue;
            }
            match mode {
                Mode::Out => adj[s].push((d, w)),
                Mode::In => adj[d].push((s, w)),
                Mode::All => {
                    adj[s].push((d, w));
                    adj[d].push((s, w));
                }
            }
        }
        adj
    }

    /// Neighbor sets without multiplicity or loops.
    fn simple_adjacency(&self, mode: Mode) -> Vec<Vec<usize>> {
        self.adjacency(mode)
            .into_iter()
            .map(|l| {
                let mut v: Vec<usize> = l.into_iter().map(|(u, _)| u).collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect()
    }
}

struct MinDist<F>(F, usize);

impl<F: PartialOrd> PartialEq for MinDist<F> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<F: PartialOrd> Eq for MinDist<F> {}
impl<F: PartialOrd> PartialOrd for MinDist<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<F: PartialOrd> Ord for MinDist<F> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .partial_cmp(&self.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.1.cmp(&self.1))
    }
}

/// Shortest-path distances from `source`; `None` for unreachable vertices.
pub fn distances<F: Scalar>(g: &CompactGraph<F>, source: usize, mode: Mode, weighted: bool) -> Vec<Option<F>> {
    let adj = g.adjacency(mode);
    let mut dist: Vec<Option<F>> = vec![None; g.n];
    dist[source] = Some(F::zero());
    if !weighted {
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].expect("queued vertices have a distance") + F::one();
            for &(u, _) in &adj[v] {
                if dist[u].is_none() {
                    dist[u] = Some(d);
                    queue.push_back(u);
                }
            }
        }
        return dist;
    }
    let mut heap = BinaryHeap::from([MinDist(F::zero(), source)]);
    while let Some(MinDist(d, v)) = heap.pop() {
        if dist[v].is_some_and(|best| d > best) {
            continue;
        }
        for &(u, w) in &adj[v] {
            let nd = d + w;
            if dist[u].is_none_or(|cur| nd < cur) {
                dist[u] = Some(nd);
                heap.push(MinDist(nd, u));
            }
        }
    }
    dist
}

/// Closeness of `v`: `R / sum(d)` over the `R` vertices reachable from it,
/// scaled by `R / (n - 1)`. Zero when nothing is reachable or every
/// reachable vertex is at distance zero.
pub fn closeness_at<F: Scalar>(g: &CompactGraph<F>, v: usize, mode: Mode, weighted: bool) -> F {
    if g.n < 2 {
        return F::zero();
    }
    let dist = distances(g, v, mode, weighted);
    let (mut reach, mut total) = (0usize, F::zero());
    for (u, d) in dist.iter().enumerate() {
        if u != v {
            if let Some(d) = d {
                reach += 1;
                total += *d;
            }
        }
    }
    if reach == 0 || total <= F::zero() {
        return F::zero();
    }
    let r = F::of_usize(reach);
    (r / total) * (r / F::of_usize(g.n - 1))
}

pub fn closeness<F: Scalar>(g: &CompactGraph<F>, mode: Mode, weighted: bool) -> Vec<F> {
    (0..g.n).map(|v| closeness_at(g, v, mode, weighted)).collect()
}

/// Directed, unweighted, unnormalized betweenness (Brandes). Parallel
/// edges count once.
pub fn betweenness<F: Scalar>(g: &CompactGraph<F>) -> Vec<F> {
    let adj = g.simple_adjacency(Mode::Out);
    let mut cb = vec![F::zero(); g.n];
    for s in 0..g.n {
        let mut stack = Vec::with_capacity(g.n);
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); g.n];
        let mut sigma = vec![F::zero(); g.n];
        let mut dist: Vec<i64> = vec![-1; g.n];
        sigma[s] = F::one();
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in &adj[v] {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] = sigma[w] + sigma[v];
                    preds[w].push(v);
                }
            }
        }
        let mut delta = vec![F::zero(); g.n];
        while let Some(w) = stack.pop() {
            let dw = delta[w];
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (F::one() + dw);
            }
            if w != s {
                cb[w] += delta[w];
            }
        }
    }
    cb
}

#[derive(Debug, Clone, Copy)]
pub struct PageRankParams {
    pub damping: f64,
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for PageRankParams {
    fn default() -> Self {
        PageRankParams {
            damping: 0.85,
            tolerance: 1e-12,
            max_iter: 200,
        }
    }
}

/// Weighted directed PageRank. Vertices without outgoing weight spread
/// their mass uniformly.
pub fn pagerank<F: Scalar>(g: &CompactGraph<F>, params: PageRankParams) -> Vec<F> {
    let n = g.n;
    if n == 0 {
        return Vec::new();
    }
    let d = F::of(params.damping);
    let nf = F::of_usize(n);
    let mut out_weight = vec![F::zero(); n];
    for &(s, _, w) in &g.edges {
        out_weight[s] += w;
    }
    let mut pr = vec![F::one() / nf; n];
    for _ in 0..params.max_iter {
        let dangling: F = (0..n)
            .filter(|&v| out_weight[v] <= F::zero())
            .map(|v| pr[v])
            .sum();
        let base = (F::one() - d) / nf + d * dangling / nf;
        let mut next = vec![base; n];
        for &(s, t, w) in &g.edges {
            if out_weight[s] > F::zero() {
                next[t] += d * pr[s] * w / out_weight[s];
            }
        }
        let diff: F = next.iter().zip(&pr).map(|(a, b)| (*a - *b).abs()).sum();
        pr = next;
        if diff.as_f64() < params.tolerance {
            break;
        }
    }
    let total: F = pr.iter().copied().sum();
    pr.iter().map(|&p| p / total).collect()
}

/// Local clustering coefficient on the undirected simple view; zero for
/// vertices with fewer than two neighbors.
pub fn local_clustering<F: Scalar>(g: &CompactGraph<F>) -> Vec<F> {
    let adj = g.simple_adjacency(Mode::All);
    (0..g.n)
        .map(|v| {
            let nb = &adj[v];
            let k = nb.len();
            if k < 2 {
                return F::zero();
            }
            let mut links = 0usize;
            for (i, &a) in nb.iter().enumerate() {
                for &b in &nb[i + 1..] {
                    if adj[a].binary_search(&b).is_ok() {
                        links += 1;
                    }
                }
            }
            F::of_usize(2 * links) / F::of_usize(k * (k - 1))
        })
        .collect()
}

/// k-core index of every vertex by bucket peeling (Batagelj-Zaversnik).
/// Degrees count parallel edges and ignore self-loops.
pub fn coreness<F: Scalar>(g: &CompactGraph<F>, mode: Mode) -> Vec<usize> {
    let n = g.n;
    // `affected[v]` lists the vertices whose degree drops when v is peeled,
    // once per connecting edge.
    let mut deg = vec![0usize; n];
    let mut affected: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(s, d, _) in &g.edges {
        if s == d {
            continue;
        }
        match mode {
            Mode::In => {
                deg[d] += 1;
                affected[s].push(d);
            }
            Mode::Out => {
                deg[s] += 1;
                affected[d].push(s);
            }
            Mode::All => {
                deg[s] += 1;
                deg[d] += 1;
                affected[s].push(d);
                affected[d].push(s);
            }
        }
    }
    let max_deg = deg.iter().copied().max().unwrap_or(0);
    let mut bin = vec![0usize; max_deg + 1];
    for &d in &deg {
        bin[d] += 1;
    }
    let mut start = 0;
    for b in bin.iter_mut() {
        let count = *b;
        *b = start;
        start += count;
    }
    let mut pos = vec![0usize; n];
    let mut vert = vec![0usize; n];
    for v in 0..n {
        pos[v] = bin[deg[v]];
        vert[pos[v]] = v;
        bin[deg[v]] += 1;
    }
    for d in (1..=max_deg).rev() {
        bin[d] = bin[d - 1];
    }
    if !bin.is_empty() {
        bin[0] = 0;
    }
    for i in 0..n {
        let v = vert[i];
        for &u in &affected[v] {
            if deg[u] > deg[v] {
                let du = deg[u];
                let pu = pos[u];
                let pw = bin[du];
                let w = vert[pw];
                if u != w {
                    pos[u] = pw;
                    vert[pu] = w;
                    pos[w] = pu;
                    vert[pw] = u;
                }
                bin[du] += 1;
                deg[u] -= 1;
            }
        }
    }
    deg
}

/// HITS hub and authority scores on the weighted adjacency matrix, each
/// scaled so its maximum is one. All zeros when the graph carries no weight.
pub fn hits<F: Scalar>(g: &CompactGraph<F>) -> (Vec<F>, Vec<F>) {
    let n = g.n;
    let zeros = (vec![F::zero(); n], vec![F::zero(); n]);
    if g.edges.iter().all(|&(_, _, w)| w <= F::zero()) {
        return zeros;
    }
    let scale_to_max = |v: &mut Vec<F>| -> bool {
        let m = v.iter().copied().fold(F::zero(), F::max);
        if m <= F::zero() {
            return false;
        }
        v.iter_mut().for_each(|x| *x /= m);
        true
    };
    let authority_of = |hub: &[F]| {
        let mut a = vec![F::zero(); n];
        for &(s, d, w) in &g.edges {
            a[d] += w * hub[s];
        }
        a
    };
    let mut hub = vec![F::one(); n];
    let mut auth = authority_of(&hub);
    if !scale_to_max(&mut auth) {
        return zeros;
    }
    for _ in 0..10_000 {
        let mut next = vec![F::zero(); n];
        for &(s, d, w) in &g.edges {
            next[s] += w * auth[d];
        }
        if !scale_to_max(&mut next) {
            return zeros;
        }
        let diff = next
            .iter()
            .zip(&hub)
            .map(|(a, b)| (*a - *b).abs())
            .fold(F::zero(), F::max);
        hub = next;
        auth = authority_of(&hub);
        scale_to_max(&mut auth);
        if diff.as_f64() < 1e-13 {
            break;
        }
    }
    (hub, auth)
}

/// Vertices within undirected distance `k` of `v`, `v` included.
pub fn neighborhood_size<F: Scalar>(g: &CompactGraph<F>, v: usize, k: usize) -> usize {
    distances(g, v, Mode::All, false)
        .iter()
        .filter(|d| d.is_some_and(|d| d.as_f64() <= k as f64))
        .count()
}
