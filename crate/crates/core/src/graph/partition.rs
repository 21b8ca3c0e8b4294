//! Minimum edge-cut bisection: heavy-edge-matching coarsening, greedy graph
//! growing on the coarsest graph, and Fiduccia–Mattheyses refinement while
//! projecting back to the original graph.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::RetweetNetwork;
use crate::error::{Error, Result};

const COARSEN_TO: usize = 24;
const INIT_TRIALS: usize = 8;
const MAX_PASSES: usize = 16;
const SCAN_LIMIT: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionAssignment {
    pub groups: BTreeMap<String, u8>,
    pub cut_size: usize,
    /// Share of nodes in the larger group, in [0.5, 1].
    pub balance: f64,
}

impl PartitionAssignment {
    pub fn group_of(&self, user: &str) -> Option<u8> {
        self.groups.get(user).copied()
    }

    pub fn group_sizes(&self) -> [usize; 2] {
        let mut s = [0; 2];
        for &g in self.groups.values() {
            s[g as usize] += 1;
        }
        s
    }

    pub fn members(&self, group: u8) -> BTreeSet<String> {
        self.groups
            .iter()
            .filter(|(_, &g)| g == group)
            .map(|(u, _)| u.clone())
            .collect()
    }

    /// Cross-group edges of `net` under this assignment.
    pub fn count_cut(&self, net: &RetweetNetwork) -> usize {
        net.edges
            .iter()
            .filter(|(a, b)| {
                matches!((self.group_of(a), self.group_of(b)), (Some(x), Some(y)) if x != y)
            })
            .count()
    }
}

/// Largest admissible group size for `n` unit-weight nodes.
pub(crate) fn max_group_size(n: usize, balance_tol: f64) -> usize {
    let cap = ((0.5 + balance_tol) * n as f64 + 1e-9).floor() as usize;
    cap.max(n.div_ceil(2)).min(n.saturating_sub(1).max(1))
}

/// Splits `net` into two nonempty groups with few crossing edges. The result is
/// deterministic for a given seed and locally optimal under single-node moves that
/// keep the larger group within `max(0.5 + balance_tol, ceil(n/2)/n)` of the nodes.
pub fn bisect_partition(
    net: &RetweetNetwork,
    balance_tol: f64,
    seed: u64,
) -> Result<PartitionAssignment> {
    if !(0.0..=0.5).contains(&balance_tol) {
        return Err(Error::Config(format!(
            "balance_tol must lie in [0, 0.5], got {balance_tol}"
        )));
    }
    let (names, adj) = net.indexed();
    let n = names.len();
    if n < 2 {
        return Err(Error::NotBisectable { nodes: n });
    }
    let g = WGraph::from_adjacency(&adj);
    let maxw = max_group_size(n, balance_tol) as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut part = multilevel(&g, maxw, &mut rng);
    polish(&g, &mut part, maxw);

    // group 0 holds the smallest id, so labels do not depend on the seed
    if part[0] == 1 {
        for p in &mut part {
            *p ^= 1;
        }
    }
    let groups: BTreeMap<String, u8> = names
        .iter()
        .zip(&part)
        .map(|(n, &p)| ((*n).to_owned(), p))
        .collect();
    let cut_size = g.cut(&part) as usize;
    let larger = part
        .iter()
        .filter(|&&p| p == 1)
        .count()
        .max(part.iter().filter(|&&p| p == 0).count());
    Ok(PartitionAssignment {
        groups,
        cut_size,
        balance: larger as f64 / n as f64,
    })
}

/// Weighted graph in compressed adjacency form.
#[derive(Debug, Clone)]
struct WGraph {
    xadj: Vec<usize>,
    adj: Vec<u32>,
    ew: Vec<i64>,
    vw: Vec<i64>,
}

impl WGraph {
    fn from_adjacency(lists: &[Vec<usize>]) -> Self {
        let mut xadj = Vec::with_capacity(lists.len() + 1);
        let mut adj = Vec::new();
        xadj.push(0);
        for l in lists {
            adj.extend(l.iter().map(|&u| u as u32));
            xadj.push(adj.len());
        }
        let ew = vec![1; adj.len()];
        WGraph {
            xadj,
            adj,
            ew,
            vw: vec![1; lists.len()],
        }
    }

    fn n(&self) -> usize {
        self.vw.len()
    }

    fn total_weight(&self) -> i64 {
        self.vw.iter().sum()
    }

    fn nbrs(&self, v: usize) -> impl Iterator<Item = (usize, i64)> + '_ {
        let r = self.xadj[v]..self.xadj[v + 1];
        self.adj[r.clone()]
            .iter()
            .zip(&self.ew[r])
            .map(|(&u, &w)| (u as usize, w))
    }

    fn cut(&self, part: &[u8]) -> i64 {
        let mut c = 0;
        for v in 0..self.n() {
            for (u, w) in self.nbrs(v) {
                if part[u] != part[v] {
                    c += w;
                }
            }
        }
        c / 2
    }

    fn gain(&self, part: &[u8], v: usize) -> i64 {
        self.nbrs(v)
            .map(|(u, w)| if part[u] != part[v] { w } else { -w })
            .sum()
    }

    /// Heavy-edge matching. Returns the coarse graph and the fine→coarse map.
    fn coarsen(&self, rng: &mut ChaCha8Rng, max_vw: i64) -> (WGraph, Vec<usize>) {
        let n = self.n();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut mate = vec![usize::MAX; n];
        for &v in &order {
            if mate[v] != usize::MAX {
                continue;
            }
            let mut best: Option<(i64, usize)> = None;
            for (u, w) in self.nbrs(v) {
                if u == v || mate[u] != usize::MAX || self.vw[u] + self.vw[v] > max_vw {
                    continue;
                }
                if best.is_none_or(|(bw, bu)| w > bw || (w == bw && u < bu)) {
                    best = Some((w, u));
                }
            }
            match best {
                Some((_, u)) => {
                    mate[v] = u;
                    mate[u] = v;
                }
                None => mate[v] = v,
            }
        }
        let mut cmap = vec![usize::MAX; n];
        let mut nc = 0;
        for v in 0..n {
            if cmap[v] == usize::MAX {
                cmap[v] = nc;
                cmap[mate[v]] = nc;
                nc += 1;
            }
        }
        let mut members = vec![Vec::with_capacity(2); nc];
        for v in 0..n {
            members[cmap[v]].push(v);
        }
        let mut xadj = Vec::with_capacity(nc + 1);
        let mut adj = Vec::new();
        let mut ew = Vec::new();
        let mut vw = vec![0; nc];
        let mut slot = vec![usize::MAX; nc];
        xadj.push(0);
        for (c, group) in members.iter().enumerate() {
            let start = adj.len();
            for &v in group {
                vw[c] += self.vw[v];
                for (u, w) in self.nbrs(v) {
                    let cu = cmap[u];
                    if cu == c {
                        continue;
                    }
                    if slot[cu] == usize::MAX || slot[cu] < start {
                        slot[cu] = adj.len();
                        adj.push(cu as u32);
                        ew.push(w);
                    } else {
                        ew[slot[cu]] += w;
                    }
                }
            }
            xadj.push(adj.len());
        }
        (WGraph { xadj, adj, ew, vw }, cmap)
    }
}

/// Side weights and the key used to compare partitions: (overweight, cut).
fn side_weights(g: &WGraph, part: &[u8]) -> [i64; 2] {
    let mut w = [0; 2];
    for v in 0..g.n() {
        w[part[v] as usize] += g.vw[v];
    }
    w
}

fn overweight(w: [i64; 2], maxw: i64) -> i64 {
    (w[0].max(w[1]) - maxw).max(0)
}

fn multilevel(g: &WGraph, maxw: i64, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let total = g.total_weight();
    let max_vw = (total / COARSEN_TO as i64).max(1) * 3 / 2 + 1;
    let mut levels: Vec<(WGraph, Vec<usize>)> = Vec::new();
    let mut cur = g.clone();
    while cur.n() > COARSEN_TO {
        let (coarse, cmap) = cur.coarsen(rng, max_vw);
        if coarse.n() as f64 > 0.95 * cur.n() as f64 {
            break;
        }
        levels.push((cur, cmap));
        cur = coarse;
    }
    let mut part = initial_bisection(&cur, maxw, rng);
    for (fine, cmap) in levels.into_iter().rev() {
        part = cmap.iter().map(|&c| part[c]).collect();
        fm_refine(&fine, &mut part, maxw);
    }
    part
}

/// Greedy graph growing from several start vertices, each followed by FM.
fn initial_bisection(g: &WGraph, maxw: i64, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let n = g.n();
    let total = g.total_weight();
    let mut starts: Vec<usize> = (0..n).collect();
    starts.shuffle(rng);
    starts.truncate(INIT_TRIALS.min(n));
    let mut best: Option<((i64, i64), Vec<u8>)> = None;
    for &s in &starts {
        let mut part = vec![1u8; n];
        part[s] = 0;
        let mut w0 = g.vw[s];
        let mut rest = n - 1;
        while 2 * w0 < total && rest > 1 {
            // frontier vertex of side 1 with the best gain; fall back to any vertex
            let mut pick: Option<(i64, usize)> = None;
            let mut any = None;
            for v in 0..n {
                if part[v] != 1 || w0 + g.vw[v] > maxw {
                    continue;
                }
                any.get_or_insert(v);
                if g.nbrs(v).any(|(u, _)| part[u] == 0) {
                    let gain = g.gain(&part, v);
                    if pick.is_none_or(|(bg, _)| gain > bg) {
                        pick = Some((gain, v));
                    }
                }
            }
            let Some(v) = pick.map(|(_, v)| v).or(any) else {
                break;
            };
            part[v] = 0;
            w0 += g.vw[v];
            rest -= 1;
        }
        fm_refine(g, &mut part, maxw);
        let key = (overweight(side_weights(g, &part), maxw), g.cut(&part));
        if best.as_ref().is_none_or(|(bk, _)| key < *bk) {
            best = Some((key, part));
        }
    }
    best.map(|(_, p)| p).unwrap()
}

fn n_side(part: &[u8], side: u8) -> usize {
    part.iter().filter(|&&p| p == side).count()
}

/// Whether moving `v` keeps (or brings) the partition within balance and
/// leaves both sides nonempty.
fn move_allowed(
    g: &WGraph,
    v: usize,
    from: usize,
    w: [i64; 2],
    counts: [usize; 2],
    maxw: i64,
) -> bool {
    if counts[from] <= 1 {
        return false;
    }
    let to = 1 - from;
    let new_to = w[to] + g.vw[v];
    if new_to <= maxw {
        return true;
    }
    // already overweight: accept moves that shrink the heavier side
    let before = overweight(w, maxw);
    before > 0 && {
        let mut nw = w;
        nw[from] -= g.vw[v];
        nw[to] = new_to;
        overweight(nw, maxw) < before
    }
}

/// Fiduccia–Mattheyses passes with rollback to the best prefix of moves.
fn fm_refine(g: &WGraph, part: &mut [u8], maxw: i64) {
    let n = g.n();
    for _ in 0..MAX_PASSES {
        let mut gains: Vec<i64> = (0..n).map(|v| g.gain(part, v)).collect();
        let mut buckets: [BTreeSet<(i64, u32)>; 2] = [BTreeSet::new(), BTreeSet::new()];
        for v in 0..n {
            buckets[part[v] as usize].insert((gains[v], v as u32));
        }
        let mut locked = vec![false; n];
        let mut w = side_weights(g, part);
        let mut counts = [n_side(part, 0), n_side(part, 1)];
        let mut cut = g.cut(part);
        let start_key = (overweight(w, maxw), cut);
        let mut best_key = start_key;
        let mut best_len = 0;
        let mut moves: Vec<usize> = Vec::new();
        let stall_limit = (n / 4).clamp(25, 200);

        loop {
            let mut choice: Option<(i64, usize)> = None;
            for (side, bucket) in buckets.iter().enumerate() {
                for &(gain, v) in bucket.iter().rev().take(SCAN_LIMIT) {
                    if move_allowed(g, v as usize, side, w, counts, maxw) {
                        let better = match choice {
                            None => true,
                            Some((bg, bv)) => {
                                gain > bg || (gain == bg && w[side] > w[part[bv] as usize])
                            }
                        };
                        if better {
                            choice = Some((gain, v as usize));
                        }
                        break;
                    }
                }
            }
            let Some((gain, v)) = choice else { break };
            let from = part[v] as usize;
            buckets[from].remove(&(gain, v as u32));
            locked[v] = true;
            part[v] = 1 - part[v];
            w[from] -= g.vw[v];
            w[1 - from] += g.vw[v];
            counts[from] -= 1;
            counts[1 - from] += 1;
            cut -= gain;
            gains[v] = -gain;
            for (u, ew) in g.nbrs(v) {
                if locked[u] {
                    continue;
                }
                let su = part[u] as usize;
                buckets[su].remove(&(gains[u], u as u32));
                // v joined u's side => edge now internal; v left u's side => edge now external
                gains[u] += if part[u] == part[v] { -2 * ew } else { 2 * ew };
                buckets[su].insert((gains[u], u as u32));
            }
            moves.push(v);
            let key = (overweight(w, maxw), cut);
            if key < best_key {
                best_key = key;
                best_len = moves.len();
            } else if moves.len() - best_len > stall_limit {
                break;
            }
        }
        for &v in moves[best_len..].iter().rev() {
            part[v] = 1 - part[v];
        }
        if best_key >= start_key {
            break;
        }
    }
}

/// Applies improving single moves until none remain, certifying local optimality.
fn polish(g: &WGraph, part: &mut [u8], maxw: i64) {
    loop {
        let w = side_weights(g, part);
        let counts = [n_side(part, 0), n_side(part, 1)];
        let over = overweight(w, maxw);
        let mut best: Option<(i64, usize)> = None;
        for v in 0..g.n() {
            let gain = g.gain(part, v);
            let from = part[v] as usize;
            if !move_allowed(g, v, from, w, counts, maxw) {
                continue;
            }
            let improves = if over > 0 { true } else { gain > 0 };
            if improves && best.is_none_or(|(bg, _)| gain > bg) {
                best = Some((gain, v));
            }
        }
        match best {
            Some((_, v)) => part[v] = 1 - part[v],
            None => return,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(n: usize, edges: &[(usize, usize)]) -> RetweetNetwork {
        let name = |i: usize| format!("n{i:02}");
        let mut net = RetweetNetwork::default();
        for i in 0..n {
            net.nodes.insert(name(i));
        }
        for &(a, b) in edges {
            net.add_edge(&name(a), &name(b));
        }
        net
    }

    #[test]
    fn single_node_not_bisectable() {
        let g = net(1, &[]);
        assert!(matches!(
            bisect_partition(&g, 0.1, 0),
            Err(Error::NotBisectable { nodes: 1 })
        ));
    }

    #[test]
    fn two_nodes_split() {
        let g = net(2, &[(0, 1)]);
        let p = bisect_partition(&g, 0.1, 0).unwrap();
        assert_eq!(p.group_sizes(), [1, 1]);
        assert_eq!(p.cut_size, 1);
    }

    #[test]
    fn k4_balanced_cut_is_four() {
        let g = net(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let p = bisect_partition(&g, 0.0, 7).unwrap();
        assert_eq!(p.group_sizes(), [2, 2]);
        assert_eq!(p.cut_size, 4);
        assert_eq!(p.count_cut(&g), 4);
    }

    #[test]
    fn cap_never_allows_empty_group() {
        assert_eq!(max_group_size(10, 0.5), 9);
        assert_eq!(max_group_size(10, 0.1), 6);
        assert_eq!(max_group_size(4, 0.0), 2);
        assert_eq!(max_group_size(5, 0.0), 3);
        assert_eq!(max_group_size(6, 0.2), 4);
    }

    #[test]
    fn bad_tolerance_rejected() {
        let g = net(4, &[(0, 1)]);
        assert!(bisect_partition(&g, 0.7, 0).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let edges: Vec<(usize, usize)> = (0..60).map(|i| (i, (i * 7 + 3) % 60)).collect();
        let g = net(60, &edges);
        let a = bisect_partition(&g, 0.1, 42).unwrap();
        let b = bisect_partition(&g, 0.1, 42).unwrap();
        assert_eq!(a, b);
    }
}
