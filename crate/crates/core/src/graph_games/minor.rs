//! Brute-force minor testing for small graphs.
//!
//! `M` is a minor of `G` iff `M` is a subgraph of some graph obtained from
//! `G` by contracting edges. All contraction states are enumerated (with a
//! visited set), and each state is searched for an injective edge-preserving
//! embedding of `M`.

use std::collections::HashSet;

use super::Graph;
use crate::error::{Error, Result};

pub const DEFAULT_MINOR_LIMIT: usize = 12;

pub fn has_minor(g: &Graph, m: &Graph) -> Result<bool> {
    has_minor_with_limit(g, m, DEFAULT_MINOR_LIMIT)
}

/// Parallel edges in either graph are merged; `limit` bounds `|V(G)|`.
pub fn has_minor_with_limit(g: &Graph, m: &Graph, limit: usize) -> Result<bool> {
    if g.num_vertices() > limit {
        return Err(Error::SizeGuard(g.num_vertices(), limit));
    }
    if g.num_vertices() > 32 || m.num_vertices() > 32 {
        return Err(Error::SizeGuard(g.num_vertices().max(m.num_vertices()), 32));
    }
    let target = adjacency(m);
    let start = adjacency(g);
    let need_v = target.len();
    let need_e = edge_count(&target);
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut stack = vec![start];
    while let Some(state) = stack.pop() {
        if state.len() < need_v || edge_count(&state) < need_e || !seen.insert(state.clone()) {
            continue;
        }
        if is_subgraph(&target, &state) {
            return Ok(true);
        }
        if state.len() == need_v {
            continue;
        }
        for u in 0..state.len() {
            let mut rest = state[u] >> (u + 1);
            while rest != 0 {
                let v = u + 1 + rest.trailing_zeros() as usize;
                rest &= rest - 1;
                stack.push(contract(&state, u, v));
            }
        }
    }
    Ok(false)
}

fn adjacency(g: &Graph) -> Vec<u32> {
    let mut adj = vec![0u32; g.num_vertices()];
    for e in g.edges() {
        let (u, v) = e.ends;
        adj[u] |= 1 << v;
        adj[v] |= 1 << u;
    }
    adj
}

fn edge_count(adj: &[u32]) -> usize {
    adj.iter().map(|a| a.count_ones() as usize).sum::<usize>() / 2
}

/// Merges `v` into `u` (`u < v`) and removes `v`, shifting higher indices down.
fn contract(adj: &[u32], u: usize, v: usize) -> Vec<u32> {
    let drop_bit = |mask: u32| -> u32 {
        let low = mask & ((1u32 << v) - 1);
        let high = if v + 1 < 32 { (mask >> (v + 1)) << v } else { 0 };
        low | high
    };
    let mut out = Vec::with_capacity(adj.len() - 1);
    for (x, &mask) in adj.iter().enumerate() {
        if x == v {
            continue;
        }
        let mut m = mask;
        if x == u {
            m |= adj[v];
            m &= !(1 << u) & !(1 << v);
        } else if m & (1 << v) != 0 {
            m = (m & !(1 << v)) | (1 << u);
        }
        out.push(drop_bit(m));
    }
    out
}

/// Injective map of pattern vertices sending edges to edges.
fn is_subgraph(pattern: &[u32], host: &[u32]) -> bool {
    let mut order: Vec<usize> = (0..pattern.len()).collect();
    order.sort_by_key(|&x| std::cmp::Reverse(pattern[x].count_ones()));
    let mut assign = vec![usize::MAX; pattern.len()];
    extend(pattern, host, &order, 0, &mut assign, 0)
}

fn extend(pattern: &[u32], host: &[u32], order: &[usize], i: usize, assign: &mut [usize], used: u32) -> bool {
    if i == order.len() {
        return true;
    }
    let x = order[i];
    let deg = pattern[x].count_ones();
    for h in 0..host.len() {
        if used & (1 << h) != 0 || host[h].count_ones() < deg {
            continue;
        }
        let ok = order[..i].iter().all(|&y| pattern[x] & (1 << y) == 0 || host[h] & (1 << assign[y]) != 0);
        if ok {
            assign[x] = h;
            if extend(pattern, host, order, i + 1, assign, used | (1 << h)) {
                return true;
            }
        }
    }
    assign[x] = usize::MAX;
    false
}
