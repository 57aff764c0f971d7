//! Hypergraphs `H(A)`, minimum degree, Berge girth and the main-theorem
//! hypothesis check.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zmod_linalg::IntMatrix;

/// A hypergraph with vertices `0..num_vertices`, edges `0..num_edges` and an
/// incidence relation (a set of `(vertex, edge)` pairs).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    num_vertices: usize,
    num_edges: usize,
    incidence: BTreeSet<(usize, usize)>,
    vertex_edges: Vec<Vec<usize>>,
    edge_vertices: Vec<Vec<usize>>,
}

impl Hypergraph {
    pub fn new(
        num_vertices: usize,
        num_edges: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let incidence: BTreeSet<(usize, usize)> = pairs.into_iter().collect();
        let mut vertex_edges = vec![Vec::new(); num_vertices];
        let mut edge_vertices = vec![Vec::new(); num_edges];
        for &(v, e) in &incidence {
            if v >= num_vertices || e >= num_edges {
                return Err(Error::InvalidHypergraph(format!(
                    "incidence ({v}, {e}) outside {num_vertices} vertices / {num_edges} edges"
                )));
            }
            vertex_edges[v].push(e);
            edge_vertices[e].push(v);
        }
        for list in edge_vertices.iter_mut() {
            list.sort_unstable();
        }
        Ok(Hypergraph {
            num_vertices,
            num_edges,
            incidence,
            vertex_edges,
            edge_vertices,
        })
    }

    /// `H(A)`: vertex `i` is incident to edge `j` iff `A[i][j] != 0`.
    pub fn from_matrix(a: &IntMatrix) -> Self {
        let pairs = (0..a.rows())
            .flat_map(|i| (0..a.cols()).map(move |j| (i, j)))
            .filter(|&(i, j)| !a.get(i, j).is_zero());
        Self::new(a.rows(), a.cols(), pairs).expect("indices come from the matrix shape")
    }

    /// A graph viewed as a 2-uniform hypergraph (loops become single incidences).
    pub fn from_graph_edges(num_vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let pairs = edges
            .iter()
            .enumerate()
            .flat_map(|(e, &(u, v))| [(u, e), (v, e)]);
        Self::new(num_vertices, edges.len(), pairs)
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn incidence(&self) -> &BTreeSet<(usize, usize)> {
        &self.incidence
    }

    pub fn is_incident(&self, v: usize, e: usize) -> bool {
        self.incidence.contains(&(v, e))
    }

    pub fn edges_of(&self, v: usize) -> &[usize] {
        &self.vertex_edges[v]
    }

    pub fn vertices_of(&self, e: usize) -> &[usize] {
        &self.edge_vertices[e]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.vertex_edges[v].len()
    }
}

pub fn min_degree(h: &Hypergraph) -> Result<usize> {
    (0..h.num_vertices)
        .map(|v| h.degree(v))
        .min()
        .ok_or(Error::EmptyVertexSet)
}

/// Hypergraph girth; `Infinite` when there is no Berge cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Girth {
    Finite(usize),
    Infinite,
}

impl Girth {
    pub fn at_least(&self, g: usize) -> bool {
        match self {
            Girth::Finite(k) => *k >= g,
            Girth::Infinite => true,
        }
    }
}

impl fmt::Display for Girth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Girth::Finite(k) => write!(f, "{k}"),
            Girth::Infinite => write!(f, "inf"),
        }
    }
}

/// `(v_1, e_1, ..., v_k, e_k, v_1)`: `edges[i]` joins `vertices[i]` and `vertices[(i+1) % k]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BergeCycle {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl BergeCycle {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Distinct vertices, distinct edges, `k >= 2`, and every incidence holds.
    pub fn is_valid_in(&self, h: &Hypergraph) -> bool {
        let k = self.vertices.len();
        if k < 2 || self.edges.len() != k {
            return false;
        }
        let vs: BTreeSet<_> = self.vertices.iter().collect();
        let es: BTreeSet<_> = self.edges.iter().collect();
        if vs.len() != k || es.len() != k {
            return false;
        }
        (0..k).all(|i| {
            let e = self.edges[i];
            e < h.num_edges
                && self.vertices[i] < h.num_vertices
                && h.is_incident(self.vertices[i], e)
                && h.is_incident(self.vertices[(i + 1) % k], e)
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GirthReport {
    pub girth: Girth,
    pub witness: Option<BergeCycle>,
}

impl GirthReport {
    fn acyclic() -> Self {
        GirthReport {
            girth: Girth::Infinite,
            witness: None,
        }
    }
}

/// Girth via breadth-first search in the vertex–edge incidence graph.
///
/// A Berge cycle of length `k` is a cycle of length `2k` in the (simple,
/// bipartite) incidence graph. Every BFS non-tree edge closes a simple cycle
/// through the lowest common ancestor of its ends; the shortest such cycle
/// over all roots is a girth cycle. Roots are scanned in vertex-id order and
/// only strictly shorter cycles replace the current witness.
pub fn berge_girth(h: &Hypergraph) -> GirthReport {
    let m = h.num_vertices;
    let total = m + h.num_edges;
    let neighbours = |node: usize| -> &[usize] {
        if node < m {
            h.edges_of(node)
        } else {
            h.vertices_of(node - m)
        }
    };
    let node_id = |node: usize| if node < m { node } else { node - m };

    let mut best: Option<Vec<usize>> = None;
    let mut dist = vec![usize::MAX; total];
    let mut parent = vec![usize::MAX; total];
    for root in 0..m {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        parent.iter_mut().for_each(|p| *p = usize::MAX);
        dist[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            if let Some(b) = &best {
                // Any cycle closed from here has at least 2*dist[u]+1 nodes.
                if 2 * dist[u] + 1 >= b.len() {
                    break;
                }
            }
            for &raw in neighbours(u) {
                let w = if u < m { raw + m } else { raw };
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    queue.push_back(w);
                } else if w != parent[u] && dist[w] >= dist[u] {
                    let cycle = close_cycle(u, w, &dist, &parent);
                    if best.as_ref().map_or(true, |b| cycle.len() < b.len()) {
                        best = Some(cycle);
                    }
                }
            }
        }
    }
    match best {
        None => GirthReport::acyclic(),
        Some(nodes) => {
            let (vertices, edges): (Vec<usize>, Vec<usize>) = if nodes[0] < m {
                (
                    nodes.iter().step_by(2).map(|&n| node_id(n)).collect(),
                    nodes.iter().skip(1).step_by(2).map(|&n| node_id(n)).collect(),
                )
            } else {
                let mut rotated = nodes[1..].to_vec();
                rotated.push(nodes[0]);
                (
                    rotated.iter().step_by(2).map(|&n| node_id(n)).collect(),
                    rotated.iter().skip(1).step_by(2).map(|&n| node_id(n)).collect(),
                )
            };
            let cycle = canonical_cycle(vertices, edges);
            GirthReport {
                girth: Girth::Finite(cycle.len()),
                witness: Some(cycle),
            }
        }
    }
}

/// Node sequence of the cycle formed by tree paths to `u`, `w` and the edge `u–w`.
fn close_cycle(u: usize, w: usize, dist: &[usize], parent: &[usize]) -> Vec<usize> {
    let (mut a, mut b) = (u, w);
    let mut left = vec![a];
    let mut right = vec![b];
    while dist[a] > dist[b] {
        a = parent[a];
        left.push(a);
    }
    while dist[b] > dist[a] {
        b = parent[b];
        right.push(b);
    }
    while a != b {
        a = parent[a];
        b = parent[b];
        left.push(a);
        right.push(b);
    }
    // left: u .. lca, right: w .. lca. Cycle: lca .. u, w .. (before lca).
    left.reverse();
    right.pop();
    left.extend(right);
    left
}

/// Rotates to start at the smallest vertex and orients towards the smaller adjacent edge.
fn canonical_cycle(vertices: Vec<usize>, edges: Vec<usize>) -> BergeCycle {
    let k = vertices.len();
    let start = (0..k).min_by_key(|&i| vertices[i]).unwrap_or(0);
    let forward_edge = edges[start];
    let backward_edge = edges[(start + k - 1) % k];
    if forward_edge <= backward_edge {
        BergeCycle {
            vertices: (0..k).map(|i| vertices[(start + i) % k]).collect(),
            edges: (0..k).map(|i| edges[(start + i) % k]).collect(),
        }
    } else {
        BergeCycle {
            vertices: (0..k).map(|i| vertices[(start + k - i) % k]).collect(),
            edges: (0..k).map(|i| edges[(start + 2 * k - i - 1) % k]).collect(),
        }
    }
}

/// Exhaustive girth search over the relaxed sequences:
/// distinct vertices `v_1..v_k`, consecutive (cyclically) sharing an edge,
/// and at least two different edges among the chosen `e_i`.
///
/// Intended for small hypergraphs; lengths above `cap` are not explored.
pub fn brute_girth(h: &Hypergraph, cap: usize) -> GirthReport {
    let m = h.num_vertices;
    let common: Vec<Vec<Vec<usize>>> = (0..m)
        .map(|u| {
            (0..m)
                .map(|v| {
                    h.edges_of(u)
                        .iter()
                        .copied()
                        .filter(|&e| h.is_incident(v, e))
                        .collect()
                })
                .collect()
        })
        .collect();

    for k in 2..=cap.min(m) {
        for first in 0..m {
            let mut path = vec![first];
            let mut used = vec![false; m];
            used[first] = true;
            if let Some((vs, es)) = extend_relaxed(&common, k, &mut path, &mut used) {
                let cycle = shorten_to_berge(vs, es);
                debug_assert_eq!(cycle.len(), k, "a minimal relaxed sequence is a Berge cycle");
                return GirthReport {
                    girth: Girth::Finite(cycle.len()),
                    witness: Some(cycle),
                };
            }
        }
    }
    GirthReport::acyclic()
}

fn extend_relaxed(
    common: &[Vec<Vec<usize>>],
    k: usize,
    path: &mut Vec<usize>,
    used: &mut Vec<bool>,
) -> Option<(Vec<usize>, Vec<usize>)> {
    let last = *path.last().unwrap();
    if path.len() == k {
        let first = path[0];
        if common[last][first].is_empty() {
            return None;
        }
        return choose_edges(common, path).map(|es| (path.clone(), es));
    }
    // The first vertex is the smallest one on the sequence.
    for next in path[0] + 1..common.len() {
        if used[next] || common[last][next].is_empty() {
            continue;
        }
        used[next] = true;
        path.push(next);
        if let Some(found) = extend_relaxed(common, k, path, used) {
            return Some(found);
        }
        path.pop();
        used[next] = false;
    }
    None
}

/// Picks `e_i` for each consecutive pair with at least two different edges, if possible.
fn choose_edges(common: &[Vec<Vec<usize>>], path: &[usize]) -> Option<Vec<usize>> {
    let k = path.len();
    let options: Vec<&Vec<usize>> = (0..k).map(|i| &common[path[i]][path[(i + 1) % k]]).collect();
    let mut chosen: Vec<usize> = options.iter().map(|o| o[0]).collect();
    if chosen.iter().any(|&e| e != chosen[0]) {
        return Some(chosen);
    }
    let i = options.iter().position(|o| o.len() > 1)?;
    chosen[i] = options[i][1];
    Some(chosen)
}

/// Turns a relaxed sequence into a Berge cycle of no greater length,
/// by repeatedly shortcutting a closed walk.
pub fn shorten_to_berge(mut vertices: Vec<usize>, mut edges: Vec<usize>) -> BergeCycle {
    // Drop v_{i+1} whenever e_i = e_{i+1} (non-cyclic consecutive repeats).
    let mut i = 0;
    while i + 1 < edges.len() {
        if edges[i] == edges[i + 1] {
            vertices.remove(i + 1);
            edges.remove(i + 1);
        } else {
            i += 1;
        }
    }
    let k = edges.len();
    let mut best: Option<(usize, usize)> = None;
    for i0 in 0..k {
        for j0 in i0 + 1..k {
            if edges[i0] == edges[j0] && best.map_or(true, |(a, b)| j0 - i0 < b - a) {
                best = Some((i0, j0));
            }
        }
    }
    match best {
        None => canonical_cycle(vertices, edges),
        Some((i0, j0)) => {
            let mut vs = vec![vertices[j0]];
            vs.extend_from_slice(&vertices[i0 + 1..j0]);
            canonical_cycle(vs, edges[i0..j0].to_vec())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TheoremHypothesis {
    #[serde(rename = "QUALIFIES_44")]
    Qualifies44,
    #[serde(rename = "QUALIFIES_36")]
    Qualifies36,
    QualifiesBoth,
    No,
}

impl TheoremHypothesis {
    pub fn qualifies(&self) -> bool {
        !matches!(self, TheoremHypothesis::No)
    }
}

impl fmt::Display for TheoremHypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TheoremHypothesis::Qualifies44 => "QUALIFIES_44",
            TheoremHypothesis::Qualifies36 => "QUALIFIES_36",
            TheoremHypothesis::QualifiesBoth => "QUALIFIES_BOTH",
            TheoremHypothesis::No => "NO",
        };
        f.write_str(s)
    }
}

/// Minimum degree `>= d` and girth `>= g` for `(d, g)` in `{(4,4), (3,6)}`.
/// `(6,3)` is not accepted. A hypergraph without vertices qualifies vacuously.
pub fn theorem_hypothesis(h: &Hypergraph) -> TheoremHypothesis {
    let Ok(d) = min_degree(h) else {
        return TheoremHypothesis::QualifiesBoth;
    };
    let g = berge_girth(h).girth;
    let q44 = d >= 4 && g.at_least(4);
    let q36 = d >= 3 && g.at_least(6);
    match (q44, q36) {
        (true, true) => TheoremHypothesis::QualifiesBoth,
        (true, false) => TheoremHypothesis::Qualifies44,
        (false, true) => TheoremHypothesis::Qualifies36,
        (false, false) => TheoremHypothesis::No,
    }
}
