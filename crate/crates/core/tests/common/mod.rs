//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use solgroup::graph_games::GraphEdge;
use solgroup::picture::{flip_orientation, verify, VertexSpec};
use solgroup::plane_map::CombinatorialMap;
use solgroup::{gallery, incidence_matrix, CoverMap, Graph, Hypergraph, IntMatrix, LinearSystem, Modulus, Picture};

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Seeded from `SOLGROUP_SEED` when set; `salt` separates independent streams.
pub fn rng(salt: u64) -> ChaCha8Rng {
    let seed = std::env::var("SOLGROUP_SEED")
        .ok()
        .and_then(|s| s.parse::<u64>().ok())
        .unwrap_or(DEFAULT_SEED);
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

pub fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn matrix_rows(a: &IntMatrix) -> Vec<Vec<i64>> {
    a.to_i64_rows().expect("small entries")
}

pub fn random_hypergraph(rng: &mut impl Rng, max_v: usize, max_e: usize) -> Hypergraph {
    let m = rng.gen_range(1..=max_v);
    let n = rng.gen_range(1..=max_e);
    let density = rng.gen_range(0.15..0.6);
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|v| (0..n).map(move |e| (v, e)))
        .filter(|_| rng.gen_bool(density))
        .collect();
    Hypergraph::new(m, n, pairs).unwrap()
}

// ---------------------------------------------------------------------------
// Planar maps

/// Rotation system under construction; edge `e` owns darts `2e` and `2e + 1`.
#[derive(Clone, Debug)]
pub struct MapBuilder {
    pub rotation: Vec<Vec<usize>>,
    pub origin: Vec<usize>,
}

impl MapBuilder {
    /// One edge between two vertices.
    pub fn edge() -> Self {
        MapBuilder { rotation: vec![vec![0], vec![1]], origin: vec![0, 1] }
    }

    fn succ(&self, d: usize) -> usize {
        let r = &self.rotation[self.origin[d]];
        let i = r.iter().position(|&x| x == d).unwrap();
        r[(i + 1) % r.len()]
    }

    pub fn face_next(&self, d: usize) -> usize {
        self.succ(d ^ 1)
    }

    fn insert_after(&mut self, anchor: usize, new: usize) {
        let v = self.origin[anchor];
        let r = &mut self.rotation[v];
        let i = r.iter().position(|&x| x == anchor).unwrap();
        r.insert(i + 1, new);
        self.origin.resize(self.origin.len().max(new + 1), 0);
        self.origin[new] = v;
    }

    pub fn faces(&self) -> Vec<Vec<usize>> {
        let n = self.origin.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for d in 0..n {
            if seen[d] {
                continue;
            }
            let mut f = Vec::new();
            let mut x = d;
            while !seen[x] {
                seen[x] = true;
                f.push(x);
                x = self.face_next(x);
            }
            out.push(f);
        }
        out
    }

    /// New vertex joined to the corner after dart `anchor`.
    pub fn add_pendant(&mut self, anchor: usize) {
        let e = self.origin.len() / 2;
        self.insert_after(anchor, 2 * e);
        let w = self.rotation.len();
        self.rotation.push(vec![2 * e + 1]);
        self.origin.push(w);
    }

    /// Chord across a face between the corners entered by `d1` and `d2`
    /// (darts of that face). Returns false if it would be a loop.
    pub fn add_chord(&mut self, d1: usize, d2: usize) -> bool {
        let (c1, c2) = (d1 ^ 1, d2 ^ 1);
        let (u, v) = (self.origin[self.succ(c1)], self.origin[self.succ(c2)]);
        if u == v {
            return false;
        }
        let e = self.origin.len() / 2;
        self.origin.resize(2 * e + 2, 0);
        self.insert_after(c1, 2 * e);
        self.insert_after(c2, 2 * e + 1);
        true
    }

    pub fn build(&self) -> CombinatorialMap {
        let names = (0..self.rotation.len()).map(|v| v.to_string()).collect();
        let pairing = (0..self.origin.len()).map(|d| d ^ 1).collect();
        CombinatorialMap::new(names, self.rotation.clone(), pairing).unwrap()
    }
}

/// Connected loopless plane map grown by pendant edges and face chords.
pub fn random_planar_map(rng: &mut impl Rng, edges: usize) -> CombinatorialMap {
    let mut b = MapBuilder::edge();
    let chord_bias = rng.gen_range(0.3..0.9);
    while b.origin.len() / 2 < edges {
        let darts = b.origin.len();
        if rng.gen_bool(chord_bias) {
            let faces = b.faces();
            let f = faces.choose(rng).unwrap();
            let d1 = *f.choose(rng).unwrap();
            let d2 = *f.choose(rng).unwrap();
            if d1 != d2 && b.add_chord(d1, d2) {
                continue;
            }
        }
        b.add_pendant(rng.gen_range(0..darts));
    }
    b.build()
}

/// Every edge replaced by two parallel edges bounding a 2-gon; degrees double.
pub fn double_edges(m: &CombinatorialMap) -> CombinatorialMap {
    let e = m.num_edges();
    let twin = |d: usize| 2 * (d / 2 + e) + d % 2;
    let rotation = m
        .rotations()
        .iter()
        .map(|r| {
            r.iter()
                .flat_map(|&d| if d % 2 == 0 { [d, twin(d)] } else { [twin(d), d] })
                .collect()
        })
        .collect();
    let pairing = (0..4 * e).map(|d| d ^ 1).collect();
    CombinatorialMap::new(m.names().to_vec(), rotation, pairing).unwrap()
}

/// Straight-line graph on random grid points: a greedy maximal set of
/// non-crossing segments, thinned while staying connected, with rotations
/// sorted by angle.
pub fn random_plane_graph(rng: &mut impl Rng, n: usize) -> Graph {
    let mut pts: Vec<(i64, i64)> = Vec::new();
    while pts.len() < n {
        let q = (rng.gen_range(0..40), rng.gen_range(0..40));
        let collinear = pts
            .iter()
            .enumerate()
            .any(|(i, &a)| pts[i + 1..].iter().any(|&b| cross(a, b, q) == 0));
        if !pts.contains(&q) && !collinear {
            pts.push(q);
        }
    }
    let mut cand: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    cand.shuffle(rng);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (i, j) in cand {
        if edges.iter().all(|&(a, b)| !segments_cross(pts[i], pts[j], pts[a], pts[b])) {
            edges.push((i, j));
        }
    }
    let drop = rng.gen_range(0.0..0.5);
    let mut k = 0;
    while k < edges.len() {
        if rng.gen_bool(drop) {
            let e = edges.remove(k);
            if !connected(n, &edges) {
                edges.insert(k, e);
                k += 1;
            }
        } else {
            k += 1;
        }
    }
    let rotation = (0..n)
        .map(|v| {
            let mut inc: Vec<usize> = (0..edges.len()).filter(|&e| edges[e].0 == v || edges[e].1 == v).collect();
            inc.sort_by(|&e, &f| {
                let angle = |e: usize| {
                    let w = if edges[e].0 == v { edges[e].1 } else { edges[e].0 };
                    ((pts[w].1 - pts[v].1) as f64).atan2((pts[w].0 - pts[v].0) as f64)
                };
                angle(e).partial_cmp(&angle(f)).unwrap()
            });
            inc
        })
        .collect();
    let names = (0..n).map(|v| format!("v{v}")).collect();
    let ges = edges.iter().map(|&ends| GraphEdge { ends, src: None }).collect();
    Graph::new(names, ges).unwrap().with_rotation(rotation).unwrap()
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Proper crossing; segments sharing an endpoint do not cross (no three
/// points are collinear).
fn segments_cross(p1: (i64, i64), p2: (i64, i64), q1: (i64, i64), q2: (i64, i64)) -> bool {
    if p1 == q1 || p1 == q2 || p2 == q1 || p2 == q2 {
        return false;
    }
    let d1 = cross(q1, q2, p1).signum();
    let d2 = cross(q1, q2, p2).signum();
    let d3 = cross(p1, p2, q1).signum();
    let d4 = cross(p1, p2, q2).signum();
    d1 * d2 < 0 && d3 * d4 < 0
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == v && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// `copies` disjoint copies of a plane graph, projected onto it.
pub fn trivial_cover(g: &Graph, copies: usize) -> CoverMap {
    let n = g.num_vertices();
    let m = g.num_edges();
    let names = (0..copies).flat_map(|c| g.names().iter().map(move |v| format!("{v}.{c}"))).collect();
    let edges = (0..copies)
        .flat_map(|c| {
            g.edges().iter().map(move |e| GraphEdge {
                ends: (e.ends.0 + c * n, e.ends.1 + c * n),
                src: None,
            })
        })
        .collect();
    let rot = g.rotation().unwrap();
    let rotation = (0..copies)
        .flat_map(|c| rot.iter().map(move |r| r.iter().map(|&e| e + c * m).collect()))
        .collect();
    let h = Graph::new(names, edges).unwrap().with_rotation(rotation).unwrap();
    let phi = (0..copies).flat_map(|_| 0..n).collect();
    CoverMap::new(h, g.clone(), phi).unwrap()
}

// ---------------------------------------------------------------------------
// Pictures from local relations

#[derive(Clone, Copy, Debug)]
struct Edge {
    source: usize,
    target: usize,
    label: usize,
    a: i64,
}

/// Disjoint cancellation pairs for random rows, then random endpoint swaps
/// between parallel-labelled edges (kept only when the result is a valid
/// plane picture), then random orientation flips. Phase is always 0.
pub fn cancellation_picture(rng: &mut impl Rng, sys: &LinearSystem, pairs: usize, swaps: usize) -> Picture {
    let a = matrix_rows(sys.a());
    let b: Vec<i64> = sys.b().iter().map(|x| i64::try_from(x).unwrap()).collect();
    let rows: Vec<usize> = (0..sys.rows()).filter(|&i| !sys.support(i).is_empty()).collect();
    let mut vertices = Vec::new();
    let mut edges: Vec<Edge> = Vec::new();
    // (edge, end) with end 0 at the source.
    let mut rotation: Vec<Vec<(usize, usize)>> = Vec::new();
    for _ in 0..pairs {
        let i = *rows.choose(rng).unwrap();
        let (v, w) = (vertices.len(), vertices.len() + 1);
        vertices.push(VertexSpec { name: format!("v{v}"), row: i, k: -b[i] });
        vertices.push(VertexSpec { name: format!("v{w}"), row: i, k: b[i] });
        let first = edges.len();
        for j in sys.support(i) {
            edges.push(Edge { source: v, target: w, label: j, a: a[i][j] });
        }
        let ids: Vec<usize> = (first..edges.len()).collect();
        rotation.push(ids.iter().map(|&e| (e, 0)).collect());
        rotation.push(ids.iter().rev().map(|&e| (e, 1)).collect());
    }
    let build = |edges: &[Edge], rotation: &[Vec<(usize, usize)>]| {
        let rot = rotation.iter().map(|r| r.iter().map(|&(e, end)| 2 * e + end).collect()).collect();
        Picture::new(
            sys.clone(),
            vertices.clone(),
            edges.iter().map(|e| e.label).collect(),
            edges.iter().map(|e| e.a).collect(),
            rot,
        )
        .unwrap()
    };
    let mut pic = build(&edges, &rotation);
    for _ in 0..swaps {
        let e1 = rng.gen_range(0..edges.len());
        let partners: Vec<usize> = (0..edges.len())
            .filter(|&f| f != e1 && edges[f].label == edges[e1].label && edges[f].a == edges[e1].a)
            .collect();
        let Some(&e2) = partners.choose(rng) else { continue };
        if edges[e1].source == edges[e2].target || edges[e2].source == edges[e1].target {
            continue;
        }
        let mut ne = edges.clone();
        ne[e1].target = edges[e2].target;
        ne[e2].target = edges[e1].target;
        let mut nr = rotation.clone();
        for (e, v) in [(e1, edges[e1].target), (e2, edges[e2].target)] {
            let slot = nr[v].iter_mut().find(|x| **x == (e, 1)).unwrap();
            slot.0 = if e == e1 { e2 } else { e1 };
        }
        let cand = build(&ne, &nr);
        if verify(&cand).is_empty() {
            edges = ne;
            rotation = nr;
            pic = cand;
        }
    }
    let flips: Vec<usize> = (0..pic.num_edges()).filter(|_| rng.gen_bool(0.3)).collect();
    flip_orientation(&pic, &flips).unwrap()
}

/// Oriented incidence matrices of the two built-in qualifying graphs.
pub fn qualifying_incidence() -> Vec<(String, Vec<Vec<i64>>)> {
    ["HEAWOOD", "K44"]
        .iter()
        .map(|n| {
            let g = gallery(n).unwrap().graph;
            (n.to_string(), matrix_rows(&incidence_matrix(&g).unwrap()))
        })
        .collect()
}

/// Same support, random signs: the hypergraph (and hence the hypothesis) is unchanged.
pub fn resign(rng: &mut impl Rng, a: &[Vec<i64>]) -> Vec<Vec<i64>> {
    a.iter()
        .map(|r| r.iter().map(|&x| if x != 0 && rng.gen_bool(0.5) { -x } else { x }).collect())
        .collect()
}

// ---------------------------------------------------------------------------
// Oracles

/// Exhaustive search over `Z_p^n`.
pub fn brute_solve(a: &[Vec<i64>], b: &[i64], p: u64) -> Option<Vec<i64>> {
    let n = a.first().map_or(0, |r| r.len());
    let p = p as i64;
    let total = (p as u64).pow(n as u32);
    (0..total).map(|code| {
        let mut c = code as i64;
        (0..n)
            .map(|_| {
                let d = c % p;
                c /= p;
                d
            })
            .collect::<Vec<i64>>()
    })
    .find(|x| {
        a.iter()
            .zip(b)
            .all(|(row, &bi)| (row.iter().zip(x).map(|(r, x)| r * x).sum::<i64>() - bi).rem_euclid(p) == 0)
    })
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Order of `J` in the abelianization of `Γ_p(A, b)`, or `None` for infinite.
///
/// The group is `Z^{n+1}` (last coordinate `J`) modulo the rows `[A_i | -b_i]`
/// and, for finite `p`, `p e_j` for every coordinate. A diagonalization
/// `U R V = D` of the relation matrix `R` (relations as columns) maps `e_J`
/// to `w = U e_J` in `⊕ Z/d_i`.
pub fn abelian_j_order(a: &[Vec<i64>], b: &[i64], p: Option<u64>) -> Option<u64> {
    let n = a.first().map_or(0, |r| r.len());
    let dim = n + 1;
    let mut rels: Vec<Vec<i128>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| row.iter().map(|&x| x as i128).chain([-(bi as i128)]).collect())
        .collect();
    if let Some(p) = p {
        for j in 0..dim {
            let mut e = vec![0; dim];
            e[j] = p as i128;
            rels.push(e);
        }
    }
    let cols = rels.len();
    // R is dim x cols.
    let mut r: Vec<Vec<i128>> = (0..dim).map(|i| rels.iter().map(|c| c[i]).collect()).collect();
    let r0 = r.clone();
    let mut u: Vec<Vec<i128>> = (0..dim).map(|i| (0..dim).map(|j| (i == j) as i128).collect()).collect();
    let mut v: Vec<Vec<i128>> = (0..cols).map(|i| (0..cols).map(|j| (i == j) as i128).collect()).collect();
    let mut t = 0;
    while t < dim.min(cols) {
        let pivot = (t..dim)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| r[i][j] != 0)
            .min_by_key(|&(i, j)| r[i][j].abs());
        let Some((pi, pj)) = pivot else { break };
        r.swap(t, pi);
        u.swap(t, pi);
        for row in r.iter_mut() {
            row.swap(t, pj);
        }
        for row in v.iter_mut() {
            row.swap(t, pj);
        }
        let mut clean = true;
        for i in t + 1..dim {
            let q = r[i][t] / r[t][t];
            if q != 0 {
                for j in 0..cols {
                    r[i][j] -= q * r[t][j];
                }
                for j in 0..dim {
                    u[i][j] -= q * u[t][j];
                }
            }
            clean &= r[i][t] == 0;
        }
        for j in t + 1..cols {
            let q = r[t][j] / r[t][t];
            if q != 0 {
                for row in r.iter_mut() {
                    row[j] -= q * row[t];
                }
                for row in v.iter_mut() {
                    row[j] -= q * row[t];
                }
            }
            clean &= r[t][j] == 0;
        }
        if clean {
            t += 1;
        }
    }
    // U R0 V = D
    for i in 0..dim {
        for j in 0..cols {
            let s: i128 = (0..dim)
                .map(|k| u[i][k] * (0..cols).map(|l| r0[k][l] * v[l][j]).sum::<i128>())
                .sum();
            assert_eq!(s, if i == j { r[i][i] } else { 0 }, "diagonalization self-check");
        }
    }
    let mut order: i128 = 1;
    for i in 0..dim {
        let w = u[i][n];
        let d = if i < cols { r[i][i].abs() } else { 0 };
        if d == 0 {
            if w != 0 {
                return None;
            }
            continue;
        }
        let o = d / gcd(d, w);
        order = order / gcd(order, o) * o;
    }
    Some(order as u64)
}

/// `Modulus` to the oracle's encoding.
pub fn modulus_value(p: Modulus) -> Option<u64> {
    p.value()
}
