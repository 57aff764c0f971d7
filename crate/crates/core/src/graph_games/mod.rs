//! Graphs, incidence systems `I(G)x = b`, colourings, covers and the
//! cover-to-picture construction.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigInt;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::picture::{EdgeSpec, LinearSystem, Picture, VertexSpec};
use crate::plane_map::{check_planar_embedding, CombinatorialMap};
use crate::zmod_linalg::{solve_mod, IntMatrix, IntVector, Modulus};

pub mod gallery;
pub mod minor;

pub use gallery::{gallery, FigureTemplate, GalleryInstance, LocalFailure};
pub use minor::{has_minor, has_minor_with_limit, DEFAULT_MINOR_LIMIT};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GraphEdge {
    pub ends: (usize, usize),
    pub src: Option<usize>,
}

impl GraphEdge {
    pub fn other(&self, v: usize) -> usize {
        if self.ends.0 == v {
            self.ends.1
        } else {
            self.ends.0
        }
    }

    pub fn source(&self) -> Option<usize> {
        self.src
    }

    pub fn target(&self) -> Option<usize> {
        self.src.map(|s| self.other(s))
    }
}

/// A loopless multigraph with optional orientation and optional rotation
/// system (edge ids counterclockwise per vertex).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    names: Vec<String>,
    edge_names: Vec<String>,
    edges: Vec<GraphEdge>,
    rotation: Option<Vec<Vec<usize>>>,
}

impl Graph {
    pub fn new(names: Vec<String>, edges: Vec<GraphEdge>) -> Result<Self> {
        let edge_names = (0..edges.len()).map(|e| e.to_string()).collect();
        Self::with_edge_names(names, edge_names, edges)
    }

    pub fn with_edge_names(names: Vec<String>, edge_names: Vec<String>, edges: Vec<GraphEdge>) -> Result<Self> {
        let n = names.len();
        if names.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(Error::InvalidGraph("duplicate vertex names".into()));
        }
        if edge_names.len() != edges.len() || edge_names.iter().collect::<BTreeSet<_>>().len() != edges.len() {
            return Err(Error::InvalidGraph("edge ids must be distinct".into()));
        }
        for (e, edge) in edges.iter().enumerate() {
            let (u, v) = edge.ends;
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!("edge {} has an unknown end", edge_names[e])));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("edge {} is a loop", edge_names[e])));
            }
            if let Some(s) = edge.src {
                if s != u && s != v {
                    return Err(Error::InvalidGraph(format!(
                        "source of edge {} is not one of its ends",
                        edge_names[e]
                    )));
                }
            }
        }
        Ok(Graph {
            names,
            edge_names,
            edges,
            rotation: None,
        })
    }

    /// Directed graph on `names` with edges `u -> v`.
    pub fn directed(names: &[&str], arcs: &[(usize, usize)]) -> Result<Self> {
        Self::new(
            names.iter().map(|s| s.to_string()).collect(),
            arcs.iter()
                .map(|&(u, v)| GraphEdge {
                    ends: (u, v),
                    src: Some(u),
                })
                .collect(),
        )
    }

    pub fn with_rotation(mut self, rotation: Vec<Vec<usize>>) -> Result<Self> {
        if rotation.len() != self.names.len() {
            return Err(Error::InvalidGraph("one rotation per vertex required".into()));
        }
        self.embedding_for(&rotation)?;
        self.rotation = Some(rotation);
        Ok(self)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn edge_names(&self) -> &[String] {
        &self.edge_names
    }

    pub fn num_vertices(&self) -> usize {
        self.names.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &GraphEdge {
        &self.edges[e]
    }

    pub fn rotation(&self) -> Option<&[Vec<usize>]> {
        self.rotation.as_deref()
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Orients every unoriented edge from its first end.
    pub fn with_default_orientation(&self) -> Graph {
        let mut g = self.clone();
        for e in g.edges.iter_mut() {
            e.src.get_or_insert(e.ends.0);
        }
        g
    }

    pub fn is_oriented(&self) -> bool {
        self.edges.iter().all(|e| e.src.is_some())
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.edges.iter().all(|e| {
            let (u, v) = e.ends;
            seen.insert((u.min(v), u.max(v)))
        })
    }

    pub fn incident_edges(&self, v: usize) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&e| self.edges[e].ends.0 == v || self.edges[e].ends.1 == v)
            .collect()
    }

    pub fn neighbours(&self, v: usize) -> BTreeSet<usize> {
        self.incident_edges(v).into_iter().map(|e| self.edges[e].other(v)).collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incident_edges(v).len()
    }

    /// Edge joining `u` and `v`, if any (the first one for multigraphs).
    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.edges
            .iter()
            .position(|e| e.ends == (u, v) || e.ends == (v, u))
    }

    /// Component index per vertex.
    pub fn components(&self) -> Vec<usize> {
        let n = self.num_vertices();
        let mut adj = vec![Vec::new(); n];
        for e in &self.edges {
            adj[e.ends.0].push(e.ends.1);
            adj[e.ends.1].push(e.ends.0);
        }
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &w in &adj[u] {
                    if comp[w] == usize::MAX {
                        comp[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }

    fn embedding_for(&self, rotation: &[Vec<usize>]) -> Result<CombinatorialMap> {
        let ends: Vec<(usize, usize)> = self.edges.iter().map(|e| e.ends).collect();
        CombinatorialMap::from_edge_rotation(self.names.clone(), &ends, rotation)
    }

    /// The combinatorial map of the stored rotation system.
    pub fn embedding(&self) -> Result<Option<CombinatorialMap>> {
        self.rotation.as_ref().map(|r| self.embedding_for(r)).transpose()
    }
}

/// `I(G)`: entry `(i, j)` is `+1` if `t(j) = i`, `-1` if `s(j) = i`.
pub fn incidence_matrix(g: &Graph) -> Result<IntMatrix> {
    let mut m = IntMatrix::zeros(g.num_vertices(), g.num_edges());
    for (j, e) in g.edges.iter().enumerate() {
        let s = e.src.ok_or_else(|| Error::MissingOrientation(g.edge_names[j].clone()))?;
        m.set(s, j, BigInt::from(-1));
        m.set(e.other(s), j, BigInt::from(1));
    }
    Ok(m)
}

/// Integer vertex weights `b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ZColouring(pub Vec<i64>);

impl ZColouring {
    pub fn zero(n: usize) -> Self {
        ZColouring(vec![0; n])
    }

    pub fn indicator(n: usize, v: usize) -> Self {
        let mut b = vec![0; n];
        b[v] = 1;
        ZColouring(b)
    }

    /// `|b|`, the sum of all weights.
    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn scaled(&self, t: i64) -> Self {
        ZColouring(self.0.iter().map(|x| x * t).collect())
    }

    pub fn to_vector(&self) -> IntVector {
        self.0.iter().map(|&x| BigInt::from(x)).collect()
    }

    pub fn check(&self, g: &Graph) -> Result<()> {
        if self.0.len() != g.num_vertices() {
            return Err(Error::DimensionMismatch(format!(
                "colouring has {} entries for {} vertices",
                self.0.len(),
                g.num_vertices()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solvability {
    pub solvable: bool,
    pub witness: Option<IntVector>,
}

/// Classical solvability of `I(G)x = b`: every component's weights sum to 0 mod `p`.
/// The combinatorial answer is cross-checked against the linear solver.
pub fn incidence_solvable(g: &Graph, b: &ZColouring, p: Modulus) -> Result<Solvability> {
    b.check(g)?;
    let comp = g.components();
    let mut sums: BTreeMap<usize, i64> = BTreeMap::new();
    for (v, &c) in comp.iter().enumerate() {
        *sums.entry(c).or_insert(0) += b.0[v];
    }
    let solvable = sums.values().all(|&s| p.is_zero_i64(s));
    let a = incidence_matrix(&g.with_default_orientation())?;
    let witness = solve_mod(&a, &b.to_vector(), p)?;
    if witness.is_some() != solvable {
        return Err(Error::Internal("component sums disagree with the linear solver".into()));
    }
    Ok(Solvability { solvable, witness })
}

/// `b(e)`: `+1` at `s(e)`, `-1` at `t(e)`; adding `λ b(e)` keeps `|b|`.
pub fn edge_shift_vector(g: &Graph, e: usize) -> Result<Vec<i64>> {
    let edge = g.edge(e);
    let s = edge.src.ok_or_else(|| Error::MissingOrientation(g.edge_names[e].clone()))?;
    let mut v = vec![0; g.num_vertices()];
    v[s] = 1;
    v[edge.other(s)] = -1;
    Ok(v)
}

/// Moves all weight onto `v0` by edge shifts along a BFS spanning tree,
/// leaves first. Unoriented edges use their default orientation.
pub fn normalize_colouring(g: &Graph, b: &ZColouring, v0: usize) -> Result<(ZColouring, Vec<(usize, i64)>)> {
    b.check(g)?;
    if v0 >= g.num_vertices() {
        return Err(Error::InvalidGraph(format!("no vertex {v0}")));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let g = g.with_default_orientation();
    let n = g.num_vertices();
    let mut parent_edge = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    seen[v0] = true;
    let mut order = vec![v0];
    let mut queue = VecDeque::from([v0]);
    while let Some(u) = queue.pop_front() {
        for e in g.incident_edges(u) {
            let w = g.edge(e).other(u);
            if !seen[w] {
                seen[w] = true;
                parent_edge[w] = e;
                order.push(w);
                queue.push_back(w);
            }
        }
    }
    let mut cur = b.0.clone();
    let mut shifts = Vec::new();
    for &u in order.iter().skip(1).rev() {
        if cur[u] == 0 {
            continue;
        }
        let e = parent_edge[u];
        let shift = edge_shift_vector(&g, e)?;
        let lambda = -cur[u] * shift[u];
        for (x, s) in cur.iter_mut().zip(&shift) {
            *x += lambda * s;
        }
        shifts.push((e, lambda));
    }
    Ok((ZColouring(cur), shifts))
}

/// A graph homomorphism `phi: H -> G`; `H` should carry a rotation system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverMap {
    pub h: Graph,
    pub g: Graph,
    pub phi: Vec<usize>,
}

impl CoverMap {
    pub fn new(h: Graph, g: Graph, phi: Vec<usize>) -> Result<Self> {
        if phi.len() != h.num_vertices() || phi.iter().any(|&x| x >= g.num_vertices()) {
            return Err(Error::InvalidCover("phi must map every vertex of H into G".into()));
        }
        Ok(CoverMap { h, g, phi })
    }

    /// `phi` given by vertex names.
    pub fn from_names(h: Graph, g: Graph, phi: &BTreeMap<String, String>) -> Result<Self> {
        let map = h
            .names()
            .iter()
            .map(|n| {
                let target = phi
                    .get(n)
                    .ok_or_else(|| Error::InvalidCover(format!("phi misses vertex {n}")))?;
                g.vertex_index(target)
                    .ok_or_else(|| Error::InvalidCover(format!("phi sends {n} to unknown vertex {target}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(h, g, map)
    }
}

/// Arity `k` if `phi` is surjective, locally bijective and has all fibres of size `k`.
pub fn verify_cover(c: &CoverMap) -> Result<Option<usize>> {
    if !c.h.is_simple() || !c.g.is_simple() {
        return Err(Error::NonSimpleGraph);
    }
    if !c.g.is_connected() {
        return Err(Error::Disconnected);
    }
    for v in 0..c.h.num_vertices() {
        let nh = c.h.neighbours(v);
        let ng = c.g.neighbours(c.phi[v]);
        let image: BTreeSet<usize> = nh.iter().map(|&w| c.phi[w]).collect();
        if image.len() != nh.len() || image != ng {
            return Ok(None);
        }
    }
    let mut fibre = vec![0usize; c.g.num_vertices()];
    for &x in &c.phi {
        fibre[x] += 1;
    }
    let k = fibre[0];
    if k == 0 || fibre.iter().any(|&f| f != k) {
        return Ok(None);
    }
    Ok(Some(k))
}

/// The picture of a planar cover: `h_V = phi`, `a = 1`, `k(v) = b(phi(v))`,
/// edges oriented like their images. Its phase is `k |b|`.
pub fn cover_to_picture(c: &CoverMap, b: &ZColouring, p: Modulus) -> Result<Picture> {
    b.check(&c.g)?;
    if verify_cover(c)?.is_none() {
        return Err(Error::InvalidCover("not a locally bijective surjection with uniform fibres".into()));
    }
    let rotation = c
        .h
        .rotation()
        .ok_or_else(|| Error::InvalidCover("H has no rotation system".into()))?;
    let emb = c.h.embedding()?.expect("rotation present");
    if !check_planar_embedding(&emb) {
        return Err(Error::NotPlanar);
    }
    let g = c.g.with_default_orientation();
    let system = LinearSystem::new(incidence_matrix(&g)?, b.to_vector(), p)?;
    let vertices = (0..c.h.num_vertices())
        .map(|v| VertexSpec {
            name: c.h.names()[v].clone(),
            row: c.phi[v],
            k: b.0[c.phi[v]],
        })
        .collect();
    let mut edges = Vec::new();
    for e in c.h.edges() {
        let (x, y) = e.ends;
        let ge = g.edge_between(c.phi[x], c.phi[y]).expect("cover maps edges to edges");
        let (source, target) = if g.edge(ge).src == Some(c.phi[x]) { (x, y) } else { (y, x) };
        edges.push(EdgeSpec {
            source,
            target,
            label: ge,
            a: 1,
        });
    }
    Picture::from_edges(system, vertices, edges, rotation)
}

/// `H` on `V(G) x {0, 1}` with `(u, i) - (v, 1 - i)` for every edge `uv`, and
/// `phi` the projection. Vertex `(v, i)` is index `v + i n`, named `v.i`.
pub fn bipartite_double_cover(g: &Graph) -> Result<CoverMap> {
    if !g.is_simple() {
        return Err(Error::NonSimpleGraph);
    }
    let n = g.num_vertices();
    let names = (0..2)
        .flat_map(|i| g.names().iter().map(move |v| format!("{v}.{i}")))
        .collect();
    let mut edges = Vec::new();
    for e in g.edges() {
        let (u, v) = e.ends;
        for i in 0..2 {
            let (a, b) = (u + i * n, v + (1 - i) * n);
            let src = e.src.map(|s| if s == u { a } else { b });
            edges.push(GraphEdge { ends: (a, b), src });
        }
    }
    let h = Graph::new(names, edges)?;
    let phi = (0..2 * n).map(|x| x % n).collect();
    CoverMap::new(h, g.clone(), phi)
}

/// Name that deserializes from either a JSON string or an integer.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Name(pub String);

impl<'de> Deserialize<'de> for Name {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            S(String),
            I(i64),
        }
        Ok(match Repr::deserialize(d)? {
            Repr::S(s) => Name(s),
            Repr::I(i) => Name(i.to_string()),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<Name>,
    pub ends: [Name; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub src: Option<Name>,
}

/// `{"vertices": [..], "edges": [{"id", "ends": [u, v], "src": u}], "rotation"?: {"v": [edge ids]}}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<Name>,
    pub edges: Vec<EdgeJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<BTreeMap<Name, Vec<Name>>>,
}

impl Graph {
    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            vertices: self.names.iter().cloned().map(Name).collect(),
            edges: self
                .edges
                .iter()
                .enumerate()
                .map(|(e, edge)| EdgeJson {
                    id: Some(Name(self.edge_names[e].clone())),
                    ends: [Name(self.names[edge.ends.0].clone()), Name(self.names[edge.ends.1].clone())],
                    src: edge.src.map(|s| Name(self.names[s].clone())),
                })
                .collect(),
            rotation: self.rotation.as_ref().map(|rot| {
                rot.iter()
                    .enumerate()
                    .map(|(v, r)| {
                        (
                            Name(self.names[v].clone()),
                            r.iter().map(|&e| Name(self.edge_names[e].clone())).collect(),
                        )
                    })
                    .collect()
            }),
        }
    }

    pub fn from_json(j: &GraphJson) -> Result<Self> {
        let names: Vec<String> = j.vertices.iter().map(|n| n.0.clone()).collect();
        let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let lookup = |n: &Name| {
            index
                .get(n.0.as_str())
                .copied()
                .ok_or_else(|| Error::InvalidGraph(format!("unknown vertex {}", n.0)))
        };
        let mut edges = Vec::new();
        let mut edge_names = Vec::new();
        for (e, ej) in j.edges.iter().enumerate() {
            let ends = (lookup(&ej.ends[0])?, lookup(&ej.ends[1])?);
            let src = ej.src.as_ref().map(lookup).transpose()?;
            edges.push(GraphEdge { ends, src });
            edge_names.push(ej.id.as_ref().map_or_else(|| e.to_string(), |n| n.0.clone()));
        }
        let g = Graph::with_edge_names(names.clone(), edge_names, edges)?;
        match &j.rotation {
            None => Ok(g),
            Some(rot) => {
                let eindex: BTreeMap<&str, usize> =
                    g.edge_names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
                let mut rotation = vec![Vec::new(); g.num_vertices()];
                for (v, list) in rot {
                    let vi = lookup(v)?;
                    rotation[vi] = list
                        .iter()
                        .map(|e| {
                            eindex
                                .get(e.0.as_str())
                                .copied()
                                .ok_or_else(|| Error::InvalidGraph(format!("unknown edge {}", e.0)))
                        })
                        .collect::<Result<_>>()?;
                }
                g.with_rotation(rotation)
            }
        }
    }
}

/// `{"b": {"v": int}}`; missing vertices default to 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColouringJson {
    pub b: BTreeMap<Name, i64>,
}

impl ZColouring {
    pub fn to_json(&self, g: &Graph) -> ColouringJson {
        ColouringJson {
            b: g.names().iter().cloned().map(Name).zip(self.0.iter().copied()).collect(),
        }
    }

    pub fn from_json(j: &ColouringJson, g: &Graph) -> Result<Self> {
        let mut b = vec![0; g.num_vertices()];
        for (n, &x) in &j.b {
            let v = g
                .vertex_index(&n.0)
                .ok_or_else(|| Error::InvalidGraph(format!("colouring names unknown vertex {}", n.0)))?;
            b[v] = x;
        }
        Ok(ZColouring(b))
    }
}

/// `{"h": graph with rotation, "g": graph, "phi": {"h vertex": "g vertex"}}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverJson {
    pub h: GraphJson,
    pub g: GraphJson,
    pub phi: BTreeMap<Name, Name>,
}

impl CoverMap {
    pub fn to_json(&self) -> CoverJson {
        CoverJson {
            h: self.h.to_json(),
            g: self.g.to_json(),
            phi: (0..self.h.num_vertices())
                .map(|v| (Name(self.h.names()[v].clone()), Name(self.g.names()[self.phi[v]].clone())))
                .collect(),
        }
    }

    pub fn from_json(j: &CoverJson) -> Result<Self> {
        let phi = j.phi.iter().map(|(k, v)| (k.0.clone(), v.0.clone())).collect();
        Self::from_names(Graph::from_json(&j.h)?, Graph::from_json(&j.g)?, &phi)
    }
}
