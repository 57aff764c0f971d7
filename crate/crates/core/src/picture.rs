//! Closed pictures for solution groups: verification, phase, certificates,
//! orientation flips, reduction moves and the reduce-to-empty engine.
//!
//! Edge `e` of a picture owns darts `2e` (source end) and `2e + 1` (target
//! end), so orientation is carried by the dart numbering.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::plane_map::{check_planar_embedding, ordered_names, trace_faces, CombinatorialMap, MapJson};
use crate::zmod_linalg::{cyclic_membership, IntMatrix, IntVector, Modulus};

/// `Ax = b` over `Z_p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSystem {
    a: IntMatrix,
    b: IntVector,
    p: Modulus,
}

impl LinearSystem {
    pub fn new(a: IntMatrix, b: IntVector, p: Modulus) -> Result<Self> {
        if a.rows() != b.len() {
            return Err(Error::DimensionMismatch(format!(
                "A has {} rows but b has length {}",
                a.rows(),
                b.len()
            )));
        }
        Ok(LinearSystem { a, b, p })
    }

    pub fn from_i64(a: &[Vec<i64>], b: &[i64], p: Modulus) -> Result<Self> {
        Self::new(IntMatrix::from_rows(a)?, b.iter().map(|&x| BigInt::from(x)).collect(), p)
    }

    pub fn a(&self) -> &IntMatrix {
        &self.a
    }

    pub fn b(&self) -> &IntVector {
        &self.b
    }

    pub fn p(&self) -> Modulus {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    /// `R_i`: the columns where row `i` is nonzero.
    pub fn support(&self, i: usize) -> Vec<usize> {
        self.a.row_support(i)
    }

    pub fn with_b(&self, b: IntVector) -> Result<Self> {
        Self::new(self.a.clone(), b, self.p)
    }

    pub fn with_p(&self, p: Modulus) -> Self {
        LinearSystem { p, ..self.clone() }
    }

    pub fn to_json(&self) -> Result<SystemJson> {
        let a = self
            .a
            .to_i64_rows()
            .ok_or_else(|| Error::Format("matrix entries do not fit in i64".into()))?;
        let b = self
            .b
            .iter()
            .map(|x| i64::try_from(x).map_err(|_| Error::Format("b does not fit in i64".into())))
            .collect::<Result<_>>()?;
        Ok(SystemJson { a, b, p: self.p })
    }

    pub fn from_json(j: &SystemJson) -> Result<Self> {
        Self::from_i64(&j.a, &j.b, j.p)
    }
}

/// Wire format `{"A": [[..]], "b": [..], "p": 5 | "inf"}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemJson {
    #[serde(rename = "A")]
    pub a: Vec<Vec<i64>>,
    pub b: Vec<i64>,
    pub p: Modulus,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Picture {
    system: LinearSystem,
    map: CombinatorialMap,
    rows: Vec<usize>,
    k: Vec<i64>,
    labels: Vec<usize>,
    a: Vec<i64>,
}

/// Per-vertex data for building a picture.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexSpec {
    pub name: String,
    pub row: usize,
    pub k: i64,
}

/// Per-edge data for building a picture.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSpec {
    pub source: usize,
    pub target: usize,
    pub label: usize,
    pub a: i64,
}

impl Picture {
    /// Rotations list darts (`2e` at the source of `e`, `2e + 1` at its target).
    pub fn new(
        system: LinearSystem,
        vertices: Vec<VertexSpec>,
        labels: Vec<usize>,
        a: Vec<i64>,
        rotation: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if labels.len() != a.len() {
            return Err(Error::InvalidPicture("edge label lists differ in length".into()));
        }
        if rotation.len() != vertices.len() {
            return Err(Error::InvalidPicture("one rotation per vertex required".into()));
        }
        let p = system.p();
        if let Some(v) = vertices.iter().find(|v| v.row >= system.rows()) {
            return Err(Error::InvalidPicture(format!("vertex {} has row {} out of range", v.name, v.row)));
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= system.cols()) {
            return Err(Error::InvalidPicture(format!("edge label {l} out of range")));
        }
        let names = vertices.iter().map(|v| v.name.clone()).collect();
        let pairing = (0..2 * labels.len()).map(|d| d ^ 1).collect();
        let map = CombinatorialMap::new(names, rotation, pairing)?;
        Ok(Picture {
            rows: vertices.iter().map(|v| v.row).collect(),
            k: vertices.iter().map(|v| p.reduce_i64(v.k)).collect(),
            labels,
            a: a.into_iter().map(|x| p.reduce_i64(x)).collect(),
            map,
            system,
        })
    }

    /// Rotations list edge ids counterclockwise. A loop appears twice; its
    /// first occurrence is the source end.
    pub fn from_edges(
        system: LinearSystem,
        vertices: Vec<VertexSpec>,
        edges: Vec<EdgeSpec>,
        edge_rotation: &[Vec<usize>],
    ) -> Result<Self> {
        let names: Vec<String> = vertices.iter().map(|v| v.name.clone()).collect();
        let ends: Vec<(usize, usize)> = edges.iter().map(|e| (e.source, e.target)).collect();
        let map = CombinatorialMap::from_edge_rotation(names, &ends, edge_rotation)?;
        for (e, &(s, t)) in ends.iter().enumerate() {
            if map.origin(2 * e) != s || map.origin(2 * e + 1) != t {
                return Err(Error::InvalidPicture(format!("edge {e} is missing from a rotation")));
            }
        }
        Self::new(
            system,
            vertices,
            edges.iter().map(|e| e.label).collect(),
            edges.iter().map(|e| e.a).collect(),
            map.rotations().to_vec(),
        )
    }

    pub fn empty(system: LinearSystem) -> Self {
        Self::new(system, vec![], vec![], vec![], vec![]).expect("empty picture is well formed")
    }

    pub fn system(&self) -> &LinearSystem {
        &self.system
    }

    pub fn map(&self) -> &CombinatorialMap {
        &self.map
    }

    pub fn num_vertices(&self) -> usize {
        self.map.num_vertices()
    }

    pub fn num_edges(&self) -> usize {
        self.labels.len()
    }

    /// `|V| + |E|`, the quantity every reduction move decreases.
    pub fn size(&self) -> usize {
        self.num_vertices() + self.num_edges()
    }

    pub fn is_empty(&self) -> bool {
        self.num_vertices() == 0 && self.num_edges() == 0
    }

    pub fn row(&self, v: usize) -> usize {
        self.rows[v]
    }

    pub fn k(&self, v: usize) -> i64 {
        self.k[v]
    }

    pub fn name(&self, v: usize) -> &str {
        self.map.name(v)
    }

    pub fn label(&self, e: usize) -> usize {
        self.labels[e]
    }

    pub fn a(&self, e: usize) -> i64 {
        self.a[e]
    }

    pub fn source(&self, e: usize) -> usize {
        self.map.origin(2 * e)
    }

    pub fn target(&self, e: usize) -> usize {
        self.map.origin(2 * e + 1)
    }

    pub fn is_loop(&self, e: usize) -> bool {
        self.source(e) == self.target(e)
    }

    /// Edge ids around `v`, counterclockwise (a loop appears twice).
    pub fn edges_at(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.map.rotation(v).iter().map(|d| d / 2)
    }

    /// Contribution of the dart's edge to the equation at its origin.
    fn signed_a(&self, dart: usize) -> i64 {
        if dart % 2 == 1 {
            self.a[dart / 2]
        } else {
            -self.a[dart / 2]
        }
    }

    fn draft(&self) -> Draft {
        Draft {
            names: self.map.names().to_vec(),
            rows: self.rows.clone(),
            k: self.k.clone(),
            labels: self.labels.clone(),
            a: self.a.clone(),
            rot: self.map.rotations().to_vec(),
            alive_v: vec![true; self.num_vertices()],
            alive_e: vec![true; self.num_edges()],
        }
    }
}

/// Mutable working copy used by the moves; darts keep their old ids until
/// [`Draft::finish`] compacts everything.
struct Draft {
    names: Vec<String>,
    rows: Vec<usize>,
    k: Vec<i64>,
    labels: Vec<usize>,
    a: Vec<i64>,
    rot: Vec<Vec<usize>>,
    alive_v: Vec<bool>,
    alive_e: Vec<bool>,
}

impl Draft {
    fn origin(&self, d: usize) -> usize {
        self.rot
            .iter()
            .position(|r| r.contains(&d))
            .expect("live dart sits in a rotation")
    }

    fn delete_edge(&mut self, e: usize) {
        for r in self.rot.iter_mut() {
            r.retain(|&d| d / 2 != e);
        }
        self.alive_e[e] = false;
    }

    fn flip(&mut self, e: usize) {
        for r in self.rot.iter_mut() {
            for d in r.iter_mut() {
                if *d / 2 == e {
                    *d ^= 1;
                }
            }
        }
        self.a[e] = -self.a[e];
    }

    /// Contracts the non-loop edge `e` into its source; the target vertex disappears.
    fn contract_into_source(&mut self, e: usize) {
        let (dw, dv) = (2 * e, 2 * e + 1);
        let w = self.origin(dw);
        let v = self.origin(dv);
        let rv = std::mem::take(&mut self.rot[v]);
        let iv = rv.iter().position(|&d| d == dv).unwrap();
        let around_v: Vec<usize> = (1..rv.len()).map(|i| rv[(iv + i) % rv.len()]).collect();
        let iw = self.rot[w].iter().position(|&d| d == dw).unwrap();
        self.rot[w].splice(iw..=iw, around_v);
        self.k[w] += self.k[v];
        self.alive_e[e] = false;
        self.alive_v[v] = false;
    }

    fn finish(self, system: &LinearSystem) -> Result<Picture> {
        let mut new_edge = vec![usize::MAX; self.labels.len()];
        let mut labels = Vec::new();
        let mut a = Vec::new();
        for e in 0..self.labels.len() {
            if self.alive_e[e] {
                new_edge[e] = labels.len();
                labels.push(self.labels[e]);
                a.push(self.a[e]);
            }
        }
        let mut vertices = Vec::new();
        let mut rotation = Vec::new();
        for v in 0..self.rows.len() {
            if !self.alive_v[v] {
                continue;
            }
            vertices.push(VertexSpec {
                name: self.names[v].clone(),
                row: self.rows[v],
                k: self.k[v],
            });
            rotation.push(
                self.rot[v]
                    .iter()
                    .map(|&d| 2 * new_edge[d / 2] + (d % 2))
                    .collect(),
            );
        }
        Picture::new(system.clone(), vertices, labels, a, rotation)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationKind {
    Incidence,
    VertexEquation,
    NotPlanar,
    Loop,
    ZeroEdge,
    SameLabelFacePair,
    LowDegree,
    MonoCycle,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().unwrap_or("?"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    Global,
    Vertex {
        vertex: usize,
    },
    VertexEdge {
        vertex: usize,
        edge: usize,
    },
    Edge {
        edge: usize,
    },
    /// `dart_v` and `dart_w` are the face darts leaving `v` and `w`; the
    /// contraction corridor runs through the corners just before them.
    FacePair {
        face: Vec<usize>,
        v: usize,
        w: usize,
        dart_v: usize,
        dart_w: usize,
    },
    /// `edges[i]` joins `vertices[i]` and `vertices[(i + 1) % k]`.
    Cycle {
        vertices: Vec<usize>,
        edges: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub witness: Witness,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            Witness::Global => write!(f, "{}", self.kind),
            Witness::Vertex { vertex } => write!(f, "{} at vertex {vertex}", self.kind),
            Witness::VertexEdge { vertex, edge } => {
                write!(f, "{} at vertex {vertex}, edge {edge}", self.kind)
            }
            Witness::Edge { edge } => write!(f, "{} at edge {edge}", self.kind),
            Witness::FacePair { v, w, .. } => write!(f, "{} at vertices {v}, {w}", self.kind),
            Witness::Cycle { vertices, edges } => {
                write!(f, "{} on vertices {vertices:?}, edges {edges:?}", self.kind)
            }
        }
    }
}

impl Violation {
    fn new(kind: ViolationKind, witness: Witness) -> Self {
        Violation { kind, witness }
    }
}

/// Net exponent of every column at `v`: incoming edges count `+a`, outgoing `-a`.
fn net_exponents(p: &Picture, v: usize) -> BTreeMap<usize, i64> {
    let m = p.system.p();
    let mut c: BTreeMap<usize, i64> = BTreeMap::new();
    for &d in p.map.rotation(v) {
        let entry = c.entry(p.labels[d / 2]).or_insert(0);
        *entry = m.reduce_i64(*entry + p.signed_a(d));
    }
    c
}

fn vertex_equation_holds(p: &Picture, v: usize) -> bool {
    let sys = &p.system;
    let i = p.rows[v];
    let support = sys.support(i);
    let c = net_exponents(p, v);
    let mut gen: Vec<BigInt> = support.iter().map(|&j| sys.a().get(i, j).clone()).collect();
    gen.push(-sys.b()[i].clone());
    let mut target: Vec<BigInt> = support
        .iter()
        .map(|j| BigInt::from(c.get(j).copied().unwrap_or(0)))
        .collect();
    target.push(BigInt::from(-p.k[v]));
    matches!(cyclic_membership(&gen, &target, sys.p()), Ok(Some(_)))
}

/// All violations of the picture conditions (empty means valid).
pub fn verify(p: &Picture) -> Vec<Violation> {
    let mut out = Vec::new();
    for v in 0..p.num_vertices() {
        let support = p.system.support(p.rows[v]);
        let mut bad = false;
        let mut reported = Vec::new();
        for e in p.edges_at(v) {
            if support.binary_search(&p.labels[e]).is_err() {
                bad = true;
                if !reported.contains(&e) {
                    reported.push(e);
                    out.push(Violation::new(
                        ViolationKind::Incidence,
                        Witness::VertexEdge { vertex: v, edge: e },
                    ));
                }
            }
        }
        if !bad && !vertex_equation_holds(p, v) {
            out.push(Violation::new(ViolationKind::VertexEquation, Witness::Vertex { vertex: v }));
        }
    }
    if !check_planar_embedding(&p.map) {
        out.push(Violation::new(ViolationKind::NotPlanar, Witness::Global));
    }
    out
}

pub fn is_valid(p: &Picture) -> bool {
    verify(p).is_empty()
}

/// `sum k(v)` in `Z_p`.
pub fn phase(p: &Picture) -> i64 {
    let m = p.system.p();
    p.k.iter().fold(0i64, |acc, &x| m.reduce_i64(acc + x))
}

/// Proof that `J^phase = 1` in the solution group, backed by a verified picture.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    system: SystemJson,
    phase: i64,
    picture_hash: String,
    conclusion: String,
}

impl Certificate {
    pub fn system(&self) -> Result<LinearSystem> {
        LinearSystem::from_json(&self.system)
    }

    pub fn p(&self) -> Modulus {
        self.system.p
    }

    pub fn phase(&self) -> i64 {
        self.phase
    }

    pub fn picture_hash(&self) -> &str {
        &self.picture_hash
    }

    pub fn conclusion(&self) -> &str {
        &self.conclusion
    }
}

pub fn certify(p: &Picture) -> Result<Certificate> {
    if let Some(v) = verify(p).into_iter().next() {
        return Err(Error::InvalidPicture(v.to_string()));
    }
    let ph = phase(p);
    let canonical = p.to_canonical_json()?;
    let hash = hex::encode(Sha256::digest(canonical.as_bytes()));
    Ok(Certificate {
        system: p.system.to_json()?,
        phase: ph,
        picture_hash: hash,
        conclusion: format!("J^{ph} = 1 in Γ_{}(A,b)", p.system.p()),
    })
}

pub fn flip_orientation(p: &Picture, edges: &[usize]) -> Result<Picture> {
    let mut d = p.draft();
    for &e in edges {
        if e >= p.num_edges() {
            return Err(Error::UnknownEdge(e));
        }
        d.flip(e);
    }
    d.finish(&p.system)
}

fn loops(p: &Picture) -> impl Iterator<Item = Violation> + '_ {
    (0..p.num_edges())
        .filter(|&e| p.is_loop(e))
        .map(|e| Violation::new(ViolationKind::Loop, Witness::Edge { edge: e }))
}

fn zero_edges(p: &Picture) -> impl Iterator<Item = Violation> + '_ {
    let m = p.system.p();
    (0..p.num_edges())
        .filter(move |&e| m.is_zero_i64(p.a[e]))
        .map(|e| Violation::new(ViolationKind::ZeroEdge, Witness::Edge { edge: e }))
}

/// One pair per face: the first vertex on the face walk whose row was
/// already seen, paired with the earlier vertex.
fn same_label_pairs(p: &Picture) -> Vec<Violation> {
    let mut out = Vec::new();
    for face in trace_faces(&p.map).faces {
        let mut first: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        for &d in &face {
            let v = p.map.origin(d);
            match first.get(&p.rows[v]) {
                Some(&(u, du)) if u != v => {
                    out.push(Violation::new(
                        ViolationKind::SameLabelFacePair,
                        Witness::FacePair {
                            face: face.clone(),
                            v: u,
                            w: v,
                            dart_v: du,
                            dart_w: d,
                        },
                    ));
                    break;
                }
                Some(_) => {}
                None => {
                    first.insert(p.rows[v], (v, d));
                }
            }
        }
    }
    out
}

fn low_degree(p: &Picture) -> impl Iterator<Item = Violation> + '_ {
    (0..p.num_vertices())
        .filter(|&v| p.map.degree(v) < p.system.support(p.rows[v]).len().min(4))
        .map(|v| Violation::new(ViolationKind::LowDegree, Witness::Vertex { vertex: v }))
}

/// A cycle inside one edge-label class, smallest label first.
fn mono_cycles(p: &Picture) -> Vec<Violation> {
    let mut by_label: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for e in (0..p.num_edges()).filter(|&e| !p.is_loop(e)) {
        by_label.entry(p.labels[e]).or_default().push(e);
    }
    let n = p.num_vertices();
    let mut out = Vec::new();
    for edges in by_label.values() {
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        let mut dsu: Vec<usize> = (0..n).collect();
        fn find(d: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while d[r] != r {
                r = d[r];
            }
            let mut y = x;
            while d[y] != r {
                let next = d[y];
                d[y] = r;
                y = next;
            }
            r
        }
        for &e in edges {
            let (s, t) = (p.source(e), p.target(e));
            let (rs, rt) = (find(&mut dsu, s), find(&mut dsu, t));
            if rs != rt {
                dsu[rs] = rt;
                adj[s].push((t, e));
                adj[t].push((s, e));
                continue;
            }
            // Tree path from t back to s, then e closes the cycle.
            let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
            let mut seen = vec![false; n];
            seen[t] = true;
            let mut queue = VecDeque::from([t]);
            while let Some(u) = queue.pop_front() {
                if u == s {
                    break;
                }
                for &(w, f) in &adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        prev[w] = Some((u, f));
                        queue.push_back(w);
                    }
                }
            }
            // vertices: s, ..., t following tree edges, closing edge e from t to s.
            let mut vertices = vec![s];
            let mut cyc_edges = Vec::new();
            let mut u = s;
            while let Some((w, f)) = prev[u] {
                cyc_edges.push(f);
                vertices.push(w);
                u = w;
            }
            cyc_edges.push(e);
            out.push(Violation::new(
                ViolationKind::MonoCycle,
                Witness::Cycle {
                    vertices,
                    edges: cyc_edges,
                },
            ));
            break;
        }
    }
    out
}

/// Every reducibility witness, grouped by kind in move order.
pub fn find_violations(p: &Picture) -> Result<Vec<Violation>> {
    if let Some(v) = verify(p).into_iter().next() {
        return Err(Error::InvalidPicture(v.to_string()));
    }
    Ok(candidates(p))
}

fn candidates(p: &Picture) -> Vec<Violation> {
    let mut out: Vec<Violation> = loops(p).collect();
    out.extend(zero_edges(p));
    out.extend(same_label_pairs(p));
    out.extend(low_degree(p));
    out.extend(mono_cycles(p));
    out
}

/// The first reducibility witness, or `None` when the picture satisfies all
/// four minimality conditions.
pub fn find_violation(p: &Picture) -> Result<Option<Violation>> {
    if let Some(v) = verify(p).into_iter().next() {
        return Err(Error::InvalidPicture(v.to_string()));
    }
    if let Some(v) = loops(p).next() {
        return Ok(Some(v));
    }
    if let Some(v) = zero_edges(p).next() {
        return Ok(Some(v));
    }
    if let Some(v) = same_label_pairs(p).into_iter().next() {
        return Ok(Some(v));
    }
    if let Some(v) = low_degree(p).next() {
        return Ok(Some(v));
    }
    Ok(mono_cycles(p).into_iter().next())
}

fn inapplicable(msg: impl Into<String>) -> Error {
    Error::InapplicableMove(msg.into())
}

/// Applies a reduction move. The result has the same phase and strictly
/// smaller `|V| + |E|`; preconditions are checked, not assumed.
pub fn apply_move(p: &Picture, violation: &Violation) -> Result<Picture> {
    let m = p.system.p();
    let mut d = p.draft();
    match (&violation.kind, &violation.witness) {
        (ViolationKind::Loop, Witness::Edge { edge }) => {
            let e = *edge;
            if e >= p.num_edges() || !p.is_loop(e) {
                return Err(inapplicable(format!("edge {e} is not a loop")));
            }
            d.delete_edge(e);
        }
        (ViolationKind::ZeroEdge, Witness::Edge { edge }) => {
            let e = *edge;
            if e >= p.num_edges() || !m.is_zero_i64(p.a[e]) {
                return Err(inapplicable(format!("edge {e} does not have a = 0")));
            }
            d.delete_edge(e);
        }
        (
            ViolationKind::SameLabelFacePair,
            Witness::FacePair {
                face,
                v,
                w,
                dart_v,
                dart_w,
            },
        ) => {
            let (v, w, dv, dw) = (*v, *w, *dart_v, *dart_w);
            let on_face = trace_faces(&p.map).faces.iter().any(|f| f == face);
            if !on_face
                || v == w
                || v >= p.num_vertices()
                || w >= p.num_vertices()
                || !face.contains(&dv)
                || !face.contains(&dw)
                || p.map.origin(dv) != v
                || p.map.origin(dw) != w
                || p.rows[v] != p.rows[w]
            {
                return Err(inapplicable("vertices do not share a face with equal row labels"));
            }
            let rv = p.map.rotation(v);
            let rw = p.map.rotation(w);
            let iv = rv.iter().position(|&x| x == dv).unwrap();
            let iw = rw.iter().position(|&x| x == dw).unwrap();
            let mut merged: Vec<usize> = (0..rv.len()).map(|i| rv[(iv + i) % rv.len()]).collect();
            merged.extend((0..rw.len()).map(|i| rw[(iw + i) % rw.len()]));
            d.rot[v] = merged;
            d.rot[w].clear();
            d.k[v] = m.reduce_i64(d.k[v] + d.k[w]);
            d.alive_v[w] = false;
        }
        (ViolationKind::LowDegree, Witness::Vertex { vertex }) => {
            let v = *vertex;
            if v >= p.num_vertices() {
                return Err(inapplicable(format!("no vertex {v}")));
            }
            let support = p.system.support(p.rows[v]);
            let deg = p.map.degree(v);
            if deg >= support.len().min(4) {
                return Err(inapplicable(format!("vertex {v} has degree {deg}")));
            }
            if !m.is_zero_i64(p.k[v]) {
                return Err(inapplicable(format!("vertex {v} has k != 0")));
            }
            let incident: Vec<usize> = p.edges_at(v).collect();
            match deg {
                0 => d.alive_v[v] = false,
                1 => return Err(inapplicable(format!("vertex {v} has degree 1"))),
                _ => {
                    if incident.iter().any(|&e| p.is_loop(e)) {
                        return Err(inapplicable(format!("vertex {v} carries a loop")));
                    }
                    let j = p.labels[incident[0]];
                    if incident.iter().any(|&e| p.labels[e] != j) {
                        return Err(inapplicable(format!("edges at vertex {v} carry different labels")));
                    }
                    let sum = p.map.rotation(v).iter().fold(0i64, |s, &x| m.reduce_i64(s + p.signed_a(x)));
                    if !m.is_zero_i64(sum) {
                        return Err(inapplicable(format!("edge values at vertex {v} do not cancel")));
                    }
                    // Make every incident edge point into v, then contract the
                    // largest one into its other end.
                    for &e in &incident {
                        if p.source(e) == v {
                            d.flip(e);
                        }
                    }
                    let last = *incident.iter().max().unwrap();
                    d.contract_into_source(last);
                }
            }
        }
        (ViolationKind::MonoCycle, Witness::Cycle { vertices, edges }) => {
            let kk = vertices.len();
            let valid = kk >= 2
                && edges.len() == kk
                && edges.iter().all(|&e| e < p.num_edges())
                && {
                    let mut vs = vertices.clone();
                    vs.sort_unstable();
                    vs.dedup();
                    let mut es = edges.clone();
                    es.sort_unstable();
                    es.dedup();
                    vs.len() == kk && es.len() == kk
                }
                && (0..kk).all(|i| {
                    let (x, y) = (vertices[i], vertices[(i + 1) % kk]);
                    let e = edges[i];
                    (p.source(e), p.target(e)) == (x, y) || (p.source(e), p.target(e)) == (y, x)
                })
                && edges.iter().all(|&e| p.labels[e] == p.labels[edges[0]]);
            if !valid {
                return Err(inapplicable("not a monochromatic simple cycle"));
            }
            // Orient e_i from v_i to v_{i+1} and the closing edge from v_1 to v_k.
            for i in 0..kk - 1 {
                if p.source(edges[i]) != vertices[i] {
                    d.flip(edges[i]);
                }
            }
            let closing = edges[kk - 1];
            if p.source(closing) != vertices[0] {
                d.flip(closing);
            }
            let extra = d.a[closing];
            for &e in &edges[..kk - 1] {
                d.a[e] = m.reduce_i64(d.a[e] + extra);
            }
            d.delete_edge(closing);
        }
        _ => return Err(inapplicable("witness does not match the violation kind")),
    }
    d.finish(&p.system)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum TraceStep {
    /// Isolated vertex with `k = 0` removed.
    RemoveIsolated { vertex: usize, size_after: usize },
    Move { violation: Violation, size_after: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Empty,
    /// No move applies; `blockers` lists low-degree witnesses whose
    /// preconditions failed (empty when the picture satisfies all four
    /// minimality conditions).
    Stuck { blockers: Vec<Violation> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionTrace {
    pub steps: Vec<TraceStep>,
    pub outcome: Outcome,
    pub result: Picture,
}

impl ReductionTrace {
    pub fn is_empty_outcome(&self) -> bool {
        self.outcome == Outcome::Empty
    }
}

/// Deletes vertex `v`, which must have no edges and `k(v) = 0`.
pub fn remove_isolated(p: &Picture, v: usize) -> Result<Picture> {
    if v >= p.num_vertices() || p.map.degree(v) != 0 || !p.system.p().is_zero_i64(p.k[v]) {
        return Err(inapplicable("not an isolated vertex with k = 0"));
    }
    let mut d = p.draft();
    d.alive_v[v] = false;
    d.finish(&p.system)
}

/// Repeatedly applies the first applicable move (loop, zero edge, same-label
/// face pair, low degree, monochromatic cycle) until the picture is empty or
/// nothing applies.
pub fn reduce(p: &Picture) -> Result<ReductionTrace> {
    if let Some(v) = verify(p).into_iter().next() {
        return Err(Error::InvalidPicture(v.to_string()));
    }
    let m = p.system.p();
    let mut cur = p.clone();
    let mut steps = Vec::new();
    loop {
        if let Some(v) = (0..cur.num_vertices()).find(|&v| cur.map.degree(v) == 0 && m.is_zero_i64(cur.k[v])) {
            cur = remove_isolated(&cur, v)?;
            steps.push(TraceStep::RemoveIsolated {
                vertex: v,
                size_after: cur.size(),
            });
            continue;
        }
        if cur.is_empty() {
            return Ok(ReductionTrace {
                steps,
                outcome: Outcome::Empty,
                result: cur,
            });
        }
        let mut blockers = Vec::new();
        let mut next = None;
        let first = loops(&cur).next().or_else(|| zero_edges(&cur).next()).or_else(|| same_label_pairs(&cur).into_iter().next());
        if let Some(v) = first {
            next = Some((apply_move(&cur, &v)?, v));
        } else {
            for v in low_degree(&cur) {
                match apply_move(&cur, &v) {
                    Ok(q) => {
                        next = Some((q, v));
                        break;
                    }
                    Err(Error::InapplicableMove(_)) => blockers.push(v),
                    Err(e) => return Err(e),
                }
            }
            if next.is_none() {
                if let Some(v) = mono_cycles(&cur).into_iter().next() {
                    next = Some((apply_move(&cur, &v)?, v));
                }
            }
        }
        match next {
            Some((q, v)) => {
                debug_assert!(q.size() < cur.size());
                cur = q;
                steps.push(TraceStep::Move {
                    violation: v,
                    size_after: cur.size(),
                });
            }
            None => {
                return Ok(ReductionTrace {
                    steps,
                    outcome: Outcome::Stuck { blockers },
                    result: cur,
                })
            }
        }
    }
}

/// Wire format: the map fields plus orientation and labels keyed by edge
/// index (position in `pairing`) and vertex name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PictureJson {
    #[serde(flatten)]
    pub map: MapJson,
    pub direction: BTreeMap<String, usize>,
    #[serde(rename = "hV")]
    pub h_v: BTreeMap<String, usize>,
    #[serde(rename = "hE")]
    pub h_e: BTreeMap<String, usize>,
    pub a: BTreeMap<String, i64>,
    pub k: BTreeMap<String, i64>,
    pub system: SystemJson,
}

impl Picture {
    pub fn to_json(&self) -> Result<PictureJson> {
        let edge_key = |e: usize| e.to_string();
        let names = self.map.names();
        Ok(PictureJson {
            map: self.map.to_json(),
            direction: (0..self.num_edges()).map(|e| (edge_key(e), 2 * e)).collect(),
            h_v: names.iter().cloned().zip(self.rows.iter().copied()).collect(),
            h_e: (0..self.num_edges()).map(|e| (edge_key(e), self.labels[e])).collect(),
            a: (0..self.num_edges()).map(|e| (edge_key(e), self.a[e])).collect(),
            k: names.iter().cloned().zip(self.k.iter().copied()).collect(),
            system: self.system.to_json()?,
        })
    }

    /// Edges are the entries of `pairing` in order; darts are renumbered so
    /// that edge `e` gets `2e` at its source.
    pub fn from_json(j: &PictureJson) -> Result<Self> {
        let system = LinearSystem::from_json(&j.system)?;
        let generic = CombinatorialMap::from_json(&j.map)?;
        let mut new_id = vec![usize::MAX; generic.num_darts()];
        let mut labels = Vec::new();
        let mut a = Vec::new();
        for (e, &[d1, d2]) in j.map.pairing.iter().enumerate() {
            let key = e.to_string();
            let src = *j
                .direction
                .get(&key)
                .ok_or_else(|| Error::MissingOrientation(key.clone()))?;
            let tgt = if src == d1 {
                d2
            } else if src == d2 {
                d1
            } else {
                return Err(Error::InvalidPicture(format!("direction of edge {e} names dart {src}")));
            };
            new_id[src] = 2 * e;
            new_id[tgt] = 2 * e + 1;
            labels.push(*j.h_e.get(&key).ok_or_else(|| Error::InvalidPicture(format!("edge {e} has no hE")))?);
            a.push(*j.a.get(&key).ok_or_else(|| Error::InvalidPicture(format!("edge {e} has no a")))?);
        }
        let names = ordered_names(j.map.rotation.keys());
        let vertices = names
            .iter()
            .map(|n| {
                Ok(VertexSpec {
                    name: n.clone(),
                    row: *j.h_v.get(n).ok_or_else(|| Error::InvalidPicture(format!("vertex {n} has no hV")))?,
                    k: *j.k.get(n).ok_or_else(|| Error::InvalidPicture(format!("vertex {n} has no k")))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let rotation = names
            .iter()
            .map(|n| j.map.rotation[n].iter().map(|&d| new_id[d]).collect())
            .collect();
        Picture::new(system, vertices, labels, a, rotation)
    }

    /// Sorted-key JSON; the certificate hash is taken over these bytes.
    pub fn to_canonical_json(&self) -> Result<String> {
        let value = serde_json::to_value(self.to_json()?)?;
        Ok(serde_json::to_string(&value)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(a: &[Vec<i64>], b: &[i64], p: Modulus) -> LinearSystem {
        LinearSystem::from_i64(a, b, p).unwrap()
    }

    fn vx(name: &str, row: usize, k: i64) -> VertexSpec {
        VertexSpec {
            name: name.into(),
            row,
            k,
        }
    }

    fn ed(source: usize, target: usize, label: usize, a: i64) -> EdgeSpec {
        EdgeSpec {
            source,
            target,
            label,
            a,
        }
    }

    /// Rows `x0 = 0` and `x0 = 1`, joined by one edge u -> w with a = 1:
    /// at u, `x0^-1 = J^0`; at w, `x0 = J^1`.
    fn dipole(p: Modulus) -> Picture {
        let s = sys(&[vec![1], vec![1]], &[0, 1], p);
        Picture::from_edges(s, vec![vx("u", 0, 0), vx("w", 1, 1)], vec![ed(0, 1, 0, 1)], &[vec![0], vec![0]]).unwrap()
    }

    #[test]
    fn empty_picture() {
        let p = Picture::empty(sys(&[vec![1]], &[0], Modulus::Finite(3)));
        assert!(verify(&p).is_empty());
        assert_eq!(phase(&p), 0);
        let c = certify(&p).unwrap();
        assert_eq!(c.phase(), 0);
        assert_eq!(c.conclusion(), "J^0 = 1 in Γ_3(A,b)");
        let t = reduce(&p).unwrap();
        assert!(t.is_empty_outcome());
        assert!(t.steps.is_empty());
    }

    #[test]
    fn dipole_is_valid_with_phase_one() {
        for p in [Modulus::Finite(2), Modulus::Finite(5), Modulus::Infinite] {
            let pic = dipole(p);
            assert_eq!(verify(&pic), vec![]);
            assert_eq!(phase(&pic), 1);
            // Not reducible: each vertex has |R| = 1 and degree 1.
            let t = reduce(&pic).unwrap();
            assert!(matches!(t.outcome, Outcome::Stuck { .. }));
        }
    }

    #[test]
    fn incidence_violation() {
        let s = sys(&[vec![1, 0]], &[0], Modulus::Finite(3));
        let pic = Picture::from_edges(s, vec![vx("v", 0, 0), vx("w", 0, 0)], vec![ed(0, 1, 1, 1)], &[vec![0], vec![0]]).unwrap();
        let v = verify(&pic);
        assert_eq!(v.len(), 2);
        assert!(v.iter().all(|x| x.kind == ViolationKind::Incidence));
        assert_eq!(v[0].witness, Witness::VertexEdge { vertex: 0, edge: 0 });
    }

    #[test]
    fn vertex_equation_violation() {
        let s = sys(&[vec![1], vec![1]], &[0, 1], Modulus::Finite(5));
        let pic = Picture::from_edges(s, vec![vx("u", 0, 0), vx("w", 1, 2)], vec![ed(0, 1, 0, 1)], &[vec![0], vec![0]]).unwrap();
        let v = verify(&pic);
        assert_eq!(v, vec![Violation::new(ViolationKind::VertexEquation, Witness::Vertex { vertex: 1 })]);
        assert!(certify(&pic).is_err());
    }

    #[test]
    fn flips_preserve_validity_and_phase() {
        let pic = dipole(Modulus::Finite(5));
        let f = flip_orientation(&pic, &[0]).unwrap();
        assert!(verify(&f).is_empty());
        assert_eq!(f.a(0), 4);
        assert_eq!(f.source(0), 1);
        assert_eq!(flip_orientation(&f, &[0]).unwrap(), pic);
        assert_eq!(flip_orientation(&pic, &[]).unwrap(), pic);
        assert_eq!(flip_orientation(&pic, &[3]), Err(Error::UnknownEdge(3)));
    }

    /// Row 0 is x0 + x1 = 0 over Z_p; two copies form a cancellation pair.
    fn two_row_pair(p: Modulus) -> Picture {
        let s = sys(&[vec![1, 1]], &[0], p);
        // v -> w along x0 (a = 1) and along x1 (a = 1): at v net (-1, -1), at w (1, 1).
        Picture::from_edges(
            s,
            vec![vx("v", 0, 0), vx("w", 0, 0)],
            vec![ed(0, 1, 0, 1), ed(0, 1, 1, 1)],
            &[vec![0, 1], vec![1, 0]],
        )
        .unwrap()
    }

    #[test]
    fn same_label_pair_contracts_to_loops() {
        let pic = two_row_pair(Modulus::Finite(7));
        assert!(verify(&pic).is_empty());
        let v = find_violation(&pic).unwrap().unwrap();
        assert_eq!(v.kind, ViolationKind::SameLabelFacePair);
        let q = apply_move(&pic, &v).unwrap();
        assert!(verify(&q).is_empty());
        assert_eq!(q.num_vertices(), 1);
        assert!((0..q.num_edges()).all(|e| q.is_loop(e)));
        let t = reduce(&pic).unwrap();
        assert!(t.is_empty_outcome());
        assert_eq!(t.steps.len(), 4);
    }

    #[test]
    fn loop_move() {
        let s = sys(&[vec![1, 1]], &[0], Modulus::Finite(3));
        let pic = Picture::from_edges(s, vec![vx("v", 0, 0)], vec![ed(0, 0, 0, 2)], &[vec![0, 0]]).unwrap();
        assert!(verify(&pic).is_empty());
        let v = find_violation(&pic).unwrap().unwrap();
        assert_eq!(v, Violation::new(ViolationKind::Loop, Witness::Edge { edge: 0 }));
        let q = apply_move(&pic, &v).unwrap();
        assert_eq!(q.num_edges(), 0);
        assert!(verify(&q).is_empty());
    }

    #[test]
    fn degree_two_move() {
        // Path u -x0-> v <-x0- w with a = (t, -t) into v; row of v is x0 + x1 + x2 = 0.
        let t = 2;
        let s = sys(&[vec![1, 1, 1], vec![1, 0, 0]], &[0, 0], Modulus::Finite(5));
        let pic = Picture::from_edges(
            s,
            vec![vx("u", 1, 0), vx("v", 0, 0), vx("w", 1, 0)],
            vec![ed(0, 1, 0, t), ed(2, 1, 0, -t)],
            &[vec![0], vec![0, 1], vec![1]],
        )
        .unwrap();
        assert!(verify(&pic).is_empty());
        let v = Violation::new(ViolationKind::LowDegree, Witness::Vertex { vertex: 1 });
        let q = apply_move(&pic, &v).unwrap();
        assert!(verify(&q).is_empty());
        assert_eq!((q.num_vertices(), q.num_edges()), (2, 1));
        assert_eq!(q.a(0), t);
        assert_eq!(q.label(0), 0);
        assert_eq!(phase(&q), phase(&pic));
    }

    #[test]
    fn mono_cycle_move() {
        // Triangle of x0 edges on rows x0 = 0; a = (a1, a2, a3) oriented so
        // e1: v1->v2, e2: v2->v3, e3: v1->v3, and each vertex balances.
        let s = sys(&[vec![1]], &[0], Modulus::Infinite);
        let (a1, a2) = (3, 5);
        let a3 = 7;
        // Vertex equations in the row x0 = 0 hold whatever the net exponent is.
        let pic = Picture::from_edges(
            s,
            vec![vx("1", 0, 0), vx("2", 0, 0), vx("3", 0, 0)],
            vec![ed(0, 1, 0, a1), ed(1, 2, 0, a2), ed(0, 2, 0, a3)],
            &[vec![0, 2], vec![1, 0], vec![2, 1]],
        )
        .unwrap();
        assert!(verify(&pic).is_empty());
        let v = Violation::new(
            ViolationKind::MonoCycle,
            Witness::Cycle {
                vertices: vec![0, 1, 2],
                edges: vec![0, 1, 2],
            },
        );
        let q = apply_move(&pic, &v).unwrap();
        assert_eq!(q.num_edges(), 2);
        assert_eq!((q.a(0), q.a(1)), (a1 + a3, a2 + a3));
        assert!(verify(&q).is_empty());
    }

    #[test]
    fn inapplicable_moves_are_errors() {
        let pic = dipole(Modulus::Finite(3));
        let bad = Violation::new(ViolationKind::Loop, Witness::Edge { edge: 0 });
        assert!(matches!(apply_move(&pic, &bad), Err(Error::InapplicableMove(_))));
        let deg1 = Violation::new(ViolationKind::LowDegree, Witness::Vertex { vertex: 0 });
        assert!(matches!(apply_move(&pic, &deg1), Err(Error::InapplicableMove(_))));
    }

    #[test]
    fn json_round_trip_and_hash_stability() {
        let pic = two_row_pair(Modulus::Infinite);
        let j = pic.to_json().unwrap();
        let text = serde_json::to_string(&j).unwrap();
        let back = Picture::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, pic);
        assert_eq!(certify(&pic).unwrap().picture_hash(), certify(&back).unwrap().picture_hash());
    }

    #[test]
    fn json_direction_renumbers_darts() {
        let pic = dipole(Modulus::Finite(3));
        let mut j = pic.to_json().unwrap();
        // Declare dart 1 as the source; the same geometric edge now points w -> u.
        j.direction.insert("0".into(), 1);
        let q = Picture::from_json(&j).unwrap();
        assert_eq!((q.source(0), q.target(0)), (1, 0));
    }
}
