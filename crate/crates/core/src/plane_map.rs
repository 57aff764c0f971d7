//! Combinatorial maps (rotation systems), face tracing and Euler checks.
//!
//! Darts are numbered `0..n`. Each vertex carries the counterclockwise cyclic
//! order of the darts leaving it; the face permutation is
//! `phi(d) = succ(pair(d))`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinatorialMap {
    names: Vec<String>,
    pairing: Vec<usize>,
    rotation: Vec<Vec<usize>>,
    origin: Vec<usize>,
    pos: Vec<usize>,
}

impl CombinatorialMap {
    /// Builds a map from per-vertex rotations and the dart pairing.
    ///
    /// Vertices with an empty rotation are allowed (isolated vertices); they
    /// own no darts and therefore no face orbit.
    pub fn new(names: Vec<String>, rotation: Vec<Vec<usize>>, pairing: Vec<usize>) -> Result<Self> {
        let n = pairing.len();
        if names.len() != rotation.len() {
            return Err(Error::InvalidMap(format!(
                "{} names for {} rotations",
                names.len(),
                rotation.len()
            )));
        }
        if names.iter().collect::<BTreeSet<_>>().len() != names.len() {
            return Err(Error::InvalidMap("duplicate vertex names".into()));
        }
        for (d, &e) in pairing.iter().enumerate() {
            if e >= n || e == d || pairing[e] != d {
                return Err(Error::InvalidMap(format!(
                    "pairing is not a fixed-point-free involution at dart {d}"
                )));
            }
        }
        let mut origin = vec![usize::MAX; n];
        let mut pos = vec![usize::MAX; n];
        for (v, rot) in rotation.iter().enumerate() {
            for (i, &d) in rot.iter().enumerate() {
                if d >= n {
                    return Err(Error::InvalidMap(format!("unknown dart {d} at vertex {}", names[v])));
                }
                if origin[d] != usize::MAX {
                    return Err(Error::InvalidMap(format!("dart {d} appears in two rotations")));
                }
                origin[d] = v;
                pos[d] = i;
            }
        }
        if let Some(d) = origin.iter().position(|&o| o == usize::MAX) {
            return Err(Error::InvalidMap(format!("dart {d} is in no rotation")));
        }
        Ok(CombinatorialMap {
            names,
            pairing,
            rotation,
            origin,
            pos,
        })
    }

    /// Map of a graph with edges `edges[e] = (u, v)` and per-vertex rotations
    /// listing incident edge ids counterclockwise. Edge `e` owns darts `2e`
    /// (at `u`) and `2e + 1` (at `v`); for a loop the first occurrence in the
    /// rotation is dart `2e`.
    pub fn from_edge_rotation(
        names: Vec<String>,
        edges: &[(usize, usize)],
        edge_rotation: &[Vec<usize>],
    ) -> Result<Self> {
        let mut seen = vec![0u8; edges.len()];
        let mut rotation = Vec::with_capacity(edge_rotation.len());
        for (v, rot) in edge_rotation.iter().enumerate() {
            let mut darts = Vec::with_capacity(rot.len());
            for &e in rot {
                let &(s, t) = edges.get(e).ok_or(Error::UnknownEdge(e))?;
                let d = if s == t {
                    seen[e] += 1;
                    if seen[e] == 1 {
                        2 * e
                    } else {
                        2 * e + 1
                    }
                } else if v == s {
                    2 * e
                } else if v == t {
                    2 * e + 1
                } else {
                    return Err(Error::InvalidMap(format!("edge {e} listed at non-incident vertex {v}")));
                };
                darts.push(d);
            }
            rotation.push(darts);
        }
        let pairing = (0..2 * edges.len()).map(|d| d ^ 1).collect();
        Self::new(names, rotation, pairing)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn num_darts(&self) -> usize {
        self.pairing.len()
    }

    pub fn num_edges(&self) -> usize {
        self.pairing.len() / 2
    }

    pub fn num_vertices(&self) -> usize {
        self.rotation.len()
    }

    pub fn pair(&self, d: usize) -> usize {
        self.pairing[d]
    }

    pub fn origin(&self, d: usize) -> usize {
        self.origin[d]
    }

    pub fn rotation(&self, v: usize) -> &[usize] {
        &self.rotation[v]
    }

    pub fn rotations(&self) -> &[Vec<usize>] {
        &self.rotation
    }

    pub fn pairing(&self) -> &[usize] {
        &self.pairing
    }

    /// Number of darts at `v` (a loop counts twice).
    pub fn degree(&self, v: usize) -> usize {
        self.rotation[v].len()
    }

    /// Next dart counterclockwise around the origin of `d`.
    pub fn succ(&self, d: usize) -> usize {
        let rot = &self.rotation[self.origin[d]];
        rot[(self.pos[d] + 1) % rot.len()]
    }

    pub fn pred(&self, d: usize) -> usize {
        let rot = &self.rotation[self.origin[d]];
        rot[(self.pos[d] + rot.len() - 1) % rot.len()]
    }

    pub fn face_next(&self, d: usize) -> usize {
        self.succ(self.pairing[d])
    }

    pub fn is_loop(&self, d: usize) -> bool {
        self.origin[d] == self.origin[self.pairing[d]]
    }

    pub fn has_loops(&self) -> bool {
        (0..self.num_darts()).any(|d| self.is_loop(d))
    }

    /// Connected component index of every vertex, numbered in order of first vertex.
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.num_vertices()];
        let mut next = 0;
        for start in 0..self.num_vertices() {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &d in &self.rotation[v] {
                    let w = self.origin[self.pairing[d]];
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
}

/// Face orbits, each starting at its smallest dart, ordered by that dart.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceTrace {
    pub faces: Vec<Vec<usize>>,
}

impl FaceTrace {
    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Face index of every dart.
    pub fn face_of_dart(&self, num_darts: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; num_darts];
        for (f, face) in self.faces.iter().enumerate() {
            for &d in face {
                out[d] = f;
            }
        }
        out
    }
}

pub fn trace_faces(m: &CombinatorialMap) -> FaceTrace {
    let mut seen = vec![false; m.num_darts()];
    let mut faces = Vec::new();
    for start in 0..m.num_darts() {
        if seen[start] {
            continue;
        }
        let mut face = Vec::new();
        let mut d = start;
        while !seen[d] {
            seen[d] = true;
            face.push(d);
            d = m.face_next(d);
        }
        faces.push(face);
    }
    FaceTrace { faces }
}

/// Euler's formula `V - E + F = 2` on every component that has an edge.
/// Isolated vertices are ignored.
pub fn check_planar_embedding(m: &CombinatorialMap) -> bool {
    let comp = m.components();
    let ncomp = comp.iter().max().map_or(0, |c| c + 1);
    let mut v = vec![0i64; ncomp];
    let mut e2 = vec![0i64; ncomp];
    let mut f = vec![0i64; ncomp];
    for (vertex, &c) in comp.iter().enumerate() {
        v[c] += 1;
        e2[c] += m.degree(vertex) as i64;
    }
    for face in trace_faces(m).faces {
        f[comp[m.origin(face[0])]] += 1;
    }
    (0..ncomp).all(|c| e2[c] == 0 || v[c] - e2[c] / 2 + f[c] == 2)
}

/// Checks that `face` is one full orbit of the face permutation.
fn check_face(m: &CombinatorialMap, face: &[usize]) -> Result<()> {
    let Some(&first) = face.first() else {
        return Err(Error::UnknownFace);
    };
    if first >= m.num_darts() {
        return Err(Error::UnknownFace);
    }
    let mut d = first;
    for (i, &expected) in face.iter().enumerate() {
        if d != expected || (i > 0 && d == first) {
            return Err(Error::UnknownFace);
        }
        d = m.face_next(d);
    }
    if d != first {
        return Err(Error::UnknownFace);
    }
    Ok(())
}

/// Number of darts on the face; a bridge contributes both its darts.
pub fn face_size(m: &CombinatorialMap, face: &[usize]) -> Result<usize> {
    check_face(m, face)?;
    Ok(face.len())
}

/// A closed walk `vertices[0] -darts[0]-> vertices[1] ... -> vertices[0]`
/// with distinct vertices and distinct edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimpleCycle {
    pub vertices: Vec<usize>,
    pub darts: Vec<usize>,
}

impl SimpleCycle {
    pub fn len(&self) -> usize {
        self.darts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.darts.is_empty()
    }

    /// Distinct vertices, distinct edges, consecutive incidence and, when
    /// given, every edge having a dart on `face`.
    pub fn is_valid_in(&self, m: &CombinatorialMap, face: Option<&[usize]>) -> bool {
        let k = self.darts.len();
        if k < 2 || self.vertices.len() != k {
            return false;
        }
        let vs: BTreeSet<_> = self.vertices.iter().collect();
        let es: BTreeSet<_> = self.darts.iter().map(|&d| d.min(m.pair(d))).collect();
        if vs.len() != k || es.len() != k {
            return false;
        }
        let on_face: Option<BTreeSet<usize>> = face.map(|f| f.iter().copied().collect());
        (0..k).all(|i| {
            let d = self.darts[i];
            d < m.num_darts()
                && m.origin(d) == self.vertices[i]
                && m.origin(m.pair(d)) == self.vertices[(i + 1) % k]
                && on_face
                    .as_ref()
                    .map_or(true, |f| f.contains(&d) || f.contains(&m.pair(d)))
        })
    }
}

/// A simple cycle whose edges lie on the boundary of `face`.
///
/// Edges with both darts on a single face are discarded; the boundary of
/// `face` is then re-walked skipping discarded darts, and the first repeated
/// vertex closes the cycle. `None` when no edge of `face` survives (for
/// instance when the component is a tree).
pub fn boundary_simple_cycle(m: &CombinatorialMap, face: &[usize]) -> Result<Option<SimpleCycle>> {
    if m.has_loops() {
        return Err(Error::LoopsPresent);
    }
    check_face(m, face)?;
    let trace = trace_faces(m);
    let face_of = trace.face_of_dart(m.num_darts());
    let kept: Vec<bool> = (0..m.num_darts())
        .map(|d| face_of[d] != face_of[m.pair(d)])
        .collect();
    let Some(&start) = face.iter().find(|&&d| kept[d]) else {
        return Ok(None);
    };
    // Next kept dart counterclockwise after `d` at its origin.
    let kept_succ = |d: usize| -> usize {
        let mut x = m.succ(d);
        while !kept[x] {
            x = m.succ(x);
        }
        x
    };
    let mut first_seen: BTreeMap<usize, usize> = BTreeMap::new();
    let mut walk: Vec<usize> = Vec::new();
    let mut d = start;
    loop {
        let v = m.origin(d);
        if let Some(&i) = first_seen.get(&v) {
            let darts = walk[i..].to_vec();
            let vertices = darts.iter().map(|&x| m.origin(x)).collect();
            let cycle = SimpleCycle { vertices, darts };
            if !cycle.is_valid_in(m, Some(face)) {
                return Err(Error::Internal("boundary walk produced an invalid cycle".into()));
            }
            return Ok(Some(cycle));
        }
        first_seen.insert(v, walk.len());
        walk.push(d);
        d = kept_succ(m.pair(d));
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScPair {
    P63,
    P44,
    P36,
}

impl ScPair {
    pub fn degree_bound(&self) -> usize {
        match self {
            ScPair::P63 => 6,
            ScPair::P44 => 4,
            ScPair::P36 => 3,
        }
    }

    pub fn face_bound(&self) -> usize {
        match self {
            ScPair::P63 => 3,
            ScPair::P44 => 4,
            ScPair::P36 => 6,
        }
    }

    pub fn all() -> [ScPair; 3] {
        [ScPair::P63, ScPair::P44, ScPair::P36]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScWitness {
    Vertex { vertex: usize, degree: usize },
    Face { face: Vec<usize>, size: usize },
}

impl ScWitness {
    pub fn is_valid_for(&self, m: &CombinatorialMap, pair: ScPair) -> bool {
        match self {
            ScWitness::Vertex { vertex, degree } => {
                *vertex < m.num_vertices() && m.degree(*vertex) == *degree && *degree < pair.degree_bound()
            }
            ScWitness::Face { face, size } => {
                face_size(m, face).ok() == Some(*size) && *size < pair.face_bound()
            }
        }
    }
}

/// A vertex of degree `< a` or else a face of size `< b`, for `(a, b)` given by `pair`.
pub fn sc_witness(m: &CombinatorialMap, pair: ScPair) -> Result<ScWitness> {
    if m.num_vertices() == 0 {
        return Err(Error::InvalidMap("map has no vertices".into()));
    }
    if !check_planar_embedding(m) {
        return Err(Error::NotPlanar);
    }
    if let Some(v) = (0..m.num_vertices()).find(|&v| m.degree(v) < pair.degree_bound()) {
        return Ok(ScWitness::Vertex {
            vertex: v,
            degree: m.degree(v),
        });
    }
    trace_faces(m)
        .faces
        .into_iter()
        .find(|f| f.len() < pair.face_bound())
        .map(|face| ScWitness::Face {
            size: face.len(),
            face,
        })
        .ok_or(Error::ScContradiction(pair.degree_bound(), pair.face_bound()))
}

/// Wire format: `{"darts": [..], "pairing": [[d1, d2], ..], "rotation": {"v": [..]}}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapJson {
    pub darts: Vec<usize>,
    pub pairing: Vec<[usize; 2]>,
    pub rotation: BTreeMap<String, Vec<usize>>,
}

/// Vertex names in a stable order: numerically if every name is an integer.
pub fn ordered_names<'a>(keys: impl Iterator<Item = &'a String>) -> Vec<String> {
    let mut names: Vec<String> = keys.cloned().collect();
    if names.iter().all(|n| n.parse::<u64>().is_ok()) {
        names.sort_by_key(|n| n.parse::<u64>().unwrap());
    } else {
        names.sort();
    }
    names
}

impl CombinatorialMap {
    pub fn to_json(&self) -> MapJson {
        MapJson {
            darts: (0..self.num_darts()).collect(),
            pairing: (0..self.num_darts())
                .filter(|&d| d < self.pairing[d])
                .map(|d| [d, self.pairing[d]])
                .collect(),
            rotation: self
                .names
                .iter()
                .cloned()
                .zip(self.rotation.iter().cloned())
                .collect(),
        }
    }

    /// Dart ids must be exactly `0..n`.
    pub fn from_json(j: &MapJson) -> Result<Self> {
        let n = j.darts.len();
        let ids: BTreeSet<usize> = j.darts.iter().copied().collect();
        if ids.len() != n || ids.iter().next_back().map_or(false, |&m| m + 1 != n) {
            return Err(Error::InvalidMap("dart ids must be 0..n without repeats".into()));
        }
        let mut pairing = vec![usize::MAX; n];
        for &[a, b] in &j.pairing {
            if a >= n || b >= n || pairing[a] != usize::MAX || pairing[b] != usize::MAX || a == b {
                return Err(Error::InvalidMap(format!("bad pair [{a}, {b}]")));
            }
            pairing[a] = b;
            pairing[b] = a;
        }
        if pairing.contains(&usize::MAX) {
            return Err(Error::InvalidMap("unpaired dart".into()));
        }
        let names = ordered_names(j.rotation.keys());
        let rotation = names.iter().map(|n| j.rotation[n].clone()).collect();
        Self::new(names, rotation, pairing)
    }
}
