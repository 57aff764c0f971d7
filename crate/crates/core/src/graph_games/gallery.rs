//! Built-in instances: K33, K5, D17, the Heawood graph and K44, plus the
//! transcribed K33 double-cover and D17 pictures.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{incidence_matrix, CoverMap, Graph, GraphEdge, ZColouring};
use crate::error::{Error, Result};
use crate::picture::{EdgeSpec, LinearSystem, Picture, VertexSpec};
use crate::zmod_linalg::Modulus;

const K33_FIGURE: &str = include_str!("../../data/k33_double_cover.json");
const D17_FIGURE: &str = include_str!("../../data/d17_picture.json");

pub const NAMES: [&str; 5] = ["K33", "K5", "D17", "HEAWOOD", "K44"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateVertex {
    pub id: String,
    /// Name of the base-graph vertex this copy maps to.
    pub label: String,
    /// Copies that are not locally bijective onto the base graph; they get
    /// `k = 0` and their mutual edges carry `a = -1`.
    pub blue: bool,
}

/// A drawn picture of a base graph: vertex copies, edges between copies and
/// a counterclockwise rotation of edge indices at each copy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FigureTemplate {
    pub base: String,
    pub vertices: Vec<TemplateVertex>,
    pub edges: Vec<[String; 2]>,
    pub rotation: BTreeMap<String, Vec<usize>>,
}

impl FigureTemplate {
    /// Picture for `(I(G), b, p)`: each edge is labelled by the base edge
    /// joining its end labels and oriented like it.
    pub fn to_picture(&self, g: &Graph, b: &ZColouring, p: Modulus) -> Result<Picture> {
        b.check(g)?;
        let index: BTreeMap<&str, usize> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id.as_str(), i))
            .collect();
        let vertex = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| Error::Format(format!("template edge names unknown vertex {id}")))
        };
        let row = |i: usize| {
            g.vertex_index(&self.vertices[i].label)
                .ok_or_else(|| Error::Format(format!("label {} is not a base vertex", self.vertices[i].label)))
        };
        let vertices = (0..self.vertices.len())
            .map(|i| {
                let r = row(i)?;
                Ok(VertexSpec {
                    name: self.vertices[i].id.clone(),
                    row: r,
                    k: if self.vertices[i].blue { 0 } else { b.0[r] },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut edges = Vec::new();
        for [x, y] in &self.edges {
            let (u, v) = (vertex(x)?, vertex(y)?);
            let (ru, rv) = (row(u)?, row(v)?);
            let ge = g
                .edge_between(ru, rv)
                .ok_or_else(|| Error::Format(format!("no base edge between labels of {x} and {y}")))?;
            let forward = g.edge(ge).src == Some(ru);
            let both_blue = self.vertices[u].blue && self.vertices[v].blue;
            edges.push(EdgeSpec {
                source: if forward { u } else { v },
                target: if forward { v } else { u },
                label: ge,
                a: if both_blue { -1 } else { 1 },
            });
        }
        let rotation = self
            .vertices
            .iter()
            .map(|v| {
                self.rotation
                    .get(&v.id)
                    .cloned()
                    .ok_or_else(|| Error::Format(format!("no rotation for {}", v.id)))
            })
            .collect::<Result<Vec<_>>>()?;
        let system = LinearSystem::new(incidence_matrix(g)?, b.to_vector(), p)?;
        Picture::from_edges(system, vertices, edges, &rotation)
    }
}

impl FigureTemplate {
    /// The drawn graph with its rotation system, mapped onto `g` by labels.
    /// Only figures without blue copies are covers.
    pub fn to_cover(&self, g: &Graph) -> Result<CoverMap> {
        if self.vertices.iter().any(|v| v.blue) {
            return Err(Error::InvalidCover("figure has copies that are not locally bijective".into()));
        }
        let names: Vec<String> = self.vertices.iter().map(|v| v.id.clone()).collect();
        let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let edges = self
            .edges
            .iter()
            .map(|[x, y]| match (index.get(x.as_str()), index.get(y.as_str())) {
                (Some(&u), Some(&v)) => Ok(GraphEdge { ends: (u, v), src: None }),
                _ => Err(Error::Format(format!("template edge {x}-{y} names an unknown vertex"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let rotation = names
            .iter()
            .map(|n| self.rotation.get(n).cloned().ok_or_else(|| Error::Format(format!("no rotation for {n}"))))
            .collect::<Result<Vec<_>>>()?;
        let h = Graph::new(names, edges)?.with_rotation(rotation)?;
        let phi = self
            .vertices
            .iter()
            .map(|v| {
                g.vertex_index(&v.label)
                    .ok_or_else(|| Error::Format(format!("label {} is not a base vertex", v.label)))
            })
            .collect::<Result<Vec<_>>>()?;
        CoverMap::new(h, g.clone(), phi)
    }
}

/// A vertex whose neighbour labels do not match the neighbourhood of its own label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalFailure {
    pub vertex: usize,
    /// Distinct required neighbours that are present.
    pub covered: usize,
    pub required: usize,
}

/// Vertices of an incidence-system picture where `h_V` is not locally
/// bijective onto `g`.
pub fn local_bijectivity_failures(p: &Picture, g: &Graph) -> Vec<LocalFailure> {
    let mut out = Vec::new();
    for v in 0..p.num_vertices() {
        let images: Vec<usize> = p
            .edges_at(v)
            .map(|e| {
                let w = if p.source(e) == v { p.target(e) } else { p.source(e) };
                p.row(w)
            })
            .collect();
        let distinct: std::collections::BTreeSet<usize> = images.iter().copied().collect();
        let required = g.neighbours(p.row(v));
        if images.len() != distinct.len() || distinct != required {
            out.push(LocalFailure {
                vertex: v,
                covered: distinct.intersection(&required).count(),
                required: required.len(),
            });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GalleryInstance {
    pub name: String,
    /// Oriented base graph.
    pub graph: Graph,
    /// Indicator of the first vertex, then the zero colouring.
    pub colourings: Vec<ZColouring>,
    pub figure: Option<FigureTemplate>,
}

impl GalleryInstance {
    pub fn default_colouring(&self) -> &ZColouring {
        &self.colourings[0]
    }

    pub fn system(&self, b: &ZColouring, p: Modulus) -> Result<LinearSystem> {
        b.check(&self.graph)?;
        LinearSystem::new(incidence_matrix(&self.graph)?, b.to_vector(), p)
    }

    pub fn figure_picture(&self, b: &ZColouring, p: Modulus) -> Result<Option<Picture>> {
        self.figure.as_ref().map(|f| f.to_picture(&self.graph, b, p)).transpose()
    }
}

fn bundle(name: &str, graph: Graph, figure: Option<&str>) -> Result<GalleryInstance> {
    let n = graph.num_vertices();
    Ok(GalleryInstance {
        name: name.to_string(),
        colourings: vec![ZColouring::indicator(n, 0), ZColouring::zero(n)],
        graph,
        figure: figure.map(serde_json::from_str).transpose()?,
    })
}

fn k33() -> Result<Graph> {
    let arcs: Vec<(usize, usize)> = (3..6).flat_map(|l| (0..3).map(move |d| (l, d))).collect();
    Graph::directed(&["1", "2", "3", "a", "b", "c"], &arcs)
}

fn complete(n: usize) -> Result<Graph> {
    let names: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let arcs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    Graph::directed(&refs, &arcs)
}

/// Two K4s on `1..4` and `a..d` joined by the matching `1a, 2b, 3c, 4d`.
fn d17() -> Result<Graph> {
    let mut arcs = Vec::new();
    for base in [0, 4] {
        for i in 0..4 {
            for j in i + 1..4 {
                arcs.push((base + i, base + j));
            }
        }
    }
    arcs.extend((0..4).map(|i| (i, i + 4)));
    Graph::directed(&["1", "2", "3", "4", "a", "b", "c", "d"], &arcs)
}

/// 14-cycle with chords `i - (i + 5)` for even `i`.
fn heawood() -> Result<Graph> {
    let names: Vec<String> = (0..14).map(|i| i.to_string()).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let mut arcs: Vec<(usize, usize)> = (0..14).map(|i| (i, (i + 1) % 14)).collect();
    arcs.extend((0..14).step_by(2).map(|i| (i, (i + 5) % 14)));
    Graph::directed(&refs, &arcs)
}

fn k44() -> Result<Graph> {
    let arcs: Vec<(usize, usize)> = (0..4).flat_map(|i| (4..8).map(move |j| (i, j))).collect();
    Graph::directed(&["1", "2", "3", "4", "a", "b", "c", "d"], &arcs)
}

/// Looks up an instance by name (case-insensitive).
pub fn gallery(name: &str) -> Result<GalleryInstance> {
    match name.to_ascii_uppercase().as_str() {
        "K33" => bundle("K33", k33()?, Some(K33_FIGURE)),
        "K5" => bundle("K5", complete(5)?, None),
        "D17" => bundle("D17", d17()?, Some(D17_FIGURE)),
        "HEAWOOD" => bundle("HEAWOOD", heawood()?, None),
        "K44" => bundle("K44", k44()?, None),
        _ => Err(Error::UnknownInstance(name.to_string())),
    }
}
