//! Reading instance documents and resolving `--instance` names.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::Value;
use solgroup::graph_games::{CoverJson, GraphJson};
use solgroup::pauli_rep::AssignmentJson;
use solgroup::picture::{PictureJson, SystemJson};
use solgroup::{gallery, incidence_matrix, Graph, IntMatrix, LinearSystem, Modulus, Picture, ZColouring};

pub enum Doc {
    System(SystemJson),
    Graph(GraphJson),
    Picture(PictureJson),
    Cover(CoverJson),
    Assignment(AssignmentJson),
}

impl Doc {
    pub fn kind(&self) -> &'static str {
        match self {
            Doc::System(_) => "system",
            Doc::Graph(_) => "graph",
            Doc::Picture(_) => "picture",
            Doc::Cover(_) => "cover",
            Doc::Assignment(_) => "operator assignment",
        }
    }
}

pub fn read_doc(path: &Path) -> Result<Doc> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("{} is not valid JSON", path.display()))?;
    let has = |k: &str| v.get(k).is_some();
    let doc = if has("pairing") && has("hV") {
        Doc::Picture(serde_json::from_value(v)?)
    } else if has("h") && has("g") && has("phi") {
        Doc::Cover(serde_json::from_value(v)?)
    } else if has("ops") {
        Doc::Assignment(serde_json::from_value(v)?)
    } else if has("vertices") && has("edges") {
        Doc::Graph(serde_json::from_value(v)?)
    } else if has("A") {
        Doc::System(serde_json::from_value(v)?)
    } else {
        bail!("{}: unrecognised document (expected a system, graph, picture, cover or assignment)", path.display());
    };
    Ok(doc)
}

/// A picture file, with its modulus replaced by `p` when given.
pub fn read_picture(path: &Path, p: Option<Modulus>) -> Result<Picture> {
    match read_doc(path)? {
        Doc::Picture(mut j) => {
            if let Some(p) = p {
                j.system.p = p;
            }
            Ok(Picture::from_json(&j)?)
        }
        other => bail!("{} holds a {}, not a picture", path.display(), other.kind()),
    }
}

/// The system a command should act on.
pub struct Target {
    pub system: LinearSystem,
    pub instance: Option<String>,
}

fn colouring(g: &Graph, b: Option<&[i64]>, default: Option<&ZColouring>) -> Result<ZColouring> {
    match (b, default) {
        (Some(b), _) => {
            let c = ZColouring(b.to_vec());
            c.check(g)?;
            Ok(c)
        }
        (None, Some(d)) => Ok(d.clone()),
        (None, None) => Err(anyhow!("a graph needs a colouring: pass --b v1,v2,...")),
    }
}

/// Resolves `FILE | --instance NAME` with `-p` and `--b` overrides. Graphs
/// and instances need `-p` unless `p_default` is given.
pub fn resolve(
    file: Option<&Path>,
    instance: Option<&str>,
    p: Option<Modulus>,
    b: Option<&[i64]>,
    p_default: Option<Modulus>,
) -> Result<Target> {
    let need_p = || p.or(p_default).ok_or_else(|| anyhow!("a modulus is required: pass -p N or -p inf"));
    match (file, instance) {
        (Some(_), Some(_)) => bail!("give either a file or --instance, not both"),
        (None, None) => bail!("give an input file or --instance NAME"),
        (None, Some(name)) => {
            let inst = gallery(name)?;
            let c = colouring(&inst.graph, b, Some(inst.default_colouring()))?;
            Ok(Target { system: inst.system(&c, need_p()?)?, instance: Some(inst.name) })
        }
        (Some(path), None) => match read_doc(path)? {
            Doc::System(j) => {
                let mut j = j;
                if let Some(p) = p {
                    j.p = p;
                }
                if let Some(b) = b {
                    j.b = b.to_vec();
                }
                Ok(Target { system: LinearSystem::from_json(&j)?, instance: None })
            }
            Doc::Graph(j) => {
                let g = Graph::from_json(&j)?.with_default_orientation();
                let c = colouring(&g, b, None)?;
                let system = LinearSystem::new(incidence_matrix(&g)?, c.to_vector(), need_p()?)?;
                Ok(Target { system, instance: None })
            }
            Doc::Picture(j) => {
                let mut s = LinearSystem::from_json(&j.system)?;
                if let Some(p) = p {
                    s = s.with_p(p);
                }
                Ok(Target { system: s, instance: None })
            }
            other => bail!("{} holds a {}; expected a system or graph", path.display(), other.kind()),
        },
    }
}

/// Only the matrix matters (girth and theorem checks).
pub fn resolve_matrix(file: Option<&Path>, instance: Option<&str>) -> Result<IntMatrix> {
    match (file, instance) {
        (Some(_), Some(_)) => bail!("give either a file or --instance, not both"),
        (None, None) => bail!("give an input file or --instance NAME"),
        (None, Some(name)) => Ok(incidence_matrix(&gallery(name)?.graph)?),
        (Some(path), None) => match read_doc(path)? {
            Doc::Graph(j) => Ok(incidence_matrix(&Graph::from_json(&j)?.with_default_orientation())?),
            Doc::System(j) => Ok(LinearSystem::from_json(&j)?.a().clone()),
            Doc::Picture(j) => Ok(LinearSystem::from_json(&j.system)?.a().clone()),
            other => bail!("{} holds a {}; expected a system or graph", path.display(), other.kind()),
        },
    }
}
