//! Text export of graphs and pictures as Graphviz DOT and TikZ.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write;

use crate::graph_games::Graph;
use crate::picture::Picture;

/// Quoted DOT identifier.
pub fn dot_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Escapes LaTeX specials for use in text mode.
pub fn tex_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\textbackslash{}"),
            '{' | '}' | '$' | '&' | '#' | '_' | '%' => {
                out.push('\\');
                out.push(c);
            }
            '^' => out.push_str("\\textasciicircum{}"),
            '~' => out.push_str("\\textasciitilde{}"),
            '\n' | '\r' => out.push(' '),
            c => out.push(c),
        }
    }
    out
}

pub fn graph_to_dot(g: &Graph) -> String {
    let directed = g.is_oriented();
    let (kw, arrow) = if directed { ("digraph", "->") } else { ("graph", "--") };
    let mut s = format!("{kw} G {{\n");
    for (i, name) in g.names().iter().enumerate() {
        let _ = writeln!(s, "  v{i} [label={}];", dot_quote(name));
    }
    for (j, e) in g.edges().iter().enumerate() {
        let (u, v) = match e.src {
            Some(src) => (src, e.other(src)),
            None => e.ends,
        };
        let _ = writeln!(s, "  v{u} {arrow} v{v} [label={}];", dot_quote(&g.edge_names()[j]));
    }
    s.push_str("}\n");
    s
}

/// Vertices show `name: row, k`; edges show `label^a`.
pub fn picture_to_dot(p: &Picture) -> String {
    let mut s = String::from("digraph picture {\n");
    for v in 0..p.num_vertices() {
        let label = format!("{}\nrow {}, k = {}", p.name(v), p.row(v), p.k(v));
        let _ = writeln!(s, "  v{v} [label={}];", dot_quote(&label));
    }
    for e in 0..p.num_edges() {
        let label = format!("x{}^{}", p.label(e), p.a(e));
        let _ = writeln!(s, "  v{} -> v{} [label={}];", p.source(e), p.target(e), dot_quote(&label));
    }
    s.push_str("}\n");
    s
}

fn circle_positions(n: usize, radius: f64) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let t = PI / 2.0 - 2.0 * PI * i as f64 / n.max(1) as f64;
            (radius * t.cos(), radius * t.sin())
        })
        .collect()
}

struct TikzEdge {
    u: usize,
    v: usize,
    directed: bool,
    label: String,
}

fn tikz(nodes: &[String], edges: &[TikzEdge]) -> String {
    let mut s = String::from("\\begin{tikzpicture}[every node/.style={font=\\small}]\n");
    let pos = circle_positions(nodes.len(), 3.0);
    for (i, (label, (x, y))) in nodes.iter().zip(&pos).enumerate() {
        let _ = writeln!(s, "  \\node[draw, circle] (v{i}) at ({x:.3}, {y:.3}) {{{label}}};");
    }
    // Parallel edges fan out by bending.
    let mut seen: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for e in edges {
        let key = (e.u.min(e.v), e.u.max(e.v));
        let k = *seen.entry(key).and_modify(|c| *c += 1).or_insert(0);
        let arrow = if e.directed { "->" } else { "-" };
        let path = if e.u == e.v {
            let side = ["above", "right", "below", "left"][k % 4];
            format!("to[loop {side}]")
        } else if k == 0 {
            "to".to_string()
        } else {
            let dir = if k % 2 == 1 { "left" } else { "right" };
            format!("to[bend {dir}={}]", 12 * k.div_ceil(2))
        };
        let _ = writeln!(
            s,
            "  \\draw[{arrow}] (v{}) {path} node[midway, fill=white, inner sep=1pt] {{{}}} (v{});",
            e.u, e.label, e.v
        );
    }
    s.push_str("\\end{tikzpicture}\n");
    s
}

pub fn graph_to_tikz(g: &Graph) -> String {
    let nodes: Vec<String> = g.names().iter().map(|n| tex_escape(n)).collect();
    let edges: Vec<TikzEdge> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(j, e)| {
            let (u, v) = match e.src {
                Some(src) => (src, e.other(src)),
                None => e.ends,
            };
            TikzEdge { u, v, directed: e.src.is_some(), label: tex_escape(&g.edge_names()[j]) }
        })
        .collect();
    tikz(&nodes, &edges)
}

pub fn picture_to_tikz(p: &Picture) -> String {
    let nodes: Vec<String> = (0..p.num_vertices())
        .map(|v| format!("{}, $k={}$", tex_escape(p.name(v)), p.k(v)))
        .collect();
    let edges: Vec<TikzEdge> = (0..p.num_edges())
        .map(|e| TikzEdge {
            u: p.source(e),
            v: p.target(e),
            directed: true,
            label: format!("$x_{{{}}}^{{{}}}$", p.label(e), p.a(e)),
        })
        .collect();
    tikz(&nodes, &edges)
}
