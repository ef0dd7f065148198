//! Finite metric graphs, their free presentations, and the geometry of the
//! universal covering tree.
//!
//! Every tree-geometric quantity is computed by non-backtracking edge-path
//! reduction: the reduced path of a word is the projection of the unique
//! tree geodesic from the base lift `o` to `o·x`, so its metric length is
//! the displacement `L(x)`.

use std::collections::VecDeque;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::words::Word;

/// Oriented edge identifier. Declared edge `i` yields `2i` (as declared)
/// and `2i + 1` (reversed), so reversal is `id ^ 1`.
pub type EdgeId = usize;

#[inline]
pub fn reverse(e: EdgeId) -> EdgeId {
    e ^ 1
}

/// Edge length together with the literal it was parsed from, so that a
/// graph serializes back to exactly the text that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Length {
    value: f64,
    literal: String,
}

impl Length {
    /// Parses a decimal literal, a fraction `p/q`, or `sqrt(n)`.
    pub fn parse(text: &str) -> std::result::Result<Length, String> {
        let value = if let Some(inner) = text.strip_prefix("sqrt(").and_then(|t| t.strip_suffix(')')) {
            let n: u64 = inner
                .trim()
                .parse()
                .map_err(|_| format!("sqrt argument `{inner}` is not a positive integer"))?;
            if n == 0 {
                return Err("nonpositive length: sqrt(0)".into());
            }
            (n as f64).sqrt()
        } else if let Some((p, q)) = text.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| format!("bad numerator in `{text}`"))?;
            let q: i64 = q.trim().parse().map_err(|_| format!("bad denominator in `{text}`"))?;
            if q == 0 {
                return Err(format!("zero denominator in `{text}`"));
            }
            p as f64 / q as f64
        } else {
            let v: f64 = text.parse().map_err(|_| format!("`{text}` is not a length literal"))?;
            if !v.is_finite() {
                return Err(format!("`{text}` is not a finite length"));
            }
            v
        };
        if value <= 0.0 || value.is_nan() {
            return Err(format!("nonpositive length `{text}`"));
        }
        Ok(Length {
            value,
            literal: text.to_string(),
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn literal(&self) -> &str {
        &self.literal
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub name: String,
    pub source: usize,
    pub target: usize,
    pub length: Length,
}

/// A validated finite connected metric graph with all vertex degrees at
/// least three and first Betti number at least two.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    base: usize,
    outgoing: Vec<Vec<EdgeId>>,
}

impl MetricGraph {
    /// Validates the pieces and assembles a graph.
    pub fn new(vertices: Vec<String>, edges: Vec<Edge>, base: usize) -> Result<MetricGraph> {
        if vertices.is_empty() {
            return Err(Error::Hypothesis("graph has no vertices".into()));
        }
        if base >= vertices.len() {
            return Err(Error::InvalidInput(format!("base vertex index {base} out of range")));
        }
        for e in &edges {
            if e.source >= vertices.len() || e.target >= vertices.len() {
                return Err(Error::InvalidInput(format!("edge `{}` has a dangling vertex reference", e.name)));
            }
            if !(e.length.value > 0.0) {
                return Err(Error::Hypothesis(format!("edge `{}` has nonpositive length", e.name)));
            }
        }
        let mut outgoing = vec![Vec::new(); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            outgoing[e.source].push(2 * i);
            // The reversed orientation leaves the target; a self-loop thus
            // contributes two outgoing edges, i.e. degree 2.
            outgoing[e.target].push(2 * i + 1);
        }
        let graph = MetricGraph {
            vertices,
            edges,
            base,
            outgoing,
        };
        graph.check_hypotheses()?;
        Ok(graph)
    }

    fn check_hypotheses(&self) -> Result<()> {
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([self.base]);
        seen[self.base] = true;
        while let Some(v) = queue.pop_front() {
            for &e in &self.outgoing[v] {
                let w = self.target(e);
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::Hypothesis(format!(
                "graph is disconnected (vertex `{}` unreachable from base)",
                self.vertices[v]
            )));
        }
        for v in 0..n {
            if self.degree(v) < 3 {
                return Err(Error::Hypothesis(format!(
                    "vertex `{}` has degree {} (degree < 3)",
                    self.vertices[v],
                    self.degree(v)
                )));
            }
        }
        if self.rank() < 2 {
            return Err(Error::Hypothesis(format!("rank k = {} < 2", self.rank())));
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Number of unoriented edges.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn oriented_edge_count(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn base(&self) -> usize {
        self.base
    }

    /// Same graph, different base vertex.
    pub fn with_base(&self, base: usize) -> Result<MetricGraph> {
        MetricGraph::new(self.vertices.clone(), self.edges.clone(), base)
    }

    pub fn source(&self, e: EdgeId) -> usize {
        let edge = &self.edges[e / 2];
        if e % 2 == 0 {
            edge.source
        } else {
            edge.target
        }
    }

    pub fn target(&self, e: EdgeId) -> usize {
        self.source(reverse(e))
    }

    pub fn length(&self, e: EdgeId) -> f64 {
        self.edges[e / 2].length.value
    }

    pub fn edge_label(&self, e: EdgeId) -> String {
        let name = &self.edges[e / 2].name;
        if e % 2 == 0 {
            name.clone()
        } else {
            format!("{name}~")
        }
    }

    pub fn outgoing(&self, v: usize) -> &[EdgeId] {
        &self.outgoing[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.outgoing[v].len()
    }

    /// First Betti number `|E| - |V| + 1`.
    pub fn rank(&self) -> usize {
        (self.edges.len() + 1).saturating_sub(self.vertices.len())
    }

    pub fn is_unit_length(&self) -> bool {
        self.edges.iter().all(|e| (e.length.value - 1.0).abs() <= 1e-12)
    }

    /// Common degree if every vertex has the same degree.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.degree(0);
        (0..self.vertex_count()).all(|v| self.degree(v) == d).then_some(d)
    }

    /// Serializes to the line-oriented graph format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            out.push_str(&format!("vertex {v}\n"));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "edge {} {} {} {}\n",
                e.name,
                self.vertices[e.source],
                self.vertices[e.target],
                e.length.literal
            ));
        }
        out.push_str(&format!("base {}\n", self.vertices[self.base]));
        out
    }
}

/// Parses the line-oriented graph format:
/// `vertex <name>`, `edge <name> <u> <v> <len>`, optional `base <name>`,
/// `#` comments. The base defaults to the first declared vertex.
pub fn parse_graph(text: &str) -> Result<MetricGraph> {
    let mut vertices: Vec<String> = Vec::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut base_name: Option<(usize, String)> = None;
    let lookup = |vertices: &[String], name: &str, line: usize| {
        vertices.iter().position(|v| v == name).ok_or_else(|| Error::Syntax {
            line,
            message: format!("dangling vertex reference `{name}`"),
        })
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        match fields.as_slice() {
            ["vertex", name] => {
                if vertices.iter().any(|v| v == name) {
                    return Err(Error::Syntax {
                        line,
                        message: format!("duplicate vertex `{name}`"),
                    });
                }
                vertices.push(name.to_string());
            }
            ["edge", name, u, v, len] => {
                if edges.iter().any(|e| e.name == *name) {
                    return Err(Error::Syntax {
                        line,
                        message: format!("duplicate edge `{name}`"),
                    });
                }
                let source = lookup(&vertices, u, line)?;
                let target = lookup(&vertices, v, line)?;
                let length = Length::parse(len).map_err(|message| {
                    if message.starts_with("nonpositive") {
                        Error::Hypothesis(format!("line {line}: {message}"))
                    } else {
                        Error::Syntax { line, message }
                    }
                })?;
                edges.push(Edge {
                    name: name.to_string(),
                    source,
                    target,
                    length,
                });
            }
            ["base", name] => {
                if base_name.is_some() {
                    return Err(Error::Syntax {
                        line,
                        message: "base declared twice".into(),
                    });
                }
                base_name = Some((line, name.to_string()));
            }
            _ => {
                return Err(Error::Syntax {
                    line,
                    message: format!("unrecognised directive `{content}`"),
                })
            }
        }
    }
    let base = match base_name {
        Some((line, name)) => lookup(&vertices, &name, line)?,
        None => 0,
    };
    MetricGraph::new(vertices, edges, base)
}

/// A consecutive sequence of oriented edges.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgePath {
    edges: Vec<EdgeId>,
    length: f64,
}

impl EdgePath {
    pub fn new(graph: &MetricGraph, edges: Vec<EdgeId>) -> Result<EdgePath> {
        if let Some(&bad) = edges.iter().find(|&&e| e >= graph.oriented_edge_count()) {
            return Err(Error::InvalidInput(format!("unknown oriented edge id {bad}")));
        }
        for pair in edges.windows(2) {
            if graph.target(pair[0]) != graph.source(pair[1]) {
                return Err(Error::InvalidInput(format!(
                    "edge path is not consecutive at {} -> {}",
                    graph.edge_label(pair[0]),
                    graph.edge_label(pair[1])
                )));
            }
        }
        let length = edges.iter().map(|&e| graph.length(e)).sum();
        Ok(EdgePath { edges, length })
    }

    pub fn empty() -> EdgePath {
        EdgePath {
            edges: Vec::new(),
            length: 0.0,
        }
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn metric_length(&self) -> f64 {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        self.edges.windows(2).all(|p| p[1] != reverse(p[0]))
    }

    pub fn reversed(&self) -> EdgePath {
        EdgePath {
            edges: self.edges.iter().rev().map(|&e| reverse(e)).collect(),
            length: self.length,
        }
    }
}

/// Stack-based free reduction of edge sequences. Each pushed edge either
/// cancels the top of the stack or is appended.
#[derive(Debug, Clone, Default)]
pub(crate) struct ReducingPath {
    stack: Vec<EdgeId>,
}

impl ReducingPath {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub(crate) fn push(&mut self, e: EdgeId) {
        if self.stack.last() == Some(&reverse(e)) {
            self.stack.pop();
        } else {
            self.stack.push(e);
        }
    }

    pub(crate) fn extend(&mut self, edges: &[EdgeId]) {
        for &e in edges {
            self.push(e);
        }
    }

    pub(crate) fn edges(&self) -> &[EdgeId] {
        &self.stack
    }

    pub(crate) fn length(&self, graph: &MetricGraph) -> f64 {
        self.stack.iter().map(|&e| graph.length(e)).sum()
    }
}

/// Cancels adjacent `(e, ē)` pairs until none remain.
pub fn reduce_edge_path(graph: &MetricGraph, path: &EdgePath) -> Result<EdgePath> {
    // revalidates consecutiveness; the constructor is the only guard
    let checked = EdgePath::new(graph, path.edges.clone())?;
    let mut red = ReducingPath::new();
    red.extend(checked.edges());
    EdgePath::new(graph, red.stack)
}

/// Free presentation of `π₁(G, o)`: a breadth-first spanning tree and one
/// reduced closed loop at the base per non-tree edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Presentation {
    graph: MetricGraph,
    tree_edges: Vec<bool>,
    generator_edges: Vec<usize>,
    /// Indexed by letter code: `2i` is the loop of `a_i`, `2i + 1` its reversal.
    loops: Vec<EdgePath>,
}

pub fn build_presentation(graph: &MetricGraph) -> Presentation {
    let n = graph.vertex_count();
    let mut tree_edges = vec![false; graph.edge_count()];
    // parent[v] = oriented tree edge entering v from its parent
    let mut parent: Vec<Option<EdgeId>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([graph.base()]);
    seen[graph.base()] = true;
    while let Some(v) = queue.pop_front() {
        // outgoing lists are built in declaration order, so scanning them
        // breaks ties by declaration order
        let mut incident: Vec<EdgeId> = graph.outgoing(v).to_vec();
        incident.sort_by_key(|&e| (e / 2, e % 2));
        for e in incident {
            let w = graph.target(e);
            if !seen[w] {
                seen[w] = true;
                tree_edges[e / 2] = true;
                parent[w] = Some(e);
                queue.push_back(w);
            }
        }
    }
    let tree_path_from_base = |v: usize| -> Vec<EdgeId> {
        let mut rev = Vec::new();
        let mut cur = v;
        while let Some(e) = parent[cur] {
            rev.push(e);
            cur = graph.source(e);
        }
        rev.reverse();
        rev
    };
    let generator_edges: Vec<usize> = (0..graph.edge_count()).filter(|&i| !tree_edges[i]).collect();
    let mut loops = Vec::with_capacity(2 * generator_edges.len());
    for &i in &generator_edges {
        let f = 2 * i;
        let mut red = ReducingPath::new();
        red.extend(&tree_path_from_base(graph.source(f)));
        red.push(f);
        let back: Vec<EdgeId> = tree_path_from_base(graph.target(f))
            .into_iter()
            .rev()
            .map(reverse)
            .collect();
        red.extend(&back);
        let forward = EdgePath::new(graph, red.stack).expect("generator loop is consecutive");
        let backward = forward.reversed();
        loops.push(forward);
        loops.push(backward);
    }
    Presentation {
        graph: graph.clone(),
        tree_edges,
        generator_edges,
        loops,
    }
}

impl Presentation {
    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn rank(&self) -> usize {
        self.generator_edges.len()
    }

    pub fn tree_edges(&self) -> Vec<usize> {
        (0..self.tree_edges.len()).filter(|&i| self.tree_edges[i]).collect()
    }

    /// Declared edge index crossed by generator `i`.
    pub fn generator_edge(&self, i: usize) -> usize {
        self.generator_edges[i]
    }

    /// Loop of the letter with the given code (`2i` for `a_i`, `2i+1` for its inverse).
    pub fn letter_loop(&self, code: usize) -> &EdgePath {
        &self.loops[code]
    }

    pub fn generator_loops(&self) -> Vec<&EdgePath> {
        self.loops.iter().step_by(2).collect()
    }

    /// `max_i L(a_i)`.
    pub fn max_generator_length(&self) -> f64 {
        self.loops.iter().map(EdgePath::metric_length).fold(0.0, f64::max)
    }

    pub(crate) fn word_path(&self, x: &Word) -> ReducingPath {
        let mut red = ReducingPath::new();
        for l in x.letters() {
            red.extend(self.loops[l.code()].edges());
        }
        red
    }

    /// Reduced edge path of a word.
    pub fn reduced_path(&self, x: &Word) -> EdgePath {
        let red = self.word_path(x);
        EdgePath::new(&self.graph, red.stack).expect("concatenated loops are consecutive")
    }
}

/// `L(x) = d_T(o, o·x)`: metric length of the reduced concatenation of the
/// generator loops spelled by `x`.
pub fn displacement(pres: &Presentation, x: &Word) -> f64 {
    pres.word_path(x).length(&pres.graph)
}

/// Length of the closed geodesic freely homotopic to the cyclically reduced
/// word `g`.
pub fn geodesic_length(pres: &Presentation, g: &Word) -> Result<f64> {
    if g.is_identity() || !g.is_cyclically_reduced() {
        return Err(Error::InvalidInput(format!("word `{g}` is not a nonempty cyclically reduced word")));
    }
    let path = pres.word_path(g);
    let edges = path.edges();
    let (mut lo, mut hi) = (0usize, edges.len());
    while hi - lo >= 2 && edges[lo] == reverse(edges[hi - 1]) {
        lo += 1;
        hi -= 1;
    }
    Ok(edges[lo..hi].iter().map(|&e| pres.graph.length(e)).sum())
}

/// Total edge length inside the open ball `B(o, T)` of the universal cover.
///
/// Each lifted edge entered at distance `d < T` contributes
/// `min(length, T - d)`. Work is capped at `budget` lifted edges; exceeding
/// it is an error, never a truncation.
pub fn ball_volume(pres: &Presentation, radius: f64, budget: u64) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!("ball radius must be positive, got {radius}")));
    }
    let graph = &pres.graph;
    let initial: Vec<EdgeId> = graph.outgoing(graph.base()).to_vec();
    let per_direction: Vec<Result<(f64, u64)>> = initial
        .par_iter()
        .map(|&first| volume_from(graph, first, radius, budget))
        .collect();
    let mut total = 0.0;
    let mut visited = 0u64;
    for r in per_direction {
        let (v, n) = r?;
        total += v;
        visited += n;
        if visited > budget {
            return Err(budget_error(radius, budget));
        }
    }
    Ok(total)
}

fn budget_error(radius: f64, budget: u64) -> Error {
    Error::Resource(format!("ball of radius {radius} needs more than {budget} lifted edges"))
}

fn volume_from(graph: &MetricGraph, first: EdgeId, radius: f64, budget: u64) -> Result<(f64, u64)> {
    let mut total = 0.0;
    let mut visited = 0u64;
    // (edge, entry distance)
    let mut stack = vec![(first, 0.0f64)];
    while let Some((e, d)) = stack.pop() {
        visited += 1;
        if visited > budget {
            return Err(budget_error(radius, budget));
        }
        let len = graph.length(e);
        total += len.min(radius - d);
        let exit = d + len;
        if exit < radius {
            let v = graph.target(e);
            for &next in graph.outgoing(v).iter().rev() {
                if next != reverse(e) {
                    stack.push((next, exit));
                }
            }
        }
    }
    Ok((total, visited))
}

impl fmt::Display for EdgePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.edges.iter().map(|e| e.to_string()).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}
