//! Directed signed graph model, edge-list IO, sign split and SCCs.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use petgraph::graphmap::DiGraphMap;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("no edges")]
    NoEdges,
    #[error("line {line}: malformed edge line {text:?}")]
    MalformedLine { line: usize, text: String },
    #[error("line {line}: sign must be 1 or -1, got {sign}")]
    InvalidSign { line: usize, sign: String },
    #[error("conflicting signs for edge ({u}, {v})")]
    ConflictingEdge { u: usize, v: usize },
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("graph must have at least one node")]
    Empty,
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Immutable directed graph with edge signs in {-1, +1}.
///
/// Both the by-source and by-destination adjacency lists are kept sorted, so
/// iteration order is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedSignedGraph {
    n: usize,
    out_adj: Vec<Vec<(usize, i8)>>,
    in_adj: Vec<Vec<(usize, i8)>>,
    edge_count: usize,
}

impl DirectedSignedGraph {
    /// Builds a graph from `(source, target, sign)` triples. Identical
    /// duplicates collapse; duplicates with different signs are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize, i8)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut map: BTreeMap<(usize, usize), i8> = BTreeMap::new();
        for &(u, v, s) in edges {
            for node in [u, v] {
                if node >= n {
                    return Err(GraphError::NodeOutOfRange { node, n });
                }
            }
            if s != 1 && s != -1 {
                return Err(GraphError::InvalidSign { line: 0, sign: s.to_string() });
            }
            if let Some(&prev) = map.get(&(u, v)) {
                if prev != s {
                    return Err(GraphError::ConflictingEdge { u, v });
                }
            }
            map.insert((u, v), s);
        }
        Ok(Self::from_sorted_map(n, &map))
    }

    fn from_sorted_map(n: usize, map: &BTreeMap<(usize, usize), i8>) -> Self {
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for (&(u, v), &s) in map {
            out_adj[u].push((v, s));
            in_adj[v].push((u, s));
        }
        Self { n, out_adj, in_adj, edge_count: map.len() }
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Out-neighbours of `u` with signs, sorted by target.
    #[inline]
    pub fn out_edges(&self, u: usize) -> &[(usize, i8)] {
        &self.out_adj[u]
    }

    /// In-neighbours of `v` with signs, sorted by source.
    #[inline]
    pub fn in_edges(&self, v: usize) -> &[(usize, i8)] {
        &self.in_adj[v]
    }

    /// Entry `A[u][v]` in {-1, 0, 1}.
    pub fn sign(&self, u: usize, v: usize) -> i8 {
        self.out_adj[u]
            .binary_search_by_key(&v, |&(t, _)| t)
            .map(|i| self.out_adj[u][i].1)
            .unwrap_or(0)
    }

    /// All edges sorted by `(source, target)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, i8)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().map(move |&(v, s)| (u, v, s)))
    }

    pub fn to_dense<T: Scalar>(&self) -> DenseMatrix<T> {
        let mut a = DenseMatrix::zeros(self.n, self.n);
        for (u, v, s) in self.edges() {
            a[(u, v)] = if s > 0 { T::one() } else { -T::one() };
        }
        a
    }

    /// `y = A x`.
    pub fn apply<T: Scalar>(&self, x: &[T], y: &mut [T]) {
        for (u, row) in self.out_adj.iter().enumerate() {
            let mut acc = T::zero();
            for &(v, s) in row {
                if s > 0 {
                    acc += x[v];
                } else {
                    acc -= x[v];
                }
            }
            y[u] = acc;
        }
    }

    /// Induced subgraph on `nodes`, relabelled to `0..nodes.len()` in the given order.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<Self, GraphError> {
        let mut pos = HashMap::with_capacity(nodes.len());
        for (i, &u) in nodes.iter().enumerate() {
            if u >= self.n {
                return Err(GraphError::NodeOutOfRange { node: u, n: self.n });
            }
            pos.insert(u, i);
        }
        let mut map = BTreeMap::new();
        for (i, &u) in nodes.iter().enumerate() {
            for &(v, s) in &self.out_adj[u] {
                if let Some(&j) = pos.get(&v) {
                    map.insert((i, j), s);
                }
            }
        }
        if nodes.is_empty() {
            return Err(GraphError::Empty);
        }
        Ok(Self::from_sorted_map(nodes.len(), &map))
    }
}

/// Positive and negative layers of a signed adjacency matrix.
///
/// Degrees are totals (in + out) on each layer. Directed out/in degrees are
/// kept as well for the directed null model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignSplit {
    pub n: usize,
    /// Entries equal to +1, as `(u, v)` pairs.
    pub positive_part: Vec<(usize, usize)>,
    /// Entries equal to -1, as `(u, v)` pairs.
    pub negative_part: Vec<(usize, usize)>,
    pub positive_degrees: Vec<usize>,
    pub negative_degrees: Vec<usize>,
    pub positive_out: Vec<usize>,
    pub positive_in: Vec<usize>,
    pub negative_out: Vec<usize>,
    pub negative_in: Vec<usize>,
    pub m_p: usize,
    pub m_n: usize,
}

impl SignSplit {
    /// `P[u][v]` in {0, 1}.
    pub fn p(&self, u: usize, v: usize) -> i8 {
        i8::from(self.positive_part.binary_search(&(u, v)).is_ok())
    }

    /// `N[u][v]` in {-1, 0}.
    pub fn nn(&self, u: usize, v: usize) -> i8 {
        -i8::from(self.negative_part.binary_search(&(u, v)).is_ok())
    }
}

pub fn sign_split(g: &DirectedSignedGraph) -> SignSplit {
    let n = g.node_count();
    let mut split = SignSplit {
        n,
        positive_part: Vec::new(),
        negative_part: Vec::new(),
        positive_degrees: vec![0; n],
        negative_degrees: vec![0; n],
        positive_out: vec![0; n],
        positive_in: vec![0; n],
        negative_out: vec![0; n],
        negative_in: vec![0; n],
        m_p: 0,
        m_n: 0,
    };
    for (u, v, s) in g.edges() {
        if s > 0 {
            split.positive_part.push((u, v));
            split.positive_out[u] += 1;
            split.positive_in[v] += 1;
        } else {
            split.negative_part.push((u, v));
            split.negative_out[u] += 1;
            split.negative_in[v] += 1;
        }
    }
    for i in 0..n {
        split.positive_degrees[i] = split.positive_out[i] + split.positive_in[i];
        split.negative_degrees[i] = split.negative_out[i] + split.negative_in[i];
    }
    split.m_p = split.positive_part.len();
    split.m_n = split.negative_part.len();
    split
}

/// Strongly connected components of the unsigned support. Each component is
/// sorted ascending and components are ordered by their smallest node.
pub fn strongly_connected_components(g: &DirectedSignedGraph) -> Vec<Vec<usize>> {
    let mut pg: DiGraphMap<usize, ()> = DiGraphMap::with_capacity(g.node_count(), g.edge_count());
    for u in 0..g.node_count() {
        pg.add_node(u);
    }
    for (u, v, _) in g.edges() {
        pg.add_edge(u, v, ());
    }
    let mut comps = petgraph::algo::tarjan_scc(&pg);
    for c in &mut comps {
        c.sort_unstable();
    }
    comps.sort_unstable_by_key(|c| c[0]);
    comps
}

pub fn is_strongly_connected(g: &DirectedSignedGraph) -> bool {
    strongly_connected_components(g).len() == 1
}

/// Maps external string ids to dense node ids in first-seen order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IdDictionary {
    pub names: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl IdDictionary {
    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), i);
        i
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

struct RawEdge<'a> {
    line: usize,
    u: &'a str,
    v: &'a str,
    sign: i8,
}

fn parse_lines(text: &str) -> Result<(Vec<RawEdge<'_>>, Option<usize>), GraphError> {
    let mut edges = Vec::new();
    let mut node_hint = None;
    let mut seen_data = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(n) = comment.trim().strip_prefix("nodes:") {
                node_hint = n.trim().parse().ok();
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(GraphError::MalformedLine { line, text: raw.to_owned() });
        }
        let sign = match fields[2].parse::<i64>() {
            Ok(1) => 1,
            Ok(-1) => -1,
            Ok(_) => return Err(GraphError::InvalidSign { line, sign: fields[2].to_owned() }),
            Err(_) if !seen_data && fields[2].parse::<f64>().is_err() => {
                // optional header line
                seen_data = true;
                continue;
            }
            Err(_) => return Err(GraphError::InvalidSign { line, sign: fields[2].to_owned() }),
        };
        seen_data = true;
        edges.push(RawEdge { line, u: fields[0], v: fields[1], sign });
    }
    if edges.is_empty() {
        return Err(GraphError::NoEdges);
    }
    Ok((edges, node_hint))
}

fn assemble(
    n_min: usize,
    edges: impl IntoIterator<Item = (usize, usize, usize, i8)>,
) -> Result<DirectedSignedGraph, GraphError> {
    let mut map = BTreeMap::new();
    let mut n = n_min;
    for (_, u, v, s) in edges {
        if let Some(&prev) = map.get(&(u, v)) {
            if prev != s {
                return Err(GraphError::ConflictingEdge { u, v });
            }
        }
        map.insert((u, v), s);
        n = n.max(u + 1).max(v + 1);
    }
    Ok(DirectedSignedGraph::from_sorted_map(n, &map))
}

/// Parses edge-list text with integer node ids. `n` is one more than the
/// largest id, or the `# nodes: N` hint if that is larger.
pub fn parse_edge_list(text: &str) -> Result<DirectedSignedGraph, GraphError> {
    let (raw, hint) = parse_lines(text)?;
    let mut parsed = Vec::with_capacity(raw.len());
    for e in raw {
        let u = e.u.parse::<usize>();
        let v = e.v.parse::<usize>();
        match (u, v) {
            (Ok(u), Ok(v)) => parsed.push((e.line, u, v, e.sign)),
            _ => return Err(GraphError::MalformedLine { line: e.line, text: format!("{} {} {}", e.u, e.v, e.sign) }),
        }
    }
    assemble(hint.unwrap_or(0), parsed)
}

/// Parses edge-list text with arbitrary string node ids.
pub fn parse_edge_list_with_ids(text: &str) -> Result<(DirectedSignedGraph, IdDictionary), GraphError> {
    let (raw, _) = parse_lines(text)?;
    let mut dict = IdDictionary::default();
    let parsed: Vec<_> = raw
        .iter()
        .map(|e| {
            let u = dict.intern(e.u);
            let v = dict.intern(e.v);
            (e.line, u, v, e.sign)
        })
        .collect();
    let g = assemble(dict.len(), parsed)?;
    Ok((g, dict))
}

fn read(path: &Path) -> Result<String, GraphError> {
    fs::read_to_string(path).map_err(|source| GraphError::Io { path: path.display().to_string(), source })
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<DirectedSignedGraph, GraphError> {
    parse_edge_list(&read(path.as_ref())?)
}

pub fn load_edge_list_with_ids(path: impl AsRef<Path>) -> Result<(DirectedSignedGraph, IdDictionary), GraphError> {
    parse_edge_list_with_ids(&read(path.as_ref())?)
}

/// Serialises edges sorted by `(u, v)`, preceded by a node-count comment so
/// isolated trailing nodes survive a round trip.
pub fn format_edge_list(g: &DirectedSignedGraph) -> String {
    let mut out = String::with_capacity(g.edge_count() * 12 + 32);
    let _ = writeln!(out, "# nodes: {}", g.node_count());
    for (u, v, s) in g.edges() {
        let _ = writeln!(out, "{u}\t{v}\t{s}");
    }
    out
}

pub fn write_edge_list(g: &DirectedSignedGraph, path: impl AsRef<Path>) -> Result<(), GraphError> {
    let path = path.as_ref();
    fs::write(path, format_edge_list(g)).map_err(|source| GraphError::Io { path: path.display().to_string(), source })
}
