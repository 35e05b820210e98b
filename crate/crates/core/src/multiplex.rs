//! Multiplex data model and its text format.
//!
//! A multiplex is `N` nodes replicated over `L` layers. Each layer is an
//! undirected, unweighted simple graph over the shared node set. Node-layer
//! pairs are flattened layer-major: `(node, layer) -> layer * N + node`.
//!
//! Text format:
//!
//! ```text
//! layers=2 nodes=3
//! # comment
//! 0 0 1
//! 1 1 2
//! ```
//!
//! Each edge line is `<layer> <u> <v>` with 0-based indices. Either endpoint
//! order is accepted on read; `u < v` is written.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{LartError, Result};

/// A node replica `v_i^k`: node `node` in layer `layer`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeLayer {
    pub node: usize,
    pub layer: usize,
}

impl NodeLayer {
    pub fn new(node: usize, layer: usize) -> Self {
        NodeLayer { node, layer }
    }

    /// Layer-major flat index.
    #[inline]
    pub fn flat(self, num_nodes: usize) -> usize {
        self.layer * num_nodes + self.node
    }

    #[inline]
    pub fn from_flat(index: usize, num_nodes: usize) -> Self {
        NodeLayer {
            node: index % num_nodes,
            layer: index / num_nodes,
        }
    }
}

/// Undirected, unweighted multiplex network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multiplex {
    num_nodes: usize,
    num_layers: usize,
    /// `adjacency[layer][node]` is the sorted neighbor list of `node` in `layer`.
    adjacency: Vec<Vec<Vec<usize>>>,
}

impl Multiplex {
    /// Builds a multiplex from `(layer, u, v)` triples.
    ///
    /// Rejects self-loops, out-of-range indices and duplicate edges (in
    /// either orientation).
    pub fn from_edges(
        num_nodes: usize,
        num_layers: usize,
        edges: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Result<Self> {
        let mut builder = MultiplexBuilder::new(num_nodes, num_layers)?;
        for (layer, u, v) in edges {
            builder.add_edge(layer, u, v)?;
        }
        Ok(builder.build())
    }

    /// A multiplex with no edges.
    pub fn empty(num_nodes: usize, num_layers: usize) -> Result<Self> {
        Ok(MultiplexBuilder::new(num_nodes, num_layers)?.build())
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    /// Number of node-layer pairs, `N * L`.
    pub fn size(&self) -> usize {
        self.num_nodes * self.num_layers
    }

    /// Sorted neighbors of `node` in `layer`.
    pub fn neighbors(&self, layer: usize, node: usize) -> &[usize] {
        &self.adjacency[layer][node]
    }

    pub fn degree(&self, layer: usize, node: usize) -> usize {
        self.adjacency[layer][node].len()
    }

    pub fn has_edge(&self, layer: usize, u: usize, v: usize) -> bool {
        self.adjacency[layer][u].binary_search(&v).is_ok()
    }

    pub fn num_edges(&self, layer: usize) -> usize {
        self.adjacency[layer].iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges of one layer as `(u, v)` with `u < v`, in lexicographic order.
    pub fn layer_edges(&self, layer: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency[layer]
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Number of neighbors node `node` has in common between layers `k` and `l`.
    ///
    /// This is the locally adaptive inter-layer weight `ω_{i;kl}`.
    pub fn interlayer_weight(&self, node: usize, k: usize, l: usize) -> Result<usize> {
        if node >= self.num_nodes {
            return Err(LartError::InvalidArgument(format!(
                "node {node} out of range (N = {})",
                self.num_nodes
            )));
        }
        for layer in [k, l] {
            if layer >= self.num_layers {
                return Err(LartError::InvalidArgument(format!(
                    "layer {layer} out of range (L = {})",
                    self.num_layers
                )));
            }
        }
        if k == l {
            return Err(LartError::InvalidArgument(
                "inter-layer weight needs two distinct layers".into(),
            ));
        }
        Ok(sorted_intersection_len(
            &self.adjacency[k][node],
            &self.adjacency[l][node],
        ))
    }

    /// Parses the text format from a string. `origin` is only used in error messages.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut builder: Option<MultiplexBuilder> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some(b) = builder.as_mut() else {
                let (layers, nodes) = parse_header(line)
                    .map_err(|msg| LartError::parse(origin, line_no, msg))?;
                builder = Some(
                    MultiplexBuilder::new(nodes, layers)
                        .map_err(|e| LartError::parse(origin, line_no, e.to_string()))?,
                );
                continue;
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() == 4 {
                return Err(LartError::parse(
                    origin,
                    line_no,
                    "weighted edges are not supported",
                ));
            }
            if fields.len() != 3 {
                return Err(LartError::parse(
                    origin,
                    line_no,
                    format!("expected `<layer> <u> <v>`, got `{line}`"),
                ));
            }
            let mut nums = [0usize; 3];
            for (slot, field) in nums.iter_mut().zip(&fields) {
                *slot = field.parse().map_err(|_| {
                    LartError::parse(origin, line_no, format!("not an index: `{field}`"))
                })?;
            }
            b.add_edge(nums[0], nums[1], nums[2])
                .map_err(|e| LartError::parse(origin, line_no, e.to_string()))?;
        }
        builder
            .map(MultiplexBuilder::build)
            .ok_or_else(|| LartError::parse(origin, 0, "missing `layers=<L> nodes=<N>` header"))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| LartError::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("layers={} nodes={}\n", self.num_layers, self.num_nodes);
        for layer in 0..self.num_layers {
            for (u, v) in self.layer_edges(layer) {
                let _ = writeln!(out, "{layer} {u} {v}");
            }
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| LartError::io(path, e))
    }
}

fn parse_header(line: &str) -> std::result::Result<(usize, usize), String> {
    let mut layers = None;
    let mut nodes = None;
    for token in line.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| format!("malformed header token `{token}`"))?;
        let value: usize = value
            .parse()
            .map_err(|_| format!("header value `{value}` is not a count"))?;
        match key {
            "layers" => layers = Some(value),
            "nodes" => nodes = Some(value),
            _ => return Err(format!("unknown header key `{key}`")),
        }
    }
    match (layers, nodes) {
        (Some(l), Some(n)) => Ok((l, n)),
        _ => Err("header must be `layers=<L> nodes=<N>`".into()),
    }
}

pub(crate) fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Incremental constructor that validates every edge as it is added.
#[derive(Debug, Clone)]
pub struct MultiplexBuilder {
    num_nodes: usize,
    num_layers: usize,
    edges: Vec<BTreeSet<(usize, usize)>>,
}

impl MultiplexBuilder {
    pub fn new(num_nodes: usize, num_layers: usize) -> Result<Self> {
        if num_nodes == 0 || num_layers == 0 {
            return Err(LartError::InvalidArgument(format!(
                "a multiplex needs at least one node and one layer (got N = {num_nodes}, L = {num_layers})"
            )));
        }
        Ok(MultiplexBuilder {
            num_nodes,
            num_layers,
            edges: vec![BTreeSet::new(); num_layers],
        })
    }

    pub fn add_edge(&mut self, layer: usize, u: usize, v: usize) -> Result<()> {
        if layer >= self.num_layers {
            return Err(LartError::InvalidArgument(format!(
                "layer {layer} out of range (L = {})",
                self.num_layers
            )));
        }
        if u >= self.num_nodes || v >= self.num_nodes {
            return Err(LartError::InvalidArgument(format!(
                "edge ({u}, {v}) has an endpoint out of range (N = {})",
                self.num_nodes
            )));
        }
        if u == v {
            return Err(LartError::InvalidArgument(format!(
                "self-loop on node {u} in layer {layer}"
            )));
        }
        if !self.edges[layer].insert((u.min(v), u.max(v))) {
            return Err(LartError::InvalidArgument(format!(
                "duplicate edge ({u}, {v}) in layer {layer}"
            )));
        }
        Ok(())
    }

    /// Adds the edge unless it is already present. Returns whether it was new.
    pub fn insert_edge(&mut self, layer: usize, u: usize, v: usize) -> Result<bool> {
        match self.add_edge(layer, u, v) {
            Ok(()) => Ok(true),
            Err(_) if u != v && self.edges[layer].contains(&(u.min(v), u.max(v))) => Ok(false),
            Err(e) => Err(e),
        }
    }

    pub fn build(self) -> Multiplex {
        let adjacency = self
            .edges
            .iter()
            .map(|set| {
                let mut adj = vec![Vec::new(); self.num_nodes];
                for &(u, v) in set {
                    adj[u].push(v);
                    adj[v].push(u);
                }
                for nbrs in &mut adj {
                    nbrs.sort_unstable();
                }
                adj
            })
            .collect();
        Multiplex {
            num_nodes: self.num_nodes,
            num_layers: self.num_layers,
            adjacency,
        }
    }
}
