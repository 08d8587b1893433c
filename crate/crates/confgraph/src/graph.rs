//! Immutable undirected communication graph.
//!
//! Nodes are individuals, edges are correspondent pairs. The graph is simple
//! (no self-loops, no multi-edges) and its structure is treated as public;
//! only edge properties are private. The structural quantities that bound
//! sensitivity, `D_max` and `N_max`, are computed once at construction.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a node within one [`OrgGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

/// Index of an edge within one [`OrgGraph`]. An edge is an unordered pair of
/// distinct nodes; `(u, v)` and `(v, u)` name the same edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub u32);

/// Structural summary of a graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub node_count: usize,
    pub edge_count: usize,
    /// Maximum node degree.
    pub d_max: usize,
    /// Maximum edge-neighborhood cardinality; always <= 2 * d_max - 1.
    pub n_max: usize,
}

#[derive(Debug, Clone)]
pub struct OrgGraph {
    nodes: Vec<String>,
    node_index: HashMap<String, u32>,
    /// Canonical (min, max) node-index pairs, sorted.
    edges: Vec<(u32, u32)>,
    edge_index: HashMap<(u32, u32), u32>,
    /// Node -> incident edge ids, each sorted ascending.
    incident: Vec<Vec<u32>>,
    d_max: usize,
    n_max: usize,
}

/// Normalization applied to every node identifier before dedup: trim
/// whitespace and case-fold. Email addresses vary in case across a corpus.
pub fn normalize_node(raw: &str) -> String {
    raw.trim().to_lowercase()
}

/// Build a simple undirected graph from raw node-id pairs.
///
/// Pairs may repeat and may appear in either orientation; they collapse to a
/// single edge. A self-loop pair is an error, as is an empty input.
pub fn build_graph<S: AsRef<str>>(pairs: &[(S, S)]) -> Result<OrgGraph> {
    let mut normalized: Vec<(String, String)> = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        let a = normalize_node(a.as_ref());
        let b = normalize_node(b.as_ref());
        if a == b {
            return Err(Error::SelfLoop(a));
        }
        normalized.push(if a < b { (a, b) } else { (b, a) });
    }
    if normalized.is_empty() {
        return Err(Error::EmptyGraph);
    }

    let mut names: Vec<String> = normalized
        .iter()
        .flat_map(|(a, b)| [a.clone(), b.clone()])
        .collect();
    names.sort_unstable();
    names.dedup();
    let node_index: HashMap<String, u32> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), i as u32))
        .collect();

    let mut edges: Vec<(u32, u32)> = normalized
        .iter()
        .map(|(a, b)| (node_index[a], node_index[b]))
        .collect();
    edges.sort_unstable();
    edges.dedup();

    let edge_index: HashMap<(u32, u32), u32> = edges
        .iter()
        .enumerate()
        .map(|(i, &e)| (e, i as u32))
        .collect();

    let mut incident: Vec<Vec<u32>> = vec![Vec::new(); names.len()];
    for (i, &(u, v)) in edges.iter().enumerate() {
        incident[u as usize].push(i as u32);
        incident[v as usize].push(i as u32);
    }

    let d_max = incident.iter().map(Vec::len).max().unwrap_or(0);
    let n_max = edges
        .iter()
        .map(|&(u, v)| incident[u as usize].len() + incident[v as usize].len() - 2)
        .max()
        .unwrap_or(0);

    Ok(OrgGraph {
        nodes: names,
        node_index,
        edges,
        edge_index,
        incident,
        d_max,
        n_max,
    })
}

impl OrgGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_name(&self, n: NodeId) -> &str {
        &self.nodes[n.0 as usize]
    }

    pub fn node(&self, name: &str) -> Option<NodeId> {
        self.node_index.get(&normalize_node(name)).map(|&i| NodeId(i))
    }

    /// Look up the edge between two named nodes, in either orientation.
    pub fn edge(&self, a: &str, b: &str) -> Option<EdgeId> {
        let u = *self.node_index.get(&normalize_node(a))?;
        let v = *self.node_index.get(&normalize_node(b))?;
        let key = if u < v { (u, v) } else { (v, u) };
        self.edge_index.get(&key).map(|&i| EdgeId(i))
    }

    /// As [`edge`](Self::edge) but an unknown pair is an error.
    pub fn require_edge(&self, a: &str, b: &str) -> Result<EdgeId> {
        self.edge(a, b)
            .ok_or_else(|| Error::UnknownEdge(normalize_node(a), normalize_node(b)))
    }

    pub fn endpoints(&self, e: EdgeId) -> (NodeId, NodeId) {
        let (u, v) = self.edges[e.0 as usize];
        (NodeId(u), NodeId(v))
    }

    pub fn endpoint_names(&self, e: EdgeId) -> (&str, &str) {
        let (u, v) = self.edges[e.0 as usize];
        (&self.nodes[u as usize], &self.nodes[v as usize])
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len() as u32).map(EdgeId)
    }

    pub fn degree(&self, n: NodeId) -> usize {
        self.incident[n.0 as usize].len()
    }

    pub fn incident_edges(&self, n: NodeId) -> impl Iterator<Item = EdgeId> + '_ {
        self.incident[n.0 as usize].iter().map(|&i| EdgeId(i))
    }

    /// Number of edges adjacent to `e`: deg(u) + deg(v) - 2.
    pub fn edge_degree(&self, e: EdgeId) -> usize {
        let (u, v) = self.edges[e.0 as usize];
        self.incident[u as usize].len() + self.incident[v as usize].len() - 2
    }

    /// All edges sharing an endpoint with `e`, excluding `e` itself.
    /// Sorted ascending by edge id.
    pub fn neighborhood(&self, e: EdgeId) -> Vec<EdgeId> {
        let (u, v) = self.edges[e.0 as usize];
        let mut out: Vec<u32> = self.incident[u as usize]
            .iter()
            .chain(self.incident[v as usize].iter())
            .copied()
            .filter(|&i| i != e.0)
            .collect();
        out.sort_unstable();
        out.dedup();
        out.into_iter().map(EdgeId).collect()
    }

    pub fn degree_stats(&self) -> DegreeStats {
        DegreeStats {
            node_count: self.nodes.len(),
            edge_count: self.edges.len(),
            d_max: self.d_max,
            n_max: self.n_max,
        }
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// All edges as canonical name pairs, in deterministic order.
    pub fn edge_name_pairs(&self) -> Vec<(String, String)> {
        self.edges
            .iter()
            .map(|&(u, v)| (self.nodes[u as usize].clone(), self.nodes[v as usize].clone()))
            .collect()
    }

    /// Write the edge list as CSV with header `node_a,node_b`.
    pub fn write_edge_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["node_a", "node_b"])?;
        for &(u, v) in &self.edges {
            wtr.write_record([&self.nodes[u as usize], &self.nodes[v as usize]])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_edge_csv_file(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_edge_csv(std::io::BufWriter::new(f))
    }
}

/// Read an edge-list CSV (`node_a,node_b` header required) and build a graph.
pub fn read_edge_csv<R: Read>(r: R) -> Result<OrgGraph> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.len() < 2 || &headers[0] != "node_a" || &headers[1] != "node_b" {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header node_a,node_b, got {:?}", headers),
        });
    }
    let mut pairs = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() < 2 {
            return Err(Error::Parse {
                line: i + 2,
                message: "row has fewer than two fields".into(),
            });
        }
        pairs.push((rec[0].to_string(), rec[1].to_string()));
    }
    build_graph(&pairs)
}

pub fn read_edge_csv_file(path: &Path) -> Result<OrgGraph> {
    let f = std::fs::File::open(path)?;
    read_edge_csv(std::io::BufReader::new(f))
}
