//! Undirected simple graphs, graph6 interchange, cubic-graph enumeration,
//! exact isomorphism testing and brute-force MaxCut ground truth.

mod enumerate;
mod graph6;
mod iso;
mod maxcut;

pub use enumerate::{enumerate_cubic_graphs, MAX_ENUMERATION_VERTICES};
pub use graph6::{emit_graph6, parse_graph6, parse_graph6_file};
pub use iso::{are_isomorphic, canonical_form, canonical_graph6};
pub use maxcut::{exact_maxcut, format_bitstring, MaxCutSolution, MAX_EXHAUSTIVE_VERTICES};

use crate::error::{Error, Result};

/// Undirected simple graph on vertices `0..n_vertices`.
///
/// Edges are stored as `(i, j)` with `i < j`, sorted lexicographically and
/// free of duplicates. Per-edge quantities (e.g. multi-angle QAOA gammas)
/// are indexed in this order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new<I>(n_vertices: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n_vertices == 0 {
            return Err(Error::InvalidGraph(
                "graph must have at least one vertex".into(),
            ));
        }
        let mut out = Vec::new();
        for (a, b) in edges {
            if a >= n_vertices || b >= n_vertices {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) out of range for {n_vertices} vertices"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            out.push((a.min(b), a.max(b)));
        }
        out.sort_unstable();
        if let Some(w) = out.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!("duplicate edge {:?}", w[0])));
        }
        Ok(Self {
            n_vertices,
            edges: out,
        })
    }

    /// Graph without edges.
    pub fn empty(n_vertices: usize) -> Result<Self> {
        Self::new(n_vertices, std::iter::empty())
    }

    pub fn complete(n_vertices: usize) -> Result<Self> {
        let edges = (0..n_vertices).flat_map(|j| (0..j).map(move |i| (i, j)));
        Self::new(n_vertices, edges)
    }

    /// Ring `0 - 1 - ... - (n-1) - 0`.
    pub fn cycle(n_vertices: usize) -> Result<Self> {
        if n_vertices < 3 {
            return Err(Error::InvalidGraph(
                "a cycle needs at least 3 vertices".into(),
            ));
        }
        Self::new(
            n_vertices,
            (0..n_vertices).map(|i| (i, (i + 1) % n_vertices)),
        )
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_vertices];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_vertices];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn is_regular(&self, degree: usize) -> bool {
        self.degrees().iter().all(|&d| d == degree)
    }

    pub fn is_cubic(&self) -> bool {
        self.is_regular(3)
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_vertices {
            return Err(Error::DimensionMismatch(format!(
                "permutation has length {}, graph has {} vertices",
                perm.len(),
                self.n_vertices
            )));
        }
        let mut seen = vec![false; self.n_vertices];
        for &p in perm {
            if p >= self.n_vertices || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument(
                    "relabeling is not a permutation".into(),
                ));
            }
        }
        Self::new(
            self.n_vertices,
            self.edges.iter().map(|&(a, b)| (perm[a], perm[b])),
        )
    }

    /// Number of triangles through each vertex.
    pub fn triangle_counts(&self) -> Vec<usize> {
        let adj = self.neighbors();
        let mut counts = vec![0; self.n_vertices];
        for &(a, b) in &self.edges {
            for &c in &adj[a] {
                if c > b && self.has_edge(b, c) {
                    counts[a] += 1;
                    counts[b] += 1;
                    counts[c] += 1;
                }
            }
        }
        counts
    }

    pub fn is_connected(&self) -> bool {
        let adj = self.neighbors();
        let mut seen = vec![false; self.n_vertices];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == self.n_vertices
    }
}
