//! Generation of all 3-regular graphs on a small vertex count, one
//! representative per isomorphism class.
//!
//! Labeled graphs are built by backtracking: the lowest vertex with spare
//! degree takes its missing neighbors in increasing label order, so every
//! labeled completion is produced at most once. Candidates that are twins in
//! the partial graph (swapping them is an automorphism of what has been
//! built so far) lead to isomorphic completions, so only the lowest of each
//! twin class is tried. Survivors are bucketed by a refinement fingerprint
//! and deduplicated with the exact isomorphism test.

use std::collections::HashMap;

use super::iso::{are_isomorphic, canonical_form, invariant_key};
use super::{emit_graph6, Graph};
use crate::error::{Error, Result};

/// Largest vertex count accepted by [`enumerate_cubic_graphs`].
pub const MAX_ENUMERATION_VERTICES: usize = 14;

struct Builder {
    n: usize,
    adj: Vec<u32>,
    deg: Vec<u32>,
    found: Vec<Graph>,
    buckets: HashMap<u64, Vec<usize>>,
}

impl Builder {
    fn extend(&mut self, from: usize) {
        match (from..self.n).find(|&v| self.deg[v] < 3) {
            None => self.emit(),
            Some(v) => self.extend_vertex(v, v + 1),
        }
    }

    fn extend_vertex(&mut self, v: usize, min_u: usize) {
        if self.deg[v] == 3 {
            self.extend(v + 1);
            return;
        }
        let needed = (3 - self.deg[v]) as usize;
        let candidates: Vec<usize> = (min_u..self.n)
            .filter(|&u| self.deg[u] < 3 && self.adj[v] & (1 << u) == 0)
            .collect();
        if candidates.len() < needed {
            return;
        }
        let mut tried: Vec<usize> = Vec::new();
        for &u in &candidates {
            let is_twin = tried
                .iter()
                .any(|&t| self.adj[u] & !(1 << t) == self.adj[t] & !(1 << u));
            if is_twin {
                continue;
            }
            tried.push(u);
            self.toggle(v, u);
            self.extend_vertex(v, u + 1);
            self.toggle(v, u);
        }
    }

    fn toggle(&mut self, a: usize, b: usize) {
        let adding = self.adj[a] & (1 << b) == 0;
        self.adj[a] ^= 1 << b;
        self.adj[b] ^= 1 << a;
        if adding {
            self.deg[a] += 1;
            self.deg[b] += 1;
        } else {
            self.deg[a] -= 1;
            self.deg[b] -= 1;
        }
    }

    fn emit(&mut self) {
        let edges = (0..self.n).flat_map(|a| {
            let mask = self.adj[a];
            (a + 1..self.n)
                .filter(move |&b| mask & (1 << b) != 0)
                .map(move |b| (a, b))
        });
        let g = Graph::new(self.n, edges).expect("builder keeps the graph simple");
        let key = invariant_key(&g);
        let bucket = self.buckets.entry(key).or_default();
        if bucket.iter().any(|&i| are_isomorphic(&self.found[i], &g)) {
            return;
        }
        bucket.push(self.found.len());
        self.found.push(g);
    }
}

/// Every 3-regular simple graph on `n_vertices` vertices (connected or not),
/// one representative per isomorphism class, each in canonical labeling and
/// sorted by canonical graph6 record.
pub fn enumerate_cubic_graphs(n_vertices: usize) -> Result<Vec<Graph>> {
    if n_vertices == 0 {
        return Err(Error::InvalidArgument(
            "vertex count must be positive".into(),
        ));
    }
    if n_vertices % 2 == 1 {
        return Err(Error::NoCubicGraph(n_vertices));
    }
    if n_vertices > MAX_ENUMERATION_VERTICES {
        return Err(Error::UnsupportedSize(format!(
            "cubic enumeration is limited to {MAX_ENUMERATION_VERTICES} vertices, got {n_vertices}"
        )));
    }
    if n_vertices < 4 {
        return Ok(Vec::new());
    }
    let mut builder = Builder {
        n: n_vertices,
        adj: vec![0; n_vertices],
        deg: vec![0; n_vertices],
        found: Vec::new(),
        buckets: HashMap::new(),
    };
    builder.extend(0);
    let mut keyed: Vec<(String, Graph)> = builder
        .found
        .into_iter()
        .map(|g| {
            let canon = canonical_form(&g);
            (emit_graph6(&canon), canon)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(keyed.into_iter().map(|(_, g)| g).collect())
}
