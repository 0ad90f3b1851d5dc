//! Exact isomorphism testing and canonical labeling for small graphs.
//!
//! Both routines start from colour refinement seeded by degree, triangle
//! count and BFS layer profile; isomorphism then backtracks over
//! colour-compatible vertex maps, canonical labeling runs a plain
//! individualization-refinement search (no automorphism pruning), which is
//! affordable at the ensemble sizes used here.

use std::collections::hash_map::DefaultHasher;
use std::collections::VecDeque;
use std::hash::{Hash, Hasher};

use super::{emit_graph6, Graph};

fn hash_of<T: Hash>(value: &T) -> u64 {
    let mut h = DefaultHasher::new();
    value.hash(&mut h);
    h.finish()
}

fn bfs_profile(adj: &[Vec<usize>], start: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut layers = vec![1];
    while let Some(v) = queue.pop_front() {
        for &u in &adj[v] {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                if layers.len() <= dist[u] {
                    layers.push(0);
                }
                layers[dist[u]] += 1;
                queue.push_back(u);
            }
        }
    }
    layers
}

/// Stable vertex colours after refinement. Colours are hashes, so they are
/// comparable between graphs refined in the same process.
pub(crate) fn refined_colours(g: &Graph) -> Vec<u64> {
    let adj = g.neighbors();
    let triangles = g.triangle_counts();
    let mut colours: Vec<u64> = (0..g.n_vertices())
        .map(|v| hash_of(&(adj[v].len(), triangles[v], bfs_profile(&adj, v))))
        .collect();
    let mut classes = count_classes(&colours);
    for _ in 0..g.n_vertices() {
        let next: Vec<u64> = (0..g.n_vertices())
            .map(|v| {
                let mut around: Vec<u64> = adj[v].iter().map(|&u| colours[u]).collect();
                around.sort_unstable();
                hash_of(&(colours[v], around))
            })
            .collect();
        let next_classes = count_classes(&next);
        colours = next;
        if next_classes == classes {
            break;
        }
        classes = next_classes;
    }
    colours
}

fn count_classes(colours: &[u64]) -> usize {
    let mut c = colours.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

/// Isomorphism-invariant fingerprint; equal graphs up to relabeling always
/// share it, the converse is not guaranteed.
pub(crate) fn invariant_key(g: &Graph) -> u64 {
    let mut colours = refined_colours(g);
    colours.sort_unstable();
    hash_of(&(g.n_vertices(), g.n_edges(), colours))
}

struct Matcher<'a> {
    adj_a: &'a [Vec<bool>],
    adj_b: &'a [Vec<bool>],
    nbrs_b: &'a [Vec<usize>],
    colour_a: &'a [u64],
    colour_b: &'a [u64],
    order: &'a [usize],
    parent: &'a [Option<usize>],
    map: Vec<usize>,
    used: Vec<bool>,
}

impl Matcher<'_> {
    fn consistent(&self, v: usize, c: usize, depth: usize) -> bool {
        self.order[..depth]
            .iter()
            .all(|&w| self.adj_a[v][w] == self.adj_b[c][self.map[w]])
    }

    fn extend(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let v = self.order[depth];
        let candidates: Vec<usize> = match self.parent[v] {
            Some(p) => self.nbrs_b[self.map[p]].clone(),
            None => (0..self.adj_b.len()).collect(),
        };
        for c in candidates {
            if self.used[c] || self.colour_b[c] != self.colour_a[v] || !self.consistent(v, c, depth)
            {
                continue;
            }
            self.map[v] = c;
            self.used[c] = true;
            if self.extend(depth + 1) {
                return true;
            }
            self.used[c] = false;
        }
        false
    }
}

fn adjacency_matrix(g: &Graph) -> Vec<Vec<bool>> {
    let mut m = vec![vec![false; g.n_vertices()]; g.n_vertices()];
    for &(a, b) in g.edges() {
        m[a][b] = true;
        m[b][a] = true;
    }
    m
}

/// Exact isomorphism test.
pub fn are_isomorphic(a: &Graph, b: &Graph) -> bool {
    if a.n_vertices() != b.n_vertices() || a.n_edges() != b.n_edges() {
        return false;
    }
    let mut da = a.degrees();
    let mut db = b.degrees();
    da.sort_unstable();
    db.sort_unstable();
    if da != db {
        return false;
    }
    let colour_a = refined_colours(a);
    let colour_b = refined_colours(b);
    let mut sa = colour_a.clone();
    let mut sb = colour_b.clone();
    sa.sort_unstable();
    sb.sort_unstable();
    if sa != sb {
        return false;
    }

    // BFS order over `a`, roots chosen from the rarest colour first
    let nbrs_a = a.neighbors();
    let n = a.n_vertices();
    let rarity = |v: usize| colour_a.iter().filter(|&&c| c == colour_a[v]).count();
    let mut roots: Vec<usize> = (0..n).collect();
    roots.sort_by_key(|&v| (rarity(v), v));
    let mut order = Vec::with_capacity(n);
    let mut parent = vec![None; n];
    let mut seen = vec![false; n];
    for root in roots {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &u in &nbrs_a[v] {
                if !seen[u] {
                    seen[u] = true;
                    parent[u] = Some(v);
                    queue.push_back(u);
                }
            }
        }
    }

    let adj_a = adjacency_matrix(a);
    let adj_b = adjacency_matrix(b);
    let nbrs_b = b.neighbors();
    let mut matcher = Matcher {
        adj_a: &adj_a,
        adj_b: &adj_b,
        nbrs_b: &nbrs_b,
        colour_a: &colour_a,
        colour_b: &colour_b,
        order: &order,
        parent: &parent,
        map: vec![usize::MAX; n],
        used: vec![false; n],
    };
    matcher.extend(0)
}

fn refine(adj: &[Vec<usize>], cells: &mut Vec<Vec<usize>>) {
    let n = adj.len();
    let mut in_splitter = vec![false; n];
    'outer: loop {
        for s in 0..cells.len() {
            in_splitter.iter_mut().for_each(|x| *x = false);
            for &v in &cells[s] {
                in_splitter[v] = true;
            }
            let mut next = Vec::with_capacity(cells.len() + 1);
            for cell in cells.iter() {
                if cell.len() == 1 {
                    next.push(cell.clone());
                    continue;
                }
                let mut keyed: Vec<(usize, usize)> = cell
                    .iter()
                    .map(|&v| (adj[v].iter().filter(|&&u| in_splitter[u]).count(), v))
                    .collect();
                keyed.sort_unstable();
                let mut start = 0;
                for i in 1..=keyed.len() {
                    if i == keyed.len() || keyed[i].0 != keyed[start].0 {
                        next.push(keyed[start..i].iter().map(|&(_, v)| v).collect());
                        start = i;
                    }
                }
            }
            if next.len() != cells.len() {
                *cells = next;
                continue 'outer;
            }
        }
        return;
    }
}

fn leaf_code(adj_m: &[Vec<bool>], order: &[usize]) -> Vec<u64> {
    let n = order.len();
    let mut code = vec![0u64; (n * n.saturating_sub(1) / 2).div_ceil(64).max(1)];
    let mut bit = 0;
    for j in 1..n {
        for i in 0..j {
            if adj_m[order[i]][order[j]] {
                code[bit / 64] |= 1 << (63 - bit % 64);
            }
            bit += 1;
        }
    }
    code
}

fn search(
    adj: &[Vec<usize>],
    adj_m: &[Vec<bool>],
    mut cells: Vec<Vec<usize>>,
    best: &mut Option<(Vec<u64>, Vec<usize>)>,
) {
    refine(adj, &mut cells);
    let target = cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.len() > 1)
        .min_by_key(|(i, c)| (c.len(), *i))
        .map(|(i, _)| i);
    let Some(t) = target else {
        let order: Vec<usize> = cells.into_iter().flatten().collect();
        let code = leaf_code(adj_m, &order);
        // maximal code: edges packed towards the low labels
        if best.as_ref().is_none_or(|(b, _)| code > *b) {
            *best = Some((code, order));
        }
        return;
    };
    for &v in &cells[t] {
        let mut next = Vec::with_capacity(cells.len() + 1);
        next.extend_from_slice(&cells[..t]);
        next.push(vec![v]);
        next.push(cells[t].iter().copied().filter(|&u| u != v).collect());
        next.extend_from_slice(&cells[t + 1..]);
        search(adj, adj_m, next, best);
    }
}

/// Canonical relabeling: two graphs are isomorphic iff their canonical forms
/// are equal.
pub fn canonical_form(g: &Graph) -> Graph {
    let adj = g.neighbors();
    let adj_m = adjacency_matrix(g);
    // seed the partition with plain structural invariants; ordering by the
    // tuple itself keeps the result independent of hashing details
    let triangles = g.triangle_counts();
    let keys: Vec<(usize, usize, Vec<usize>)> = (0..g.n_vertices())
        .map(|v| (adj[v].len(), triangles[v], bfs_profile(&adj, v)))
        .collect();
    let mut distinct = keys.clone();
    distinct.sort();
    distinct.dedup();
    let cells: Vec<Vec<usize>> = distinct
        .iter()
        .map(|k| (0..g.n_vertices()).filter(|&v| &keys[v] == k).collect())
        .collect();
    let mut best = None;
    search(&adj, &adj_m, cells, &mut best);
    let (_, order) = best.expect("search visits at least one leaf");
    let mut perm = vec![0; order.len()];
    for (label, &v) in order.iter().enumerate() {
        perm[v] = label;
    }
    g.relabel(&perm).expect("order is a permutation")
}

/// graph6 record of the canonical form.
pub fn canonical_graph6(g: &Graph) -> String {
    emit_graph6(&canonical_form(g))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k33() -> Graph {
        Graph::new(6, (0..3).flat_map(|a| (3..6).map(move |b| (a, b)))).unwrap()
    }

    fn prism() -> Graph {
        Graph::new(
            6,
            [
                (0, 1),
                (1, 2),
                (0, 2),
                (3, 4),
                (4, 5),
                (3, 5),
                (0, 3),
                (1, 4),
                (2, 5),
            ],
        )
        .unwrap()
    }

    #[test]
    fn k4_relabeled_is_isomorphic() {
        let k4 = Graph::complete(4).unwrap();
        assert!(are_isomorphic(&k4, &k4.relabel(&[2, 0, 3, 1]).unwrap()));
    }

    #[test]
    fn k33_is_not_the_prism() {
        assert!(!are_isomorphic(&k33(), &prism()));
        assert!(are_isomorphic(&k33(), &k33()));
        assert!(are_isomorphic(
            &prism(),
            &prism().relabel(&[5, 4, 3, 2, 1, 0]).unwrap()
        ));
    }

    #[test]
    fn canonical_form_is_label_invariant() {
        let p = prism();
        let q = p.relabel(&[3, 1, 5, 0, 2, 4]).unwrap();
        assert_eq!(canonical_form(&p), canonical_form(&q));
        assert_ne!(canonical_form(&p), canonical_form(&k33()));
    }

    #[test]
    fn different_sizes_are_not_isomorphic() {
        assert!(!are_isomorphic(
            &Graph::cycle(5).unwrap(),
            &Graph::cycle(6).unwrap()
        ));
        let two_triangles =
            Graph::new(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        assert!(!are_isomorphic(&two_triangles, &Graph::cycle(6).unwrap()));
    }
}
