use super::Graph;
use crate::error::{Error, Result};

/// Largest vertex count accepted by [`exact_maxcut`].
pub const MAX_EXHAUSTIVE_VERTICES: usize = 24;

/// Exhaustive MaxCut ground truth.
///
/// `optimal_bitstrings` holds basis indices: bit `i` is the side of vertex
/// `i`. The set is closed under complement and sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxCutSolution {
    pub max_cut_value: usize,
    pub optimal_bitstrings: Vec<usize>,
    /// `<H_p>` at any optimal bitstring, `|E| - 2 * max_cut_value`.
    pub min_energy: i64,
}

impl MaxCutSolution {
    pub fn is_optimal(&self, bitstring: usize) -> bool {
        self.optimal_bitstrings.binary_search(&bitstring).is_ok()
    }
}

pub fn exact_maxcut(g: &Graph) -> Result<MaxCutSolution> {
    let n = g.n_vertices();
    if n > MAX_EXHAUSTIVE_VERTICES {
        return Err(Error::UnsupportedSize(format!(
            "exhaustive MaxCut is limited to {MAX_EXHAUSTIVE_VERTICES} vertices, got {n}"
        )));
    }
    let edge_masks: Vec<usize> = g
        .edges()
        .iter()
        .map(|&(a, b)| (1 << a) | (1 << b))
        .collect();
    let mut best = 0;
    let mut optimal = Vec::new();
    for x in 0..1usize << n {
        // an edge is cut when exactly one endpoint bit is set
        let cut = edge_masks
            .iter()
            .filter(|&&m| (x & m).count_ones() == 1)
            .count();
        if cut > best {
            best = cut;
            optimal.clear();
        }
        if cut == best {
            optimal.push(x);
        }
    }
    Ok(MaxCutSolution {
        max_cut_value: best,
        optimal_bitstrings: optimal,
        min_energy: g.n_edges() as i64 - 2 * best as i64,
    })
}

/// Binary rendering with vertex 0 as the rightmost character.
pub fn format_bitstring(x: usize, n_vertices: usize) -> String {
    (0..n_vertices)
        .rev()
        .map(|i| if x >> i & 1 == 1 { '1' } else { '0' })
        .collect()
}
