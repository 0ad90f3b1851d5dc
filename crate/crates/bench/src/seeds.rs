//! Deterministic seed derivation.

use sha2::{Digest, Sha256};

/// Seed of one (method, instance, depth) cell: the first eight bytes of
/// SHA-256 over the base seed, the method id and the cell coordinates.
pub fn cell_seed(base_seed: u64, method_id: &str, instance: usize, depth: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(base_seed.to_le_bytes());
    h.update((method_id.len() as u64).to_le_bytes());
    h.update(method_id.as_bytes());
    h.update((instance as u64).to_le_bytes());
    h.update((depth as u64).to_le_bytes());
    first_word(&h.finalize())
}

/// Independent seed for a named random stream inside a cell.
pub fn stream_seed(cell_seed: u64, stream: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(cell_seed.to_le_bytes());
    h.update(stream.as_bytes());
    first_word(&h.finalize())
}

fn first_word(digest: &[u8]) -> u64 {
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}
