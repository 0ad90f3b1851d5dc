//! graph6 encoding (McKay's format), restricted to what the ensemble needs:
//! plain undirected simple graphs, one record per line.

use super::Graph;
use crate::error::{Error, Result};

const HEADER: &str = ">>graph6<<";
const MAX_VERTICES: u64 = (1 << 31) - 1;

fn parse_err(offset: usize, reason: impl Into<String>) -> Error {
    Error::Graph6 {
        offset,
        reason: reason.into(),
    }
}

fn sixbits(bytes: &[u8], offset: usize) -> Result<u8> {
    let b = bytes[offset];
    if !(63..=126).contains(&b) {
        return Err(parse_err(
            offset,
            format!("byte {b:#04x} outside the printable range 63..=126"),
        ));
    }
    Ok(b - 63)
}

fn read_vertex_count(bytes: &[u8]) -> Result<(u64, usize)> {
    let need = |len: usize| -> Result<()> {
        if bytes.len() < len {
            Err(parse_err(
                bytes.len(),
                "record ends inside the vertex count",
            ))
        } else {
            Ok(())
        }
    };
    need(1)?;
    if bytes[0] != 126 {
        return Ok((u64::from(sixbits(bytes, 0)?), 1));
    }
    need(2)?;
    let (start, width) = if bytes[1] == 126 { (2, 6) } else { (1, 3) };
    need(start + width)?;
    let mut n = 0u64;
    for i in start..start + width {
        n = (n << 6) | u64::from(sixbits(bytes, i)?);
    }
    Ok((n, start + width))
}

/// Decodes one graph6 record. Trailing line terminators are ignored.
pub fn parse_graph6(text: &str) -> Result<Graph> {
    let record = text.trim_end_matches(['\n', '\r']);
    let record = record.strip_prefix(HEADER).unwrap_or(record);
    let bytes = record.as_bytes();
    let (n, body_start) = read_vertex_count(bytes)?;
    if n > MAX_VERTICES {
        return Err(Error::UnsupportedSize(format!(
            "graph6 vertex count {n} exceeds 31 bits"
        )));
    }
    if n == 0 {
        return Err(parse_err(0, "graph has no vertices"));
    }
    let n_bits = u128::from(n) * u128::from(n - 1) / 2;
    let expected = n_bits.div_ceil(6);
    let body = &bytes[body_start..];
    if body.len() as u128 != expected {
        let offset = body_start + body.len().min(expected as usize);
        return Err(parse_err(
            offset,
            format!(
                "expected {expected} edge bytes for {n} vertices, found {}",
                body.len()
            ),
        ));
    }
    let n = n as usize;
    let mut edges = Vec::new();
    let mut bit = 0usize;
    let n_bits = n_bits as usize;
    for (k, _) in body.iter().enumerate() {
        let offset = body_start + k;
        let chunk = sixbits(bytes, offset)?;
        for shift in (0..6).rev() {
            let set = (chunk >> shift) & 1 == 1;
            if bit >= n_bits {
                if set {
                    return Err(parse_err(offset, "nonzero padding bits"));
                }
            } else if set {
                // bit index enumerates (i, j), i < j, column by column
                let j = column_of(bit);
                let i = bit - j * (j - 1) / 2;
                edges.push((i, j));
            }
            bit += 1;
        }
    }
    Graph::new(n, edges)
}

fn column_of(bit: usize) -> usize {
    // largest j with j*(j-1)/2 <= bit
    let mut j = ((2.0 * bit as f64).sqrt() as usize).max(1);
    while j * (j - 1) / 2 > bit {
        j -= 1;
    }
    while (j + 1) * j / 2 <= bit {
        j += 1;
    }
    j
}

/// Encodes a graph as a single graph6 record (no trailing newline).
pub fn emit_graph6(g: &Graph) -> String {
    let n = g.n_vertices();
    let mut out: Vec<u8> = Vec::new();
    if n <= 62 {
        out.push(n as u8 + 63);
    } else if n <= 258_047 {
        out.push(126);
        for shift in [12, 6, 0] {
            out.push(((n >> shift) & 63) as u8 + 63);
        }
    } else {
        out.push(126);
        out.push(126);
        for shift in [30, 24, 18, 12, 6, 0] {
            out.push(((n >> shift) & 63) as u8 + 63);
        }
    }
    let n_bits = n * n.saturating_sub(1) / 2;
    let mut bits = vec![0u8; n_bits.div_ceil(6) * 6];
    for &(i, j) in g.edges() {
        bits[j * (j - 1) / 2 + i] = 1;
    }
    for chunk in bits.chunks(6) {
        let v = chunk.iter().fold(0u8, |acc, &b| (acc << 1) | b);
        out.push(v + 63);
    }
    String::from_utf8(out).expect("graph6 output is ASCII")
}

/// Parses a multi-record graph6 file. Blank lines and lines starting with
/// `#` are skipped.
pub fn parse_graph6_file(text: &str) -> Result<Vec<Graph>> {
    let mut graphs = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let g = parse_graph6(trimmed).map_err(|e| match e {
            Error::Graph6 { offset, reason } => Error::Graph6 {
                offset,
                reason: format!("line {}: {reason}", line_no + 1),
            },
            other => other,
        })?;
        graphs.push(g);
    }
    Ok(graphs)
}
