//! Paired Wilcoxon tests between methods with Holm correction per metric.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use falqon::stats::{holm_adjust, wilcoxon_signed_rank, Direction, Metric, TestResult};
use falqon::{Error as CoreError, RunRecord};

use crate::error::{BenchError, Result};

pub const DEFAULT_ALPHA: f64 = 0.05;

/// One (metric, depth, method pair) comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub metric: Metric,
    pub depth: usize,
    pub method_a: String,
    pub method_b: String,
    pub n_pairs: usize,
    /// `None` when every paired difference is zero; such comparisons are
    /// not tests and stay out of the Holm family.
    pub test: Option<TestResult>,
}

impl Comparison {
    pub fn significant(&self, alpha: f64) -> bool {
        self.test.as_ref().is_some_and(|t| t.significant(alpha))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceReport {
    pub alpha: f64,
    pub comparisons: Vec<Comparison>,
}

impl SignificanceReport {
    pub fn find(&self, metric: Metric, depth: usize, a: &str, b: &str) -> Option<&Comparison> {
        self.comparisons
            .iter()
            .find(|c| c.metric == metric && c.depth == depth && c.method_a == a && c.method_b == b)
    }

    /// Columns: metric, depth, method_a, method_b, W, p_raw, p_adj,
    /// significant, n_pairs, direction. Non-tests leave the statistic and
    /// p-value columns empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "metric",
            "depth",
            "method_a",
            "method_b",
            "W",
            "p_raw",
            "p_adj",
            "significant",
            "n_pairs",
            "direction",
        ])?;
        for c in &self.comparisons {
            let (stat, p_raw, p_adj, direction) = match &c.test {
                Some(t) => (
                    t.statistic.to_string(),
                    format!("{:e}", t.p_raw),
                    format!("{:e}", t.p_adj),
                    format!("{:?}", t.direction).to_lowercase(),
                ),
                None => (String::new(), String::new(), String::new(), "tie".into()),
            };
            w.write_record([
                c.metric.name().to_string(),
                c.depth.to_string(),
                c.method_a.clone(),
                c.method_b.clone(),
                stat,
                p_raw,
                p_adj,
                c.significant(self.alpha).to_string(),
                c.n_pairs.to_string(),
                direction,
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Every unordered pair of the given methods, in list order.
pub fn all_pairs(methods: &[String]) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (i, a) in methods.iter().enumerate() {
        for b in &methods[i + 1..] {
            out.push((a.clone(), b.clone()));
        }
    }
    out
}

/// Tests each pair at each depth both methods were run at, for every
/// metric, then Holm-adjusts within each metric's family.
pub fn significance_report(
    records: &[RunRecord],
    pairs: &[(String, String)],
    depths: Option<&[usize]>,
    alpha: f64,
) -> Result<SignificanceReport> {
    let mut cells: BTreeMap<(&str, usize), BTreeMap<usize, &RunRecord>> = BTreeMap::new();
    for r in records {
        cells
            .entry((r.method.as_str(), r.depth))
            .or_default()
            .insert(r.instance, r);
    }
    let mut comparisons = Vec::new();
    for metric in Metric::ALL {
        let start = comparisons.len();
        for (a, b) in pairs {
            let mut pair_depths: BTreeSet<usize> = cells
                .keys()
                .filter(|(m, _)| *m == a.as_str() || *m == b.as_str())
                .map(|&(_, d)| d)
                .collect();
            if let Some(selected) = depths {
                pair_depths.retain(|d| selected.contains(d));
            }
            for depth in pair_depths {
                let empty = BTreeMap::new();
                let ra = cells.get(&(a.as_str(), depth)).unwrap_or(&empty);
                let rb = cells.get(&(b.as_str(), depth)).unwrap_or(&empty);
                check_pairing(a, b, depth, ra, rb)?;
                let xa: Vec<f64> = ra.values().map(|r| metric.of(r)).collect();
                let xb: Vec<f64> = rb.values().map(|r| metric.of(r)).collect();
                let test = match wilcoxon_signed_rank(&xa, &xb) {
                    Ok(w) => Some(TestResult {
                        method_a: a.clone(),
                        method_b: b.clone(),
                        metric,
                        depth,
                        statistic: w.statistic,
                        p_raw: w.p_value,
                        p_adj: w.p_value,
                        n_pairs: xa.len(),
                        direction: Direction::of_differences(&xa, &xb),
                    }),
                    Err(CoreError::DegenerateSample(_)) => None,
                    Err(e) => return Err(e.into()),
                };
                comparisons.push(Comparison {
                    metric,
                    depth,
                    method_a: a.clone(),
                    method_b: b.clone(),
                    n_pairs: xa.len(),
                    test,
                });
            }
        }
        let family: Vec<&mut TestResult> = comparisons[start..]
            .iter_mut()
            .filter_map(|c| c.test.as_mut())
            .collect();
        let raw: Vec<f64> = family.iter().map(|t| t.p_raw).collect();
        let adjusted = holm_adjust(&raw)?;
        for (t, p) in family.into_iter().zip(adjusted) {
            t.p_adj = p;
        }
    }
    Ok(SignificanceReport { alpha, comparisons })
}

fn check_pairing(
    a: &str,
    b: &str,
    depth: usize,
    ra: &BTreeMap<usize, &RunRecord>,
    rb: &BTreeMap<usize, &RunRecord>,
) -> Result<()> {
    let mut missing = Vec::new();
    for i in ra.keys().filter(|i| !rb.contains_key(i)) {
        missing.push(format!("{b} instance {i} depth {depth}"));
    }
    for i in rb.keys().filter(|i| !ra.contains_key(i)) {
        missing.push(format!("{a} instance {i} depth {depth}"));
    }
    if missing.is_empty() {
        Ok(())
    } else {
        Err(BenchError::Pairing {
            method_a: a.into(),
            method_b: b.into(),
            missing: missing.join(", "),
        })
    }
}
