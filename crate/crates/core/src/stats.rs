//! Success metrics, run records, the paired Wilcoxon signed-rank test and
//! Holm's step-down correction.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::graphs::MaxCutSolution;
use crate::statevector::{ShotPolicy, Statevector};

/// Sample size from which the Wilcoxon test switches to the normal
/// approximation.
pub const WILCOXON_EXACT_LIMIT: usize = 20;

/// Probability mass of the optimal bitstrings in `state`.
pub fn success_probability(state: &Statevector, optimum: &MaxCutSolution) -> f64 {
    let amps = state.amplitudes();
    optimum
        .optimal_bitstrings
        .iter()
        .map(|&x| amps[x].norm_sqr())
        .sum()
}

/// Fraction of sampled shots that landed on an optimal bitstring.
pub fn success_fraction(histogram: &BTreeMap<usize, u64>, optimum: &MaxCutSolution) -> f64 {
    let total: u64 = histogram.values().sum();
    if total == 0 {
        return 0.0;
    }
    let hits: u64 = histogram
        .iter()
        .filter(|(x, _)| optimum.is_optimal(**x))
        .map(|(_, c)| c)
        .sum();
    hits as f64 / total as f64
}

/// `P_success` under a shot policy; shot mode samples with `seed`.
pub fn measure_success(
    state: &Statevector,
    optimum: &MaxCutSolution,
    policy: ShotPolicy,
    seed: u64,
) -> f64 {
    match policy {
        ShotPolicy::Exact => success_probability(state, optimum),
        ShotPolicy::Shots(shots) => {
            success_fraction(&state.sample_bitstrings(shots, seed), optimum)
        }
    }
}

/// Median of finite values; `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "p_success")]
    PSuccess,
    #[serde(rename = "e1")]
    E1,
    #[serde(rename = "e2")]
    E2,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::PSuccess, Metric::E1, Metric::E2];

    pub fn name(self) -> &'static str {
        match self {
            Self::PSuccess => "p_success",
            Self::E1 => "e1",
            Self::E2 => "e2",
        }
    }

    pub fn of(self, record: &RunRecord) -> f64 {
        match self {
            Self::PSuccess => record.p_success,
            Self::E1 => record.e1,
            Self::E2 => record.e2,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One (method, instance, depth) result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: String,
    pub instance: usize,
    pub depth: usize,
    pub p_success: f64,
    pub n_evals: u64,
    /// `p_success / n_evals`.
    pub e1: f64,
    /// `e1 / depth`.
    pub e2: f64,
    pub seed: u64,
    /// Final circuit angles, layer-major, problem angles first.
    pub final_params: Vec<f64>,
    /// Seconds spent on the run; kept out of serialized records so that
    /// stores stay reproducible byte for byte.
    #[serde(skip)]
    pub wall_time: f64,
}

impl RunRecord {
    pub fn new(
        method: impl Into<String>,
        instance: usize,
        depth: usize,
        p_success: f64,
        n_evals: u64,
        seed: u64,
        final_params: Vec<f64>,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_success) {
            return Err(Error::InvalidArgument(format!(
                "success probability {p_success} outside [0, 1]"
            )));
        }
        if n_evals == 0 || depth == 0 {
            return Err(Error::InvalidArgument(
                "evaluation count and depth must be positive".into(),
            ));
        }
        let e1 = p_success / n_evals as f64;
        let e2 = e1 / depth as f64;
        Ok(Self {
            method: method.into(),
            instance,
            depth,
            p_success,
            n_evals,
            e1,
            e2,
            seed,
            final_params,
            wall_time: 0.0,
        })
    }

    /// Checks that `e1` and `e2` are exactly the quotients they are defined as.
    pub fn check_identities(&self) -> Result<()> {
        let e1 = self.p_success / self.n_evals as f64;
        if self.e1.to_bits() != e1.to_bits()
            || self.e2.to_bits() != (e1 / self.depth as f64).to_bits()
        {
            return Err(Error::Consistency(format!(
                "record {}/{}/{}: e1 {} e2 {} do not match p_success {} over {} evaluations",
                self.method,
                self.instance,
                self.depth,
                self.e1,
                self.e2,
                self.p_success,
                self.n_evals
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PValueMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// `min(W+, W-)`.
    pub statistic: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    /// Pairs left after dropping zero differences.
    pub n_used: usize,
    pub n_zero: usize,
    pub method: PValueMethod,
}

/// Ranks of `values` (1-based), ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Two-sided paired Wilcoxon signed-rank test of `a - b`.
///
/// Zero differences are dropped and tied magnitudes share average ranks.
/// Below [`WILCOXON_EXACT_LIMIT`] pairs the p-value is exact (conditional on
/// the tie pattern); otherwise it uses the normal approximation with tie
/// correction and continuity correction.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "paired samples of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    if let Some(&d) = diffs.iter().find(|d| !d.is_finite()) {
        return Err(Error::NonFinite {
            value: d,
            point: diffs.clone(),
        });
    }
    let nonzero: Vec<f64> = diffs.iter().copied().filter(|&d| d != 0.0).collect();
    let n = nonzero.len();
    if n == 0 {
        return Err(Error::DegenerateSample(format!(
            "all {} paired differences are zero",
            diffs.len()
        )));
    }
    let magnitudes: Vec<f64> = nonzero.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&magnitudes);
    let w_plus = nonzero
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .fold(0.0, |s, (_, r)| s + r);
    let total = (n * (n + 1)) as f64 / 2.0;
    let w_minus = total - w_plus;
    let statistic = w_plus.min(w_minus);
    let (p_value, method) = if n < WILCOXON_EXACT_LIMIT {
        (exact_p(&ranks, statistic), PValueMethod::Exact)
    } else {
        (normal_p(&magnitudes, statistic), PValueMethod::Normal)
    };
    Ok(WilcoxonResult {
        statistic,
        w_plus,
        w_minus,
        p_value,
        n_used: n,
        n_zero: diffs.len() - n,
        method,
    })
}

/// `min(1, 2 P(T+ <= w))` from the exact null distribution of the
/// signed-rank sum. Average ranks are multiples of 1/2, so the distribution
/// is built over doubled ranks.
fn exact_p(ranks: &[f64], w: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max: usize = doubled.iter().sum();
    let mut counts = vec![0u64; max + 1];
    counts[0] = 1;
    for &r in &doubled {
        for s in (r..=max).rev() {
            counts[s] += counts[s - r];
        }
    }
    let limit = (2.0 * w).round() as usize;
    let below: u64 = counts[..=limit.min(max)].iter().sum();
    let all = (1u64 << ranks.len()) as f64;
    (2.0 * below as f64 / all).min(1.0)
}

fn normal_p(magnitudes: &[f64], w: f64) -> f64 {
    let n = magnitudes.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut sorted = magnitudes.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    for group in sorted.chunk_by(|x, y| x == y) {
        let t = group.len() as f64;
        tie_term += t * t * t - t;
    }
    let variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    let z = ((w - mean).abs() - 0.5).max(0.0) / variance.sqrt();
    let standard = Normal::standard();
    (2.0 * standard.sf(z)).min(1.0)
}

/// Holm step-down adjusted p-values, returned in input order.
pub fn holm_adjust(p_values: &[f64]) -> Result<Vec<f64>> {
    if let Some(&p) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidArgument(format!(
            "p-value {p} outside [0, 1]"
        )));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p_values[i].total_cmp(&p_values[j]));
    let mut adjusted = vec![0.0; m];
    let mut running = 0.0f64;
    for (u, &i) in order.iter().enumerate() {
        running = running.max((m - u) as f64 * p_values[i]).min(1.0);
        adjusted[i] = running;
    }
    Ok(adjusted)
}

/// Sign of the median of `a - b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// The first method scores higher.
    Greater,
    Less,
    Tie,
}

impl Direction {
    pub fn of_differences(a: &[f64], b: &[f64]) -> Self {
        let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        match median(&diffs) {
            Some(m) if m > 0.0 => Self::Greater,
            Some(m) if m < 0.0 => Self::Less,
            _ => Self::Tie,
        }
    }
}

/// One paired comparison within a corrected family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method_a: String,
    pub method_b: String,
    pub metric: Metric,
    pub depth: usize,
    pub statistic: f64,
    pub p_raw: f64,
    pub p_adj: f64,
    pub n_pairs: usize,
    pub direction: Direction,
}

impl TestResult {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_adj < alpha
    }
}
