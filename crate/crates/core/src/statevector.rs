//! Dense statevector over `N` qubits and the two circuit layers every
//! method here is built from.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{IsingProblem, LinearOperator};

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 24;

/// Allowed drift of `sum |a|^2` away from 1 before a layer is reported as
/// an internal-consistency failure. States are never renormalized.
pub const NORM_DRIFT_TOLERANCE: f64 = 1e-8;

/// Largest imaginary part tolerated when evaluating a Hermitian observable.
pub const HERMITIAN_RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Shots per estimate used throughout the benchmark.
pub const DEFAULT_SHOTS: u32 = 8192;

/// How an observable is turned into a number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(from = "u32", into = "u32")]
pub enum ShotPolicy {
    /// Exact expectation from the amplitudes.
    #[default]
    Exact,
    /// Estimate from this many multinomial samples.
    Shots(u32),
}

impl From<u32> for ShotPolicy {
    fn from(shots: u32) -> Self {
        Self::from_shots(shots)
    }
}

impl From<ShotPolicy> for u32 {
    fn from(policy: ShotPolicy) -> Self {
        policy.shots()
    }
}

impl ShotPolicy {
    /// `0` is the exact-mode sentinel.
    pub fn from_shots(shots: u32) -> Self {
        if shots == 0 {
            Self::Exact
        } else {
            Self::Shots(shots)
        }
    }

    pub fn shots(self) -> u32 {
        match self {
            Self::Exact => 0,
            Self::Shots(s) => s,
        }
    }
}

/// Rotation angle of a layer: one scalar for every term, or one angle per
/// term (per edge for the problem layer, per qubit for the driver layer).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerAngle<'a> {
    Uniform(f64),
    PerTerm(&'a [f64]),
}

impl LayerAngle<'_> {
    fn at(&self, term: usize) -> f64 {
        match *self {
            Self::Uniform(a) => a,
            Self::PerTerm(v) => v[term],
        }
    }

    fn check_len(&self, expected: usize, what: &str) -> Result<()> {
        match self {
            Self::PerTerm(v) if v.len() != expected => Err(Error::DimensionMismatch(format!(
                "{what} angles: expected {expected}, got {}",
                v.len()
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

fn check_size(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::UnsupportedSize(format!(
            "statevector needs 1..={MAX_QUBITS} qubits, got {n_qubits}"
        )));
    }
    Ok(())
}

impl Statevector {
    /// `|+>^N`, the ground state of `-H_d` and the start state of every
    /// method.
    pub fn plus_state(n_qubits: usize) -> Result<Self> {
        check_size(n_qubits)?;
        let dim = 1usize << n_qubits;
        let amp = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(Self {
            n_qubits,
            amplitudes: vec![amp; dim],
        })
    }

    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        check_size(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} >= {dim}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps caller-provided amplitudes; the length must be a power of two
    /// and the norm must be 1 within [`NORM_DRIFT_TOLERANCE`].
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::DimensionMismatch(format!(
                "amplitude count {dim} is not a power of two >= 2"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_size(n_qubits)?;
        let s = Self {
            n_qubits,
            amplitudes,
        };
        s.check_norm()?;
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn check_norm(&self) -> Result<()> {
        let drift = (self.norm_sqr() - 1.0).abs();
        if drift > NORM_DRIFT_TOLERANCE {
            return Err(Error::Consistency(format!(
                "statevector norm drifted by {drift:e}"
            )));
        }
        Ok(())
    }

    /// `exp(-i sum_e gamma_e Z_a Z_b)`: the amplitude of `|x>` picks up the
    /// phase `-sum_e gamma_e z_a z_b`. With a uniform angle this is
    /// `exp(-i gamma H_p)`.
    pub fn apply_problem_layer(
        &mut self,
        problem: &IsingProblem,
        gamma: LayerAngle<'_>,
    ) -> Result<()> {
        self.check_dims(problem.n_qubits())?;
        gamma.check_len(problem.graph().n_edges(), "problem-layer")?;
        match gamma {
            LayerAngle::Uniform(g) => {
                let m = problem.graph().n_edges() as i32;
                let table: Vec<Complex64> = (-m..=m)
                    .map(|e| Complex64::from_polar(1.0, -g * f64::from(e)))
                    .collect();
                for (amp, &e) in self.amplitudes.iter_mut().zip(problem.energies()) {
                    *amp *= table[(e + m) as usize];
                }
            }
            LayerAngle::PerTerm(gammas) => {
                let masks = problem.edge_masks();
                for (x, amp) in self.amplitudes.iter_mut().enumerate() {
                    let phase: f64 = masks
                        .iter()
                        .zip(gammas)
                        .map(|(&m, &g)| if (x & m).count_ones() == 1 { -g } else { g })
                        .sum();
                    *amp *= Complex64::from_polar(1.0, -phase);
                }
            }
        }
        self.check_norm()
    }

    /// `prod_j exp(-i beta_j X_j)`; each qubit mixes the amplitude pairs
    /// `(a, b)` differing in its bit as `(a cos - i b sin, -i a sin + b cos)`.
    pub fn apply_driver_layer(&mut self, beta: LayerAngle<'_>) -> Result<()> {
        beta.check_len(self.n_qubits, "driver-layer")?;
        for q in 0..self.n_qubits {
            let angle = beta.at(q);
            if angle == 0.0 {
                continue;
            }
            let (s, c) = angle.sin_cos();
            let mis = Complex64::new(0.0, -s);
            let bit = 1usize << q;
            for block in self.amplitudes.chunks_exact_mut(bit << 1) {
                let (lo, hi) = block.split_at_mut(bit);
                for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = x * c + y * mis;
                    *b = x * mis + y * c;
                }
            }
        }
        self.check_norm()
    }

    /// `<psi|op|psi>` for a Hermitian `op`.
    pub fn expectation<O: LinearOperator + ?Sized>(&self, op: &O) -> Result<f64> {
        self.check_dims(op.n_qubits())?;
        let applied = op.apply(&self.amplitudes);
        real_part(inner(&self.amplitudes, &applied))
    }

    /// Multinomial draw of `shots` computational-basis measurements.
    /// Keys are basis indices (bit `j` is qubit `j`).
    pub fn sample_bitstrings(&self, shots: u32, seed: u64) -> BTreeMap<usize, u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = WeightedIndex::new(self.probabilities())
            .expect("a normalized state has positive total weight");
        let mut hist = BTreeMap::new();
        for _ in 0..shots {
            *hist.entry(dist.sample(&mut rng)).or_insert(0) += 1;
        }
        hist
    }

    /// Index-wise conjugate inner product `<self|other>`.
    pub fn inner(&self, other: &Statevector) -> Complex64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    fn check_dims(&self, n_qubits: usize) -> Result<()> {
        if n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "operator acts on {n_qubits} qubits, state has {}",
                self.n_qubits
            )));
        }
        Ok(())
    }
}

/// `sum_x conj(a_x) b_x`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Real part of a value that must be real up to [`HERMITIAN_RESIDUAL_TOLERANCE`].
pub(crate) fn real_part(z: Complex64) -> Result<f64> {
    if z.im.abs() > HERMITIAN_RESIDUAL_TOLERANCE {
        return Err(Error::NonHermitian {
            residual: z.im.abs(),
            tolerance: HERMITIAN_RESIDUAL_TOLERANCE,
        });
    }
    Ok(z.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::Graph;
    use crate::hamiltonians::Identity;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn edge() -> IsingProblem {
        IsingProblem::new(Graph::new(2, [(0, 1)]).unwrap()).unwrap()
    }

    #[test]
    fn plus_state_amplitudes() {
        let s = Statevector::plus_state(1).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[1].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        let s = Statevector::plus_state(2).unwrap();
        assert!(s
            .amplitudes()
            .iter()
            .all(|a| (a.re - 0.5).abs() < 1e-15 && a.im == 0.0));
        let s = Statevector::plus_state(12).unwrap();
        assert!(s
            .probabilities()
            .iter()
            .all(|&p| (p - 1.0 / 4096.0).abs() < 1e-18));
    }

    #[test]
    fn size_budget() {
        assert!(matches!(
            Statevector::plus_state(25),
            Err(Error::UnsupportedSize(_))
        ));
        assert!(matches!(
            Statevector::plus_state(0),
            Err(Error::UnsupportedSize(_))
        ));
    }

    #[test]
    fn zero_angles_are_identity() {
        let p = edge();
        let mut s = Statevector::plus_state(2).unwrap();
        let before = s.clone();
        s.apply_problem_layer(&p, LayerAngle::Uniform(0.0)).unwrap();
        s.apply_driver_layer(LayerAngle::Uniform(0.0)).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn problem_phase_on_aligned_edge() {
        let p = edge();
        let mut s = Statevector::basis_state(2, 0).unwrap();
        s.apply_problem_layer(&p, LayerAngle::Uniform(FRAC_PI_2))
            .unwrap();
        // z0 z1 = +1 so the phase is -pi/2
        assert_abs_diff_eq!(s.amplitudes()[0].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[0].im, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn driver_flips_single_qubit() {
        let mut s = Statevector::basis_state(1, 0).unwrap();
        s.apply_driver_layer(LayerAngle::Uniform(FRAC_PI_2))
            .unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[1].im, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.probabilities()[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn per_term_lengths_are_checked() {
        let p = edge();
        let mut s = Statevector::plus_state(2).unwrap();
        let r = s.apply_problem_layer(&p, LayerAngle::PerTerm(&[0.1, 0.2]));
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
        let r = s.apply_driver_layer(LayerAngle::PerTerm(&[0.1]));
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn identity_expectation_is_one() {
        let s = Statevector::plus_state(3).unwrap();
        assert_abs_diff_eq!(
            s.expectation(&Identity::new(3)).unwrap(),
            1.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn from_amplitudes_checks_norm() {
        let bad = vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!(matches!(
            Statevector::from_amplitudes(bad),
            Err(Error::Consistency(_))
        ));
        let odd = vec![Complex64::new(1.0, 0.0); 3];
        assert!(matches!(
            Statevector::from_amplitudes(odd),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn sampling_basis_state_and_plus_state() {
        let s = Statevector::basis_state(3, 5).unwrap();
        let h = s.sample_bitstrings(100, 1);
        assert_eq!(h.len(), 1);
        assert_eq!(h[&5], 100);

        let s = Statevector::plus_state(1).unwrap();
        let h = s.sample_bitstrings(8192, 42);
        assert_eq!(h.values().sum::<u64>(), 8192);
        let sigma = (8192.0f64 * 0.25).sqrt();
        for outcome in [0, 1] {
            let count = *h.get(&outcome).unwrap_or(&0) as f64;
            assert!((count - 4096.0).abs() < 5.0 * sigma, "count {count}");
        }
        assert_eq!(h, s.sample_bitstrings(8192, 42));
    }

    #[test]
    fn shot_policy_sentinel() {
        assert_eq!(ShotPolicy::from_shots(0), ShotPolicy::Exact);
        assert_eq!(ShotPolicy::from_shots(8192), ShotPolicy::Shots(8192));
        assert_eq!(ShotPolicy::Shots(10).shots(), 10);
    }
}
