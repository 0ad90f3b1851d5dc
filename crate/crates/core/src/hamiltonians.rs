//! The MaxCut problem Hamiltonian `H_p = sum_{(i,j) in E} Z_i Z_j`, the
//! transverse-field driver `H_d = sum_j X_j`, and the commutator
//! expectations that drive the FALQON feedback law.

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::graphs::Graph;
use crate::statevector::{inner, real_part, ShotPolicy, Statevector, MAX_QUBITS};

/// A linear operator on an `n_qubits` register.
pub trait LinearOperator {
    fn n_qubits(&self) -> usize;

    /// Returns `op |input>` (not normalized).
    fn apply(&self, input: &[Complex64]) -> Vec<Complex64>;
}

#[derive(Debug, Clone, Copy)]
pub struct Identity {
    n_qubits: usize,
}

impl Identity {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits }
    }
}

impl LinearOperator for Identity {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply(&self, input: &[Complex64]) -> Vec<Complex64> {
        input.to_vec()
    }
}

/// MaxCut instance as a diagonal Ising operator. The integer energy of each
/// basis state is tabulated once at construction.
#[derive(Debug, Clone)]
pub struct IsingProblem {
    graph: Graph,
    energies: Vec<i32>,
    edge_masks: Vec<usize>,
}

impl IsingProblem {
    pub fn new(graph: Graph) -> Result<Self> {
        let n = graph.n_vertices();
        if n > MAX_QUBITS {
            return Err(Error::UnsupportedSize(format!(
                "Ising problem needs at most {MAX_QUBITS} qubits, got {n}"
            )));
        }
        let edge_masks: Vec<usize> = graph
            .edges()
            .iter()
            .map(|&(a, b)| (1 << a) | (1 << b))
            .collect();
        let m = edge_masks.len() as i32;
        let energies = (0..1usize << n)
            .map(|x| {
                let cut = edge_masks
                    .iter()
                    .filter(|&&mask| (x & mask).count_ones() == 1)
                    .count() as i32;
                m - 2 * cut
            })
            .collect();
        Ok(Self {
            graph,
            energies,
            edge_masks,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn n_qubits(&self) -> usize {
        self.graph.n_vertices()
    }

    /// `sum_{(i,j)} z_i z_j` of basis state `x`.
    pub fn energy(&self, x: usize) -> i32 {
        self.energies[x]
    }

    pub fn energies(&self) -> &[i32] {
        &self.energies
    }

    /// Bitmask `(1 << i) | (1 << j)` per edge, in edge order.
    pub fn edge_masks(&self) -> &[usize] {
        &self.edge_masks
    }

    /// `H_p |psi>`: each amplitude scaled by its basis-state energy.
    pub fn apply_hp(&self, state: &[Complex64]) -> Vec<Complex64> {
        state
            .iter()
            .zip(&self.energies)
            .map(|(a, &e)| a * f64::from(e))
            .collect()
    }

    /// `<H_p>` from a measurement histogram.
    pub fn sampled_energy<'a, I>(&self, histogram: I) -> f64
    where
        I: IntoIterator<Item = (&'a usize, &'a u64)>,
    {
        let (mut total, mut shots) = (0.0, 0u64);
        for (&x, &count) in histogram {
            total += f64::from(self.energies[x]) * count as f64;
            shots += count;
        }
        total / shots as f64
    }

    /// `<H_p^2> - <H_p>^2`.
    pub fn variance(&self, state: &Statevector) -> f64 {
        let (mut first, mut second) = (0.0, 0.0);
        for (a, &e) in state.amplitudes().iter().zip(&self.energies) {
            let p = a.norm_sqr();
            let e = f64::from(e);
            first += p * e;
            second += p * e * e;
        }
        (second - first * first).max(0.0)
    }
}

impl LinearOperator for IsingProblem {
    fn n_qubits(&self) -> usize {
        IsingProblem::n_qubits(self)
    }

    fn apply(&self, input: &[Complex64]) -> Vec<Complex64> {
        self.apply_hp(input)
    }
}

/// `H_d = sum_j X_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DriverOperator {
    n_qubits: usize,
}

impl DriverOperator {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// `H_d |psi>`: output at `x` sums the input over every single-bit flip
    /// of `x`.
    pub fn apply_hd(&self, state: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); state.len()];
        for (x, slot) in out.iter_mut().enumerate() {
            *slot = (0..self.n_qubits).map(|j| state[x ^ (1 << j)]).sum();
        }
        out
    }
}

impl LinearOperator for DriverOperator {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply(&self, input: &[Complex64]) -> Vec<Complex64> {
        self.apply_hd(input)
    }
}

/// `A = <i[H_d,H_p]>`, `B = <1/2 [[H_d,H_p],H_d]>`, `C = <[[H_d,H_p],H_p]>`.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct CommutatorExpectations {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Exact commutator expectations from nested operator applications.
///
/// With `p = H_p psi`, `d = H_d psi`:
/// `A = i(<d|p> - <p|d>)`,
/// `B = 1/2 (2<d|H_p d> - <p|H_d d> - <H_d d|p>)`,
/// `C = <d|H_p p> - 2<p|H_d p> + <H_p p|d>`.
pub fn commutator_expectations(
    problem: &IsingProblem,
    driver: &DriverOperator,
    state: &Statevector,
) -> Result<CommutatorExpectations> {
    if problem.n_qubits() != state.n_qubits() || driver.n_qubits() != state.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "operators act on {} / {} qubits, state has {}",
            problem.n_qubits(),
            driver.n_qubits(),
            state.n_qubits()
        )));
    }
    let psi = state.amplitudes();
    let p = problem.apply_hp(psi);
    let d = driver.apply_hd(psi);
    let pd = problem.apply_hp(&d);
    let dd = driver.apply_hd(&d);
    let pp = problem.apply_hp(&p);
    let dp = driver.apply_hd(&p);
    let i = Complex64::new(0.0, 1.0);

    let a = i * (inner(&d, &p) - inner(&p, &d));
    let b = 0.5 * (2.0 * inner(&d, &pd) - inner(&p, &dd) - inner(&dd, &p));
    let c = inner(&d, &pp) - 2.0 * inner(&p, &dp) + inner(&pp, &d);
    Ok(CommutatorExpectations {
        a: real_part(a)?,
        b: real_part(b)?,
        c: real_part(c)?,
    })
}

/// Variances `<O^2> - <O>^2` of the three commutator observables, used as
/// the variance proxy when shot noise is emulated.
pub fn commutator_variances(
    problem: &IsingProblem,
    driver: &DriverOperator,
    state: &Statevector,
) -> Result<CommutatorExpectations> {
    let means = commutator_expectations(problem, driver, state)?;
    let psi = state.amplitudes();
    let p = problem.apply_hp(psi);
    let d = driver.apply_hd(psi);
    let pd = problem.apply_hp(&d);
    let dp = driver.apply_hd(&p);
    let i = Complex64::new(0.0, 1.0);
    let norm_sqr = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();

    let op_a: Vec<Complex64> = dp.iter().zip(&pd).map(|(x, y)| i * (x - y)).collect();
    let dpd = driver.apply_hd(&pd);
    let pdd = problem.apply_hp(&driver.apply_hd(&d));
    let ddp = driver.apply_hd(&dp);
    let op_b: Vec<Complex64> = (0..psi.len())
        .map(|x| 0.5 * (2.0 * dpd[x] - pdd[x] - ddp[x]))
        .collect();
    let dpp = driver.apply_hd(&problem.apply_hp(&p));
    let pdp = problem.apply_hp(&dp);
    let ppd = problem.apply_hp(&pd);
    let op_c: Vec<Complex64> = (0..psi.len())
        .map(|x| dpp[x] - 2.0 * pdp[x] + ppd[x])
        .collect();

    Ok(CommutatorExpectations {
        a: (norm_sqr(&op_a) - means.a * means.a).max(0.0),
        b: (norm_sqr(&op_b) - means.b * means.b).max(0.0),
        c: (norm_sqr(&op_c) - means.c * means.c).max(0.0),
    })
}

/// `<H_p>` under a shot policy. Shot mode draws a fresh seed from `rng` and
/// averages the energies of the sampled bitstrings.
pub fn estimate_energy<R: RngCore>(
    problem: &IsingProblem,
    state: &Statevector,
    policy: ShotPolicy,
    rng: &mut R,
) -> Result<f64> {
    match policy {
        ShotPolicy::Exact => state.expectation(problem),
        ShotPolicy::Shots(shots) => {
            let hist = state.sample_bitstrings(shots, rng.next_u64());
            Ok(problem.sampled_energy(&hist))
        }
    }
}

/// Commutator expectations under a shot policy: exact values, or exact
/// values plus Gaussian noise scaled by each observable's variance.
pub fn estimate_commutators<R: RngCore>(
    problem: &IsingProblem,
    driver: &DriverOperator,
    state: &Statevector,
    policy: ShotPolicy,
    rng: &mut R,
) -> Result<CommutatorExpectations> {
    let exact = commutator_expectations(problem, driver, state)?;
    let ShotPolicy::Shots(shots) = policy else {
        return Ok(exact);
    };
    let var = commutator_variances(problem, driver, state)?;
    let shots = u64::from(shots);
    Ok(CommutatorExpectations {
        a: noisy_expectation(exact.a, var.a, shots, rng.next_u64()),
        b: noisy_expectation(exact.b, var.b, shots, rng.next_u64()),
        c: noisy_expectation(exact.c, var.c, shots, rng.next_u64()),
    })
}

/// Gaussian shot-noise stand-in for observables that are not diagonal in the
/// computational basis: `exact + N(0, variance_proxy / shots)`. `shots == 0`
/// disables the noise.
pub fn noisy_expectation(exact: f64, variance_proxy: f64, shots: u64, seed: u64) -> f64 {
    if shots == 0 || variance_proxy <= 0.0 {
        return exact;
    }
    let sigma = (variance_proxy / shots as f64).sqrt();
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and positive");
    exact + normal.sample(&mut ChaCha8Rng::seed_from_u64(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn hp_on_single_edge() {
        let p = IsingProblem::new(Graph::new(2, [(0, 1)]).unwrap()).unwrap();
        let s00 = Statevector::basis_state(2, 0b00).unwrap();
        assert_eq!(p.apply_hp(s00.amplitudes())[0], c(1.0));
        let s01 = Statevector::basis_state(2, 0b01).unwrap();
        assert_eq!(p.apply_hp(s01.amplitudes())[1], c(-1.0));
    }

    #[test]
    fn hp_on_uniform_k4() {
        let k4 = Graph::complete(4).unwrap();
        let p = IsingProblem::new(k4.clone()).unwrap();
        let out = p.apply_hp(Statevector::plus_state(4).unwrap().amplitudes());
        for (x, v) in out.iter().enumerate() {
            // classical energy from the edge list
            let e: i32 = k4
                .edges()
                .iter()
                .map(|&(a, b)| if (x >> a & 1) == (x >> b & 1) { 1 } else { -1 })
                .sum();
            assert_abs_diff_eq!(v.re, f64::from(e) / 4.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn hd_examples() {
        let d1 = DriverOperator::new(1);
        let out = d1.apply_hd(Statevector::basis_state(1, 0).unwrap().amplitudes());
        assert_eq!(out, vec![c(0.0), c(1.0)]);

        let d2 = DriverOperator::new(2);
        let out = d2.apply_hd(Statevector::basis_state(2, 0).unwrap().amplitudes());
        assert_eq!(out, vec![c(0.0), c(1.0), c(1.0), c(0.0)]);

        let plus = Statevector::plus_state(5).unwrap();
        let out = DriverOperator::new(5).apply_hd(plus.amplitudes());
        for (o, a) in out.iter().zip(plus.amplitudes()) {
            assert_abs_diff_eq!(o.re, 5.0 * a.re, epsilon = 1e-14);
        }
    }

    #[test]
    fn a_vanishes_on_plus_and_basis_states() {
        let g = Graph::cycle(4).unwrap();
        let p = IsingProblem::new(g).unwrap();
        let d = DriverOperator::new(4);
        let abc = commutator_expectations(&p, &d, &Statevector::plus_state(4).unwrap()).unwrap();
        assert_abs_diff_eq!(abc.a, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(abc.b, 0.0, epsilon = 1e-12);
        for x in 0..16 {
            let abc =
                commutator_expectations(&p, &d, &Statevector::basis_state(4, x).unwrap()).unwrap();
            assert_abs_diff_eq!(abc.a, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let p = IsingProblem::new(Graph::cycle(3).unwrap()).unwrap();
        let d = DriverOperator::new(3);
        let s = Statevector::plus_state(4).unwrap();
        assert!(matches!(
            commutator_expectations(&p, &d, &s),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            s.expectation(&p),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn noisy_expectation_contract() {
        assert_eq!(noisy_expectation(1.25, 4.0, 0, 7), 1.25);
        assert_eq!(
            noisy_expectation(1.25, 4.0, 100, 7),
            noisy_expectation(1.25, 4.0, 100, 7)
        );
        assert_ne!(
            noisy_expectation(1.25, 4.0, 100, 7),
            noisy_expectation(1.25, 4.0, 100, 8)
        );
        let far = noisy_expectation(1.25, 4.0, 1_000_000_000, 3);
        assert!((far - 1.25).abs() < 1e-3 * 2.0);
    }

    #[test]
    fn sampled_energy_of_basis_state() {
        let p = IsingProblem::new(Graph::complete(4).unwrap()).unwrap();
        let s = Statevector::basis_state(4, 0b0011).unwrap();
        let h = s.sample_bitstrings(64, 0);
        assert_eq!(p.sampled_energy(&h), -2.0);
        assert_eq!(p.variance(&s), 0.0);
    }
}
