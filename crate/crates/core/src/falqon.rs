//! Standard FALQON and Optimal FALQON.
//!
//! Both run `L` layers from `|+>^N`. Layer `k` measures the commutator
//! expectations `(A, B, C)` of the entering state, then applies
//! `exp(-i gamma_k H_p)` followed by `exp(-i beta_k H_d)` with
//! `gamma_k = delta_k` and `beta_k` from the feedback law
//! ([`beta_from_feedback`]). Standard mode uses a fixed `(delta, w)`;
//! optimal mode picks `(delta_k, M_k)` per layer by minimizing `<H_p>` after
//! the candidate layer with Powell's method, holding `(A, B, C)` fixed at
//! their entering-state values.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{
    estimate_commutators, estimate_energy, CommutatorExpectations, DriverOperator, IsingProblem,
};
use crate::optimizers::{powell_minimize, OptimizerBudget};
use crate::statevector::{LayerAngle, ShotPolicy, Statevector};

/// `|B|` (and `|B * delta|`) below which the second-order law falls back to
/// first order.
pub const SO_FALLBACK_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FalqonOrder {
    #[serde(rename = "fo")]
    FirstOrder,
    #[serde(rename = "so")]
    SecondOrder,
}

impl FalqonOrder {
    /// Circuit evaluations charged for measuring the feedback observables of
    /// one layer: `A` alone, or `A`, `B` and `C`.
    pub fn measurements_per_layer(self) -> usize {
        match self {
            Self::FirstOrder => 1,
            Self::SecondOrder => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FalqonMode {
    Standard,
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FalqonConfig {
    pub order: FalqonOrder,
    pub mode: FalqonMode,
    /// Standard: the fixed step. Optimal: Powell's start for `delta_k`.
    pub delta_init: f64,
    /// Standard: the fixed gain `w`. Optimal: Powell's start for `M_k`.
    pub m_init: f64,
    pub n_layers: usize,
    pub so_fallback_threshold: f64,
    /// Per-layer Powell budget (optimal mode only).
    pub optimizer_budget: OptimizerBudget,
    pub shots: ShotPolicy,
}

impl FalqonConfig {
    /// Per-layer Powell budget of the optimal variant: 20 outer iterations,
    /// no cap on cost evaluations.
    pub fn optimal_budget() -> OptimizerBudget {
        OptimizerBudget::default().with_max_iterations(20)
    }

    pub fn standard(order: FalqonOrder, n_layers: usize) -> Self {
        let delta_init = match order {
            FalqonOrder::FirstOrder => 0.03,
            FalqonOrder::SecondOrder => 0.05,
        };
        Self {
            order,
            mode: FalqonMode::Standard,
            delta_init,
            m_init: 1.0,
            n_layers,
            so_fallback_threshold: SO_FALLBACK_THRESHOLD,
            optimizer_budget: Self::optimal_budget(),
            shots: ShotPolicy::Exact,
        }
    }

    pub fn optimal(order: FalqonOrder, n_layers: usize) -> Self {
        Self {
            mode: FalqonMode::Optimal,
            delta_init: 0.5,
            m_init: 1.0,
            ..Self::standard(order, n_layers)
        }
    }

    pub fn with_shots(mut self, shots: ShotPolicy) -> Self {
        self.shots = shots;
        self
    }
}

/// True when the second-order law must fall back to first order.
pub fn so_falls_back(b: f64, delta: f64, threshold: f64) -> bool {
    b.abs() < threshold || (b * delta).abs() < threshold
}

/// Driver angle of a layer.
///
/// FO: `beta = -m A delta`.
/// SO: `beta = -m |(A + C delta) / (2 B delta)| delta`, or the FO value when
/// [`so_falls_back`].
pub fn beta_from_feedback(
    order: FalqonOrder,
    abc: CommutatorExpectations,
    delta: f64,
    m: f64,
    threshold: f64,
) -> f64 {
    let first_order = -m * abc.a * delta;
    match order {
        FalqonOrder::FirstOrder => first_order,
        FalqonOrder::SecondOrder if so_falls_back(abc.b, delta, threshold) => first_order,
        FalqonOrder::SecondOrder => {
            -m * ((abc.a + abc.c * delta) / (2.0 * abc.b * delta)).abs() * delta
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    /// 1-based layer index.
    pub k: usize,
    pub delta: f64,
    pub m: f64,
    pub gamma: f64,
    pub beta: f64,
    /// Feedback observables of the state entering this layer.
    pub a_prev: f64,
    pub b_prev: f64,
    pub c_prev: f64,
    pub so_fallback: bool,
    /// Exact `<H_p>` after the layer (diagnostic, not charged).
    pub cost_after_layer: f64,
    pub evals_this_layer: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FalqonTrace {
    pub layers: Vec<LayerRecord>,
    pub final_state: Statevector,
}

impl FalqonTrace {
    pub fn gammas(&self) -> Vec<f64> {
        self.layers.iter().map(|l| l.gamma).collect()
    }

    pub fn betas(&self) -> Vec<f64> {
        self.layers.iter().map(|l| l.beta).collect()
    }

    /// Exact `<H_p>` of the final state; `None` for an empty trace.
    pub fn final_cost(&self) -> Option<f64> {
        self.layers.last().map(|l| l.cost_after_layer)
    }

    /// One JSON object per layer, newline terminated.
    pub fn write_json_lines<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for layer in &self.layers {
            serde_json::to_writer(&mut out, layer)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FalqonRun {
    pub trace: FalqonTrace,
    /// Circuit evaluations: feedback measurements plus, in optimal mode,
    /// every candidate-layer cost evaluation.
    pub n_evals: usize,
}

fn check_config(config: &FalqonConfig, mode: FalqonMode) -> Result<()> {
    if config.mode != mode {
        return Err(Error::InvalidArgument(format!(
            "expected a {mode:?} FALQON config, got {:?}",
            config.mode
        )));
    }
    if !(config.delta_init.is_finite() && config.m_init.is_finite()) {
        return Err(Error::InvalidArgument("delta and m must be finite".into()));
    }
    if config.so_fallback_threshold.is_nan() || config.so_fallback_threshold <= 0.0 {
        return Err(Error::InvalidArgument(
            "fallback threshold must be positive".into(),
        ));
    }
    Ok(())
}

fn apply_layer(
    state: &mut Statevector,
    problem: &IsingProblem,
    gamma: f64,
    beta: f64,
) -> Result<()> {
    state.apply_problem_layer(problem, LayerAngle::Uniform(gamma))?;
    state.apply_driver_layer(LayerAngle::Uniform(beta))
}

/// FALQON with a fixed step `delta` and gain `w` at every layer.
pub fn run_standard_falqon(
    problem: &IsingProblem,
    config: &FalqonConfig,
    seed: u64,
) -> Result<FalqonRun> {
    check_config(config, FalqonMode::Standard)?;
    let driver = DriverOperator::new(problem.n_qubits());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = Statevector::plus_state(problem.n_qubits())?;
    let mut layers = Vec::with_capacity(config.n_layers);
    let (delta, m) = (config.delta_init, config.m_init);
    for k in 1..=config.n_layers {
        let abc = estimate_commutators(problem, &driver, &state, config.shots, &mut rng)?;
        let beta = beta_from_feedback(config.order, abc, delta, m, config.so_fallback_threshold);
        apply_layer(&mut state, problem, delta, beta).map_err(|e| at_layer(k, e))?;
        layers.push(LayerRecord {
            k,
            delta,
            m,
            gamma: delta,
            beta,
            a_prev: abc.a,
            b_prev: abc.b,
            c_prev: abc.c,
            so_fallback: config.order == FalqonOrder::SecondOrder
                && so_falls_back(abc.b, delta, config.so_fallback_threshold),
            cost_after_layer: state.expectation(problem)?,
            evals_this_layer: config.order.measurements_per_layer(),
        });
    }
    let n_evals = layers.iter().map(|l| l.evals_this_layer).sum();
    Ok(FalqonRun {
        trace: FalqonTrace {
            layers,
            final_state: state,
        },
        n_evals,
    })
}

/// FALQON with `(delta_k, M_k)` chosen per layer by Powell's method.
pub fn run_optimal_falqon(
    problem: &IsingProblem,
    config: &FalqonConfig,
    seed: u64,
) -> Result<FalqonRun> {
    check_config(config, FalqonMode::Optimal)?;
    let driver = DriverOperator::new(problem.n_qubits());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = Statevector::plus_state(problem.n_qubits())?;
    let mut layers = Vec::with_capacity(config.n_layers);
    let threshold = config.so_fallback_threshold;
    for k in 1..=config.n_layers {
        let abc = estimate_commutators(problem, &driver, &state, config.shots, &mut rng)?;
        let entering = state.clone();
        let objective = |p: &[f64]| -> Result<f64> {
            let mut candidate = entering.clone();
            let beta = beta_from_feedback(config.order, abc, p[0], p[1], threshold);
            apply_layer(&mut candidate, problem, p[0], beta)?;
            estimate_energy(problem, &candidate, config.shots, &mut rng)
        };
        let result = powell_minimize(
            objective,
            &[config.delta_init, config.m_init],
            &config.optimizer_budget,
        )
        .map_err(|e| at_layer(k, e))?;
        let (delta, m) = (result.best_params[0], result.best_params[1]);
        let beta = beta_from_feedback(config.order, abc, delta, m, threshold);
        apply_layer(&mut state, problem, delta, beta).map_err(|e| at_layer(k, e))?;
        layers.push(LayerRecord {
            k,
            delta,
            m,
            gamma: delta,
            beta,
            a_prev: abc.a,
            b_prev: abc.b,
            c_prev: abc.c,
            so_fallback: config.order == FalqonOrder::SecondOrder
                && so_falls_back(abc.b, delta, threshold),
            cost_after_layer: state.expectation(problem)?,
            evals_this_layer: config.order.measurements_per_layer() + result.n_evals,
        });
    }
    let n_evals = layers.iter().map(|l| l.evals_this_layer).sum();
    Ok(FalqonRun {
        trace: FalqonTrace {
            layers,
            final_state: state,
        },
        n_evals,
    })
}

/// Dispatches on `config.mode`.
pub fn run_falqon(problem: &IsingProblem, config: &FalqonConfig, seed: u64) -> Result<FalqonRun> {
    match config.mode {
        FalqonMode::Standard => run_standard_falqon(problem, config, seed),
        FalqonMode::Optimal => run_optimal_falqon(problem, config, seed),
    }
}

fn at_layer(layer: usize, source: Error) -> Error {
    Error::Layer {
        layer,
        source: Box::new(source),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc(a: f64, b: f64, c: f64) -> CommutatorExpectations {
        CommutatorExpectations { a, b, c }
    }

    #[test]
    fn fo_zero_feedback() {
        for (delta, m) in [(0.03, 1.0), (-2.0, 5.0), (0.5, -1.0)] {
            assert_eq!(
                beta_from_feedback(FalqonOrder::FirstOrder, abc(0.0, 1.0, 1.0), delta, m, 1e-12),
                0.0
            );
        }
    }

    #[test]
    fn fo_arithmetic() {
        let beta = beta_from_feedback(
            FalqonOrder::FirstOrder,
            abc(2.0, 0.0, 0.0),
            0.03,
            1.0,
            1e-12,
        );
        assert!((beta + 0.06).abs() < 1e-15);
    }

    #[test]
    fn so_falls_back_on_small_b() {
        let x = abc(1.7, 1e-13, 4.0);
        let so = beta_from_feedback(FalqonOrder::SecondOrder, x, 0.4, 1.3, 1e-12);
        let fo = beta_from_feedback(FalqonOrder::FirstOrder, x, 0.4, 1.3, 1e-12);
        assert_eq!(so, fo);
        // zero step is covered by the |B delta| clause
        let x = abc(1.7, 2.0, 4.0);
        assert_eq!(
            beta_from_feedback(FalqonOrder::SecondOrder, x, 0.0, 1.0, 1e-12),
            -0.0
        );
    }

    #[test]
    fn so_formula() {
        let x = abc(1.0, 2.0, -3.0);
        let (delta, m) = (0.5, 2.0);
        let expected = -m * ((1.0_f64 - 3.0 * 0.5) / (2.0 * 2.0 * 0.5)).abs() * delta;
        assert_eq!(
            beta_from_feedback(FalqonOrder::SecondOrder, x, delta, m, 1e-12),
            expected
        );
    }

    #[test]
    fn config_mode_is_checked() {
        let p = IsingProblem::new(crate::graphs::Graph::complete(4).unwrap()).unwrap();
        let cfg = FalqonConfig::optimal(FalqonOrder::FirstOrder, 1);
        assert!(run_standard_falqon(&p, &cfg, 0).is_err());
        let cfg = FalqonConfig::standard(FalqonOrder::FirstOrder, 1);
        assert!(run_optimal_falqon(&p, &cfg, 0).is_err());
    }

    fn problem(g: crate::graphs::Graph) -> IsingProblem {
        IsingProblem::new(g).unwrap()
    }

    fn six_vertex_cubic() -> Vec<IsingProblem> {
        crate::graphs::enumerate_cubic_graphs(6)
            .unwrap()
            .into_iter()
            .map(problem)
            .collect()
    }

    fn success(p: &IsingProblem, state: &Statevector) -> f64 {
        let sol = crate::graphs::exact_maxcut(p.graph()).unwrap();
        let probs = state.probabilities();
        sol.optimal_bitstrings.iter().map(|&x| probs[x]).sum()
    }

    #[test]
    fn first_layer_has_no_driver() {
        for p in six_vertex_cubic() {
            for order in [FalqonOrder::FirstOrder, FalqonOrder::SecondOrder] {
                for cfg in [
                    FalqonConfig::standard(order, 3),
                    FalqonConfig::optimal(order, 2),
                ] {
                    let run = run_falqon(&p, &cfg, 0).unwrap();
                    assert_eq!(run.trace.layers[0].beta, 0.0);
                    assert!(run.trace.layers[0].a_prev.abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn zero_layers_is_uniform() {
        for p in six_vertex_cubic() {
            let run =
                run_standard_falqon(&p, &FalqonConfig::standard(FalqonOrder::FirstOrder, 0), 0)
                    .unwrap();
            let sol = crate::graphs::exact_maxcut(p.graph()).unwrap();
            let expected = sol.optimal_bitstrings.len() as f64 / 64.0;
            assert!((success(&p, &run.trace.final_state) - expected).abs() < 1e-12);
            assert_eq!(run.n_evals, 0);
            assert!(run.trace.final_cost().is_none());
        }
    }

    #[test]
    fn small_steps_decrease_cost() {
        for p in six_vertex_cubic() {
            let cfg = FalqonConfig {
                delta_init: 0.001,
                ..FalqonConfig::standard(FalqonOrder::FirstOrder, 50)
            };
            let run = run_standard_falqon(&p, &cfg, 0).unwrap();
            let costs: Vec<f64> = run
                .trace
                .layers
                .iter()
                .map(|l| l.cost_after_layer)
                .collect();
            for w in costs.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "{} -> {}", w[0], w[1]);
            }
            assert!(costs[49] < 0.0);
        }
    }

    #[test]
    fn trace_accounting() {
        let p = &six_vertex_cubic()[0];
        for order in [FalqonOrder::FirstOrder, FalqonOrder::SecondOrder] {
            let run = run_standard_falqon(p, &FalqonConfig::standard(order, 7), 0).unwrap();
            assert_eq!(run.trace.layers.len(), 7);
            assert_eq!(run.n_evals, 7 * order.measurements_per_layer());
            for (i, l) in run.trace.layers.iter().enumerate() {
                assert_eq!(l.k, i + 1);
                assert_eq!(l.gamma, l.delta);
                assert_eq!(
                    (l.delta, l.m),
                    (FalqonConfig::standard(order, 1).delta_init, 1.0)
                );
            }
            let run = run_optimal_falqon(p, &FalqonConfig::optimal(order, 4), 0).unwrap();
            assert_eq!(run.trace.layers.len(), 4);
            assert_eq!(
                run.n_evals,
                run.trace
                    .layers
                    .iter()
                    .map(|l| l.evals_this_layer)
                    .sum::<usize>()
            );
            for l in &run.trace.layers {
                assert_eq!(l.gamma, l.delta);
                assert!(l.evals_this_layer > order.measurements_per_layer());
            }
        }
    }

    #[test]
    fn first_optimal_layer_is_flat_in_gain() {
        let p = &six_vertex_cubic()[1];
        let driver = DriverOperator::new(6);
        let plus = Statevector::plus_state(6).unwrap();
        let abc = crate::hamiltonians::commutator_expectations(p, &driver, &plus).unwrap();
        for order in [FalqonOrder::FirstOrder, FalqonOrder::SecondOrder] {
            for delta in [-1.0, 0.03, 0.5, 2.0] {
                let costs: Vec<f64> = [-3.0, 0.0, 1.0, 7.5]
                    .iter()
                    .map(|&m| {
                        let mut s = plus.clone();
                        let beta = beta_from_feedback(order, abc, delta, m, SO_FALLBACK_THRESHOLD);
                        apply_layer(&mut s, p, delta, beta).unwrap();
                        s.expectation(p).unwrap()
                    })
                    .collect();
                for c in &costs {
                    assert!((c - costs[0]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn single_edge_matches_grid() {
        let p = problem(crate::graphs::Graph::new(2, [(0, 1)]).unwrap());
        let run =
            run_optimal_falqon(&p, &FalqonConfig::optimal(FalqonOrder::FirstOrder, 1), 0).unwrap();
        let plus = Statevector::plus_state(2).unwrap();
        let grid_min = (0..=4000)
            .map(|i| {
                let delta = -2.0 + i as f64 * 1e-3;
                let mut s = plus.clone();
                apply_layer(&mut s, &p, delta, 0.0).unwrap();
                s.expectation(&p).unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((run.trace.final_cost().unwrap() - grid_min).abs() < 1e-3);
    }

    #[test]
    fn optimal_layer_beats_standard_step() {
        let driver = DriverOperator::new(6);
        for p in six_vertex_cubic() {
            for order in [FalqonOrder::FirstOrder, FalqonOrder::SecondOrder] {
                let cfg = FalqonConfig::optimal(order, 6);
                let run = run_optimal_falqon(&p, &cfg, 0).unwrap();
                let mut state = Statevector::plus_state(6).unwrap();
                for l in &run.trace.layers {
                    let abc =
                        crate::hamiltonians::commutator_expectations(&p, &driver, &state).unwrap();
                    let mut standard = state.clone();
                    let beta = beta_from_feedback(order, abc, 0.03, 1.0, SO_FALLBACK_THRESHOLD);
                    apply_layer(&mut standard, &p, 0.03, beta).unwrap();
                    let reference = standard.expectation(&p).unwrap();
                    assert!(
                        l.cost_after_layer
                            <= reference + cfg.optimizer_budget.line_search_tolerance
                    );
                    apply_layer(&mut state, &p, l.gamma, l.beta).unwrap();
                }
            }
        }
    }

    #[test]
    fn so_without_curvature_matches_fo() {
        // a threshold above every |B| forces the fallback at each layer
        let p = &six_vertex_cubic()[0];
        for mode in [FalqonMode::Standard, FalqonMode::Optimal] {
            let base = FalqonConfig {
                mode,
                delta_init: 0.2,
                m_init: 1.0,
                ..FalqonConfig::standard(FalqonOrder::FirstOrder, 5)
            };
            let fo = run_falqon(p, &base, 0).unwrap();
            let so_cfg = FalqonConfig {
                order: FalqonOrder::SecondOrder,
                so_fallback_threshold: 1e12,
                ..base
            };
            let so = run_falqon(p, &so_cfg, 0).unwrap();
            assert_eq!(fo.trace.final_state, so.trace.final_state);
            assert!(so.trace.layers.iter().all(|l| l.so_fallback));
            assert_eq!(fo.trace.betas(), so.trace.betas());
        }
    }

    #[test]
    fn exact_mode_is_deterministic() {
        let p = &six_vertex_cubic()[1];
        let cfg = FalqonConfig::optimal(FalqonOrder::SecondOrder, 4);
        assert_eq!(
            run_falqon(p, &cfg, 1).unwrap(),
            run_falqon(p, &cfg, 99).unwrap()
        );
    }

    #[test]
    fn shot_mode_is_seeded() {
        let p = &six_vertex_cubic()[0];
        let cfg =
            FalqonConfig::optimal(FalqonOrder::FirstOrder, 3).with_shots(ShotPolicy::Shots(256));
        let a = run_falqon(p, &cfg, 5).unwrap();
        assert_eq!(a, run_falqon(p, &cfg, 5).unwrap());
        assert_ne!(
            a.trace.betas(),
            run_falqon(p, &cfg, 6).unwrap().trace.betas()
        );
    }

    #[test]
    fn json_lines_export() {
        let p = &six_vertex_cubic()[0];
        let run = run_standard_falqon(p, &FalqonConfig::standard(FalqonOrder::SecondOrder, 3), 0)
            .unwrap();
        let mut buf = Vec::new();
        run.trace.write_json_lines(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let parsed: Vec<LayerRecord> = text
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(parsed, run.trace.layers);
    }
}
