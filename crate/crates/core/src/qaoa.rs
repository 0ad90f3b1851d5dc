//! QAOA and multi-angle QAOA: parameter layout, cost evaluation, classical
//! optimization and warm starts from FALQON traces.
//!
//! Parameters are flattened layer-major with the problem angles of a layer
//! before its driver angles. Multi-angle problem angles follow the graph's
//! sorted edge order; multi-angle driver angles follow qubit order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::falqon::{FalqonOrder, FalqonTrace};
use crate::graphs::Graph;
use crate::hamiltonians::{estimate_energy, IsingProblem};
use crate::optimizers::{
    gradient_descent_minimize, powell_minimize, OptResult, OptimizerBudget, OptimizerKind,
};
use crate::statevector::{LayerAngle, ShotPolicy, Statevector};

/// Start value of every angle for the fixed initialization.
pub const FIXED_INIT_ANGLE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QaoaVariant {
    Standard,
    MultiAngle,
}

impl QaoaVariant {
    /// Problem and driver angles per layer on `graph`.
    pub fn widths(self, graph: &Graph) -> (usize, usize) {
        match self {
            Self::Standard => (1, 1),
            Self::MultiAngle => (graph.n_edges(), graph.n_vertices()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    variant: QaoaVariant,
    n_layers: usize,
    gamma_width: usize,
    beta_width: usize,
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

impl QaoaParams {
    /// `gammas` holds `n_layers * gamma_width` entries, layer by layer, and
    /// likewise for `betas`.
    pub fn new(
        variant: QaoaVariant,
        graph: &Graph,
        gammas: Vec<f64>,
        betas: Vec<f64>,
    ) -> Result<Self> {
        let (gw, bw) = variant.widths(graph);
        if gw == 0 || bw == 0 {
            return Err(Error::InvalidArgument(
                "the graph needs at least one edge".into(),
            ));
        }
        if !gammas.len().is_multiple_of(gw)
            || !betas.len().is_multiple_of(bw)
            || gammas.len() / gw != betas.len() / bw
        {
            return Err(Error::DimensionMismatch(format!(
                "{variant:?} params: {} problem angles (width {gw}) and {} driver angles (width {bw})",
                gammas.len(),
                betas.len()
            )));
        }
        let params = Self {
            variant,
            n_layers: gammas.len() / gw,
            gamma_width: gw,
            beta_width: bw,
            gammas,
            betas,
        };
        params.check_finite()?;
        Ok(params)
    }

    /// Every angle set to `value`.
    pub fn constant(
        variant: QaoaVariant,
        graph: &Graph,
        n_layers: usize,
        value: f64,
    ) -> Result<Self> {
        let (gw, bw) = variant.widths(graph);
        Self::new(
            variant,
            graph,
            vec![value; n_layers * gw],
            vec![value; n_layers * bw],
        )
    }

    /// One scalar pair per layer, broadcast over each layer's angle vector.
    pub fn from_layer_angles(
        variant: QaoaVariant,
        graph: &Graph,
        gammas: &[f64],
        betas: &[f64],
    ) -> Result<Self> {
        if gammas.len() != betas.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} problem vs {} driver angles",
                gammas.len(),
                betas.len()
            )));
        }
        let (gw, bw) = variant.widths(graph);
        let expand =
            |v: &[f64], w: usize| v.iter().flat_map(|&x| std::iter::repeat_n(x, w)).collect();
        Self::new(variant, graph, expand(gammas, gw), expand(betas, bw))
    }

    pub fn variant(&self) -> QaoaVariant {
        self.variant
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn n_params(&self) -> usize {
        self.gammas.len() + self.betas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// Problem angles of layer `k` (0-based).
    pub fn layer_gammas(&self, k: usize) -> &[f64] {
        &self.gammas[k * self.gamma_width..(k + 1) * self.gamma_width]
    }

    /// Driver angles of layer `k` (0-based).
    pub fn layer_betas(&self, k: usize) -> &[f64] {
        &self.betas[k * self.beta_width..(k + 1) * self.beta_width]
    }

    /// Layer-major vector, problem angles before driver angles in each layer.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for k in 0..self.n_layers {
            out.extend_from_slice(self.layer_gammas(k));
            out.extend_from_slice(self.layer_betas(k));
        }
        out
    }

    /// Inverse of [`flatten`](Self::flatten) with this parameter set's shape.
    pub fn with_flat(&self, flat: &[f64]) -> Result<Self> {
        if flat.len() != self.n_params() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} parameters",
                flat.len(),
                self.n_params()
            )));
        }
        let (gw, bw) = (self.gamma_width, self.beta_width);
        let mut gammas = Vec::with_capacity(self.gammas.len());
        let mut betas = Vec::with_capacity(self.betas.len());
        for layer in flat.chunks_exact(gw + bw) {
            gammas.extend_from_slice(&layer[..gw]);
            betas.extend_from_slice(&layer[gw..]);
        }
        let params = Self {
            gammas,
            betas,
            ..self.clone()
        };
        params.check_finite()?;
        Ok(params)
    }

    /// Confirms the shape fits `graph`.
    pub fn check_graph(&self, graph: &Graph) -> Result<()> {
        if self.variant.widths(graph) != (self.gamma_width, self.beta_width) {
            return Err(Error::DimensionMismatch(format!(
                "{:?} params of widths ({}, {}) do not fit a graph with {} vertices and {} edges",
                self.variant,
                self.gamma_width,
                self.beta_width,
                graph.n_vertices(),
                graph.n_edges()
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("parameters serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Self = serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("bad parameter JSON: {e}")))?;
        let consistent = raw.gamma_width > 0
            && raw.beta_width > 0
            && raw.gammas.len() == raw.n_layers * raw.gamma_width
            && raw.betas.len() == raw.n_layers * raw.beta_width
            && (raw.variant == QaoaVariant::MultiAngle
                || (raw.gamma_width, raw.beta_width) == (1, 1));
        if !consistent {
            return Err(Error::DimensionMismatch(
                "parameter JSON has inconsistent lengths".into(),
            ));
        }
        raw.check_finite()?;
        Ok(raw)
    }

    fn check_finite(&self) -> Result<()> {
        match self
            .gammas
            .iter()
            .chain(&self.betas)
            .find(|x| !x.is_finite())
        {
            Some(&value) => Err(Error::NonFinite {
                value,
                point: self.flatten(),
            }),
            None => Ok(()),
        }
    }
}

/// `|+>^N` followed by every layer of `params`.
pub fn qaoa_state(problem: &IsingProblem, params: &QaoaParams) -> Result<Statevector> {
    params.check_graph(problem.graph())?;
    let mut state = Statevector::plus_state(problem.n_qubits())?;
    for k in 0..params.n_layers() {
        let (g, b) = (params.layer_gammas(k), params.layer_betas(k));
        match params.variant() {
            QaoaVariant::Standard => {
                state.apply_problem_layer(problem, LayerAngle::Uniform(g[0]))?;
                state.apply_driver_layer(LayerAngle::Uniform(b[0]))?;
            }
            QaoaVariant::MultiAngle => {
                state.apply_problem_layer(problem, LayerAngle::PerTerm(g))?;
                state.apply_driver_layer(LayerAngle::PerTerm(b))?;
            }
        }
    }
    Ok(state)
}

/// `<H_p>` of the prepared state: exact, or a sample mean whose sampling
/// seed is `seed`.
pub fn qaoa_cost(
    problem: &IsingProblem,
    params: &QaoaParams,
    policy: ShotPolicy,
    seed: u64,
) -> Result<f64> {
    let state = qaoa_state(problem, params)?;
    estimate_energy(
        problem,
        &state,
        policy,
        &mut ChaCha8Rng::seed_from_u64(seed),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WarmStartKind {
    Fixed,
    FalqonStandard,
    FalqonOptimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarmStartSource {
    pub kind: WarmStartKind,
    pub falqon_order: Option<FalqonOrder>,
    pub fixed_value: f64,
}

impl WarmStartSource {
    pub fn fixed() -> Self {
        Self {
            kind: WarmStartKind::Fixed,
            falqon_order: None,
            fixed_value: FIXED_INIT_ANGLE,
        }
    }

    pub fn falqon(kind: WarmStartKind, order: FalqonOrder) -> Self {
        Self {
            kind,
            falqon_order: Some(order),
            fixed_value: FIXED_INIT_ANGLE,
        }
    }
}

/// Initial QAOA parameters for `n_layers` layers: constant angles, or the
/// first `n_layers` FALQON angles broadcast to the variant's widths.
pub fn warm_start_params(
    source: &WarmStartSource,
    trace: Option<&FalqonTrace>,
    variant: QaoaVariant,
    n_layers: usize,
    graph: &Graph,
) -> Result<QaoaParams> {
    if source.kind == WarmStartKind::Fixed {
        return QaoaParams::constant(variant, graph, n_layers, source.fixed_value);
    }
    let trace = trace.ok_or(Error::InsufficientTrace {
        available: 0,
        required: n_layers,
    })?;
    if trace.layers.len() < n_layers {
        return Err(Error::InsufficientTrace {
            available: trace.layers.len(),
            required: n_layers,
        });
    }
    let layers = &trace.layers[..n_layers];
    let gammas: Vec<f64> = layers.iter().map(|l| l.gamma).collect();
    let betas: Vec<f64> = layers.iter().map(|l| l.beta).collect();
    QaoaParams::from_layer_angles(variant, graph, &gammas, &betas)
}

/// Minimizes [`qaoa_cost`] from `init`.
///
/// `n_evals` counts every cost evaluation. With a zero iteration budget the
/// start is evaluated once and returned unchanged. Gradient descent spends
/// `2 * n_params` evaluations per step plus one final evaluation of its last
/// iterate; Powell's count already includes the start. In shot mode each
/// evaluation draws its own sampling seed from a generator seeded by `seed`.
pub fn optimize_qaoa(
    problem: &IsingProblem,
    init: &QaoaParams,
    optimizer: OptimizerKind,
    budget: &OptimizerBudget,
    policy: ShotPolicy,
    seed: u64,
) -> Result<(QaoaParams, OptResult)> {
    init.check_graph(problem.graph())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cost = |x: &[f64]| -> Result<f64> {
        let params = init.with_flat(x)?;
        qaoa_cost(problem, &params, policy, rng.next_u64())
    };
    let x0 = init.flatten();
    let result = if budget.max_iterations == 0 {
        let value = cost(&x0)?;
        OptResult {
            best_params: x0,
            best_value: Some(value),
            n_evals: 1,
            iterations: 0,
            converged: false,
        }
    } else {
        match optimizer {
            OptimizerKind::Powell => powell_minimize(&mut cost, &x0, budget)?,
            OptimizerKind::GradientDescent {
                learning_rate,
                fd_step,
            } => {
                let mut r =
                    gradient_descent_minimize(&mut cost, &x0, budget, learning_rate, fd_step)?;
                r.best_value = Some(cost(&r.best_params)?);
                r.n_evals += 1;
                r
            }
        }
    };
    Ok((init.with_flat(&result.best_params)?, result))
}
