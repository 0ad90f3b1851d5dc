//! Execution of one (method, instance, depth) cell.

use falqon::falqon::{run_falqon, FalqonTrace};
use falqon::qaoa::{optimize_qaoa, qaoa_state, warm_start_params};
use falqon::stats::measure_success;
use falqon::{RunRecord, ShotPolicy, Statevector};

use crate::methods::{FalqonMethod, GradientSettings, MethodSpec, QaoaMethod};
use crate::plan::Instance;
use crate::seeds::stream_seed;

/// Plan-wide settings every cell runs with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSettings {
    pub cost: ShotPolicy,
    pub success: ShotPolicy,
    pub gradient: GradientSettings,
}

impl CellSettings {
    pub fn exact() -> Self {
        Self {
            cost: ShotPolicy::Exact,
            success: ShotPolicy::Exact,
            gradient: GradientSettings::default(),
        }
    }
}

struct Prepared {
    state: Statevector,
    n_evals: usize,
    final_params: Vec<f64>,
}

/// Runs the method at `depth` on `instance` and scores the final state.
pub fn run_cell(
    method: &MethodSpec,
    instance: &Instance,
    depth: usize,
    settings: CellSettings,
    seed: u64,
) -> falqon::Result<RunRecord> {
    let prepared = match *method {
        MethodSpec::Falqon(f) => {
            let (trace, n_evals) = falqon_stage(f, instance, depth, settings.cost, seed)?;
            let final_params = interleave(&trace);
            Prepared {
                state: trace.final_state,
                n_evals,
                final_params,
            }
        }
        MethodSpec::Qaoa(q) => qaoa_stage(method, q, None, instance, depth, settings, seed)?,
        MethodSpec::WarmStart { source, target } => {
            let (trace, falqon_evals) = falqon_stage(source, instance, depth, settings.cost, seed)?;
            let mut out = qaoa_stage(
                method,
                target,
                Some(&trace),
                instance,
                depth,
                settings,
                seed,
            )?;
            out.n_evals += falqon_evals;
            out
        }
    };
    let p_success = measure_success(
        &prepared.state,
        &instance.optimum,
        settings.success,
        stream_seed(seed, "success"),
    );
    RunRecord::new(
        method.id(),
        instance.id,
        depth,
        p_success,
        prepared.n_evals as u64,
        seed,
        prepared.final_params,
    )
}

fn falqon_stage(
    method: FalqonMethod,
    instance: &Instance,
    depth: usize,
    cost: ShotPolicy,
    seed: u64,
) -> falqon::Result<(FalqonTrace, usize)> {
    let run = run_falqon(
        &instance.problem,
        &method.config(depth, cost),
        stream_seed(seed, "falqon"),
    )?;
    Ok((run.trace, run.n_evals))
}

fn qaoa_stage(
    method: &MethodSpec,
    target: QaoaMethod,
    trace: Option<&FalqonTrace>,
    instance: &Instance,
    depth: usize,
    settings: CellSettings,
    seed: u64,
) -> falqon::Result<Prepared> {
    let source = method
        .warm_start_source()
        .expect("QAOA methods have an initialization");
    let init = warm_start_params(
        &source,
        trace,
        target.variant,
        depth,
        instance.problem.graph(),
    )?;
    let (params, result) = optimize_qaoa(
        &instance.problem,
        &init,
        target.optimizer_kind(settings.gradient),
        &target.budget(),
        settings.cost,
        stream_seed(seed, "qaoa"),
    )?;
    Ok(Prepared {
        state: qaoa_state(&instance.problem, &params)?,
        n_evals: result.n_evals,
        final_params: params.flatten(),
    })
}

/// FALQON angles as `[gamma_1, beta_1, gamma_2, beta_2, ...]`.
fn interleave(trace: &FalqonTrace) -> Vec<f64> {
    trace
        .layers
        .iter()
        .flat_map(|l| [l.gamma, l.beta])
        .collect()
}
