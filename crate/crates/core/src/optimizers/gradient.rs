use super::{check_start, Counted, Halt, OptResult, OptimizerBudget};
use crate::error::{Error, Result};

/// Fixed-step gradient descent with central finite differences.
///
/// Each of `budget.max_iterations` steps costs exactly `2 * dim` objective
/// calls; `max_evaluations` is ignored. The iterates themselves are never
/// evaluated, so `best_value` is `None` and `best_params` is the last
/// iterate.
pub fn gradient_descent_minimize<F>(
    objective: F,
    x0: &[f64],
    budget: &OptimizerBudget,
    learning_rate: f64,
    fd_step: f64,
) -> Result<OptResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    check_start(x0)?;
    if !(learning_rate > 0.0 && fd_step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "learning rate {learning_rate} and finite-difference step {fd_step} must be positive"
        )));
    }
    let mut f = Counted::new(objective, None);
    let mut x = x0.to_vec();
    let mut grad = vec![0.0; x.len()];
    let mut probe = x.clone();
    for _ in 0..budget.max_iterations {
        for i in 0..x.len() {
            probe.copy_from_slice(&x);
            probe[i] = x[i] + fd_step;
            let up = f.eval(&probe).map_err(unwrap_halt)?;
            probe[i] = x[i] - fd_step;
            let down = f.eval(&probe).map_err(unwrap_halt)?;
            grad[i] = (up - down) / (2.0 * fd_step);
            if !grad[i].is_finite() {
                return Err(Error::NonFinite {
                    value: grad[i],
                    point: x.clone(),
                });
            }
        }
        for (xi, gi) in x.iter_mut().zip(&grad) {
            *xi -= learning_rate * gi;
        }
    }
    Ok(OptResult {
        best_params: x,
        best_value: None,
        n_evals: f.evals,
        iterations: budget.max_iterations,
        converged: false,
    })
}

fn unwrap_halt(h: Halt) -> Error {
    match h {
        Halt::Failed(e) => e,
        Halt::Budget => unreachable!("gradient descent runs without an evaluation cap"),
    }
}
