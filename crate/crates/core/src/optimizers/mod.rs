//! Classical optimizers with exact objective-call accounting.
//!
//! Objectives are `FnMut(&[f64]) -> Result<f64>`; every call is counted,
//! including calls that end a run through an error.

mod gradient;
mod powell;

pub use gradient::gradient_descent_minimize;
pub use powell::powell_minimize;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stopping rules and line-search settings shared by both optimizers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerBudget {
    /// Outer iterations: Powell direction sweeps, or gradient steps.
    pub max_iterations: usize,
    /// Optional hard cap on objective calls. The run ends with the
    /// incumbent once the cap is reached.
    pub max_evaluations: Option<usize>,
    /// Absolute bracket width, in parameter space, at which a line search stops.
    pub line_search_tolerance: f64,
    /// Powell stops once an outer iteration improves the value by less than
    /// this relative amount.
    pub parameter_tolerance: f64,
    pub initial_step: f64,
    pub expansion_factor: f64,
    pub max_bracket_probes: usize,
}

impl Default for OptimizerBudget {
    fn default() -> Self {
        Self {
            max_iterations: 20,
            max_evaluations: None,
            line_search_tolerance: 1e-4,
            parameter_tolerance: 1e-8,
            initial_step: 1.0,
            expansion_factor: 2.0,
            max_bracket_probes: 50,
        }
    }
}

impl OptimizerBudget {
    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn with_max_evaluations(mut self, max_evaluations: Option<usize>) -> Self {
        self.max_evaluations = max_evaluations;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OptimizerKind {
    Powell,
    GradientDescent { learning_rate: f64, fd_step: f64 },
}

impl OptimizerKind {
    pub const DEFAULT_LEARNING_RATE: f64 = 0.01;
    pub const DEFAULT_FD_STEP: f64 = 1e-3;

    pub fn gradient_descent() -> Self {
        Self::GradientDescent {
            learning_rate: Self::DEFAULT_LEARNING_RATE,
            fd_step: Self::DEFAULT_FD_STEP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub best_params: Vec<f64>,
    /// Objective value cached from the call that produced `best_params`.
    /// Gradient descent never evaluates its own iterates, so it reports
    /// `None`.
    pub best_value: Option<f64>,
    pub n_evals: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Why an objective call did not produce a value.
#[derive(Debug)]
pub(crate) enum Halt {
    Budget,
    Failed(Error),
}

impl From<Error> for Halt {
    fn from(e: Error) -> Self {
        Halt::Failed(e)
    }
}

/// Counting wrapper that also tracks the best point seen so far.
pub(crate) struct Counted<F> {
    objective: F,
    cap: Option<usize>,
    pub evals: usize,
    pub best: Option<(Vec<f64>, f64)>,
}

impl<F> Counted<F>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    pub fn new(objective: F, cap: Option<usize>) -> Self {
        Self {
            objective,
            cap,
            evals: 0,
            best: None,
        }
    }

    pub fn eval(&mut self, x: &[f64]) -> std::result::Result<f64, Halt> {
        if self.cap.is_some_and(|cap| self.evals >= cap) {
            return Err(Halt::Budget);
        }
        self.evals += 1;
        let value = (self.objective)(x)?;
        if !value.is_finite() {
            return Err(Halt::Failed(Error::NonFinite {
                value,
                point: x.to_vec(),
            }));
        }
        if self.best.as_ref().is_none_or(|(_, b)| value < *b) {
            self.best = Some((x.to_vec(), value));
        }
        Ok(value)
    }
}

pub(crate) fn check_start(x0: &[f64]) -> Result<()> {
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "start point {x0:?} is not finite"
        )));
    }
    Ok(())
}
