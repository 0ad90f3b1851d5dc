//! Statevector simulation and classical optimization for feedback-based
//! quantum optimization (FALQON), its per-layer optimized variant, and
//! QAOA / multi-angle QAOA on unweighted MaxCut instances.
//!
//! Conventions shared by every module:
//!
//! * qubit `j` is bit `j` of a basis index (little-endian), and qubit `j`
//!   is vertex `j` of the graph;
//! * bit value 0 maps to spin `z = +1`, bit value 1 to `z = -1`;
//! * `H_p = sum_{(i,j) in E} Z_i Z_j`, `H_d = sum_j X_j`, start state `|+>^N`;
//! * a circuit layer applies `exp(-i gamma H_p)` first, then `exp(-i beta H_d)`.

pub mod error;
pub mod falqon;
pub mod graphs;
pub mod hamiltonians;
pub mod optimizers;
pub mod qaoa;
pub mod statevector;
pub mod stats;

pub use error::{Error, Result};
pub use falqon::{FalqonConfig, FalqonMode, FalqonOrder, FalqonRun, FalqonTrace, LayerRecord};
pub use graphs::{Graph, MaxCutSolution};
pub use hamiltonians::{CommutatorExpectations, DriverOperator, IsingProblem, LinearOperator};
pub use optimizers::{OptResult, OptimizerBudget, OptimizerKind};
pub use qaoa::{QaoaParams, QaoaVariant, WarmStartKind, WarmStartSource};
pub use statevector::{LayerAngle, ShotPolicy, Statevector};
pub use stats::{Metric, RunRecord, TestResult, WilcoxonResult};
