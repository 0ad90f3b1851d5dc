//! Benchmark harness for FALQON, Optimal FALQON and QAOA on ensembles of
//! cubic MaxCut instances: plans, a resumable result store, summary tables
//! and paired significance tests.

pub mod cell;
pub mod error;
pub mod methods;
pub mod plan;
pub mod runner;
pub mod seeds;
pub mod significance;
pub mod store;
pub mod summary;

pub use error::{BenchError, Result};
pub use methods::MethodSpec;
pub use plan::{BenchmarkPlan, EnsembleSource, Instance, PlanConfig};
pub use runner::{run_plan, RunOptions, RunReport};
pub use significance::{significance_report, SignificanceReport};
pub use store::Store;
pub use summary::{summarize, Summary};
