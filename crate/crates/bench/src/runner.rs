//! Plan execution: a worker pool computes cells, a single writer appends
//! them to the store in the plan's canonical order.

use std::collections::{BTreeMap, HashSet};
use std::fs::OpenOptions;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;

use crate::cell::{run_cell, CellSettings};
use crate::error::{io_err, BenchError, Result};
use crate::plan::BenchmarkPlan;
use crate::seeds::cell_seed;
use crate::store::{CellFailure, Manifest, Store, StoredCell};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Continue a store written for the same plan.
    pub resume: bool,
    /// Report each finished cell on stderr.
    pub verbose: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunReport {
    pub total: usize,
    pub skipped: usize,
    pub computed: usize,
    pub failed: usize,
}

struct Task {
    method: usize,
    /// Position among the method's pending cells.
    slot: usize,
    instance: usize,
    depth: usize,
}

struct Finished {
    method: usize,
    slot: usize,
    cell: StoredCell,
    seconds: f64,
}

/// Runs every cell of `plan` that the store does not already hold.
pub fn run_plan(plan: &BenchmarkPlan, options: RunOptions) -> Result<RunReport> {
    plan.validate()?;
    let instances = plan.prepare_instances()?;
    let manifest = Manifest::new(plan, &instances);
    let store = Store::new(&plan.out);
    match store.manifest()? {
        Some(_) if !options.resume => return Err(BenchError::StoreExists(plan.out.clone())),
        Some(existing) => {
            if let Some(field) = existing.first_difference(&manifest) {
                return Err(BenchError::PlanMismatch {
                    path: plan.out.clone(),
                    field: field.into(),
                });
            }
        }
        None => store.write_manifest(&manifest)?,
    }

    let method_ids: Vec<String> = plan.methods.iter().map(|m| m.id()).collect();
    let mut tasks = Vec::new();
    let mut pending_per_method = Vec::with_capacity(plan.methods.len());
    let mut report = RunReport {
        total: manifest.grid_size(),
        ..RunReport::default()
    };
    for (mi, id) in method_ids.iter().enumerate() {
        let done: HashSet<(usize, usize)> = store
            .recover_cells(id)?
            .iter()
            .map(StoredCell::key)
            .collect();
        let mut slot = 0;
        for (ii, inst) in instances.iter().enumerate() {
            for &depth in &plan.depths {
                if done.contains(&(inst.id, depth)) {
                    report.skipped += 1;
                } else {
                    tasks.push(Task {
                        method: mi,
                        slot,
                        instance: ii,
                        depth,
                    });
                    slot += 1;
                }
            }
        }
        pending_per_method.push(slot);
    }
    if tasks.is_empty() {
        return Ok(report);
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| {
            BenchError::InvalidPlan(format!("cannot start {} workers: {e}", plan.workers))
        })?;
    let settings = CellSettings {
        cost: plan.cost_policy(),
        success: plan.success_policy(),
        gradient: plan.gradient_descent(),
    };
    let cancelled = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<Finished>();

    std::thread::scope(|scope| {
        let tasks = &tasks;
        let cancelled = &cancelled;
        let instances = &instances;
        let method_ids = &method_ids;
        scope.spawn(move || {
            pool.install(|| {
                tasks.par_iter().for_each_with(tx, |tx, task| {
                    if cancelled.load(Ordering::Relaxed) {
                        return;
                    }
                    let method = &plan.methods[task.method];
                    let inst = &instances[task.instance];
                    let seed = cell_seed(
                        plan.base_seed,
                        &method_ids[task.method],
                        inst.id,
                        task.depth,
                    );
                    let start = Instant::now();
                    let outcome = catch_unwind(AssertUnwindSafe(|| {
                        run_cell(method, inst, task.depth, settings, seed)
                    }));
                    let seconds = start.elapsed().as_secs_f64();
                    let cell = match outcome {
                        Ok(Ok(mut record)) => {
                            record.wall_time = seconds;
                            StoredCell::Ok(record)
                        }
                        Ok(Err(e)) => failure(
                            &method_ids[task.method],
                            inst.id,
                            task.depth,
                            seed,
                            e.to_string(),
                        ),
                        Err(panic) => failure(
                            &method_ids[task.method],
                            inst.id,
                            task.depth,
                            seed,
                            panic_text(&panic),
                        ),
                    };
                    let _ = tx.send(Finished {
                        method: task.method,
                        slot: task.slot,
                        cell,
                        seconds,
                    });
                });
            });
        });

        let written = write_in_order(
            &store,
            method_ids,
            &pending_per_method,
            rx,
            &mut report,
            options.verbose,
        );
        if written.is_err() {
            cancelled.store(true, Ordering::Relaxed);
        }
        written
    })?;
    Ok(report)
}

fn failure(method: &str, instance: usize, depth: usize, seed: u64, error: String) -> StoredCell {
    StoredCell::Failed(CellFailure {
        method: method.to_string(),
        instance,
        depth,
        seed,
        error,
    })
}

fn panic_text(panic: &Box<dyn std::any::Any + Send>) -> String {
    let msg = panic
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| panic.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into());
    format!("panic: {msg}")
}

/// Drains finished cells, holding each one back until every earlier cell
/// of the same method has been written.
fn write_in_order(
    store: &Store,
    method_ids: &[String],
    pending: &[usize],
    rx: mpsc::Receiver<Finished>,
    report: &mut RunReport,
    verbose: bool,
) -> Result<()> {
    let timings_path = store.timings_path();
    let fresh = !timings_path.exists();
    let mut timings = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&timings_path)
        .map_err(io_err(&timings_path))?;
    if fresh {
        writeln!(timings, "method,instance,depth,seconds").map_err(io_err(&timings_path))?;
    }
    let mut next = vec![0usize; method_ids.len()];
    let mut held: Vec<BTreeMap<usize, StoredCell>> = vec![BTreeMap::new(); method_ids.len()];
    let total_pending: usize = pending.iter().sum();
    let mut received = 0;
    for done in rx {
        received += 1;
        let (instance, depth) = done.cell.key();
        writeln!(
            timings,
            "{},{instance},{depth},{:.6}",
            method_ids[done.method], done.seconds
        )
        .map_err(io_err(&timings_path))?;
        if verbose {
            let status = match &done.cell {
                StoredCell::Ok(r) => {
                    format!("p_success {:.4}, {} evaluations", r.p_success, r.n_evals)
                }
                StoredCell::Failed(f) => format!("failed: {}", f.error),
            };
            eprintln!(
                "[{received}/{total_pending}] {} instance {instance} depth {depth}: {status} ({:.2} s)",
                method_ids[done.method], done.seconds
            );
        }
        held[done.method].insert(done.slot, done.cell);
        let m = done.method;
        while let Some(cell) = held[m].remove(&next[m]) {
            store.append_cell(&method_ids[m], &cell)?;
            match cell {
                StoredCell::Ok(_) => report.computed += 1,
                StoredCell::Failed(_) => report.failed += 1,
            }
            next[m] += 1;
        }
    }
    Ok(())
}
