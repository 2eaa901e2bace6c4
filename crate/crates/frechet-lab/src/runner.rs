//! Worker pool over experiment replicates.
//!
//! Each replicate of a scaling experiment owns a fixed RNG stream derived
//! from `(size index, replicate index)`, and assembly canonicalises record
//! order, so replicates can run on any number of workers — the result is
//! bit-identical to the sequential run.  Workers take replicates in strides
//! (worker `w` handles flat indices `w, w+jobs, w+2·jobs, …`), which needs
//! no queue and balances load: the heavy largest-`n` block at the tail is
//! split evenly across workers.

use std::num::NonZeroUsize;
use std::thread;

use frechet_core::clt::{
    assemble_experiment, check_regime, run_replicate, CltConfig, CltError, ExperimentResult,
    ReplicateOutcome,
};
use frechet_core::sampling::RadialSampler;
use frechet_core::sphere::tangent_basis;

/// Resolves a worker count: an explicit request wins, otherwise the
/// available parallelism, with 1 as the last resort.
pub fn resolve_jobs(requested: Option<usize>) -> usize {
    match requested {
        Some(n) => n.max(1),
        None => thread::available_parallelism().map(NonZeroUsize::get).unwrap_or(1),
    }
}

/// Runs the scaling experiment on `jobs` worker threads.
///
/// Equivalent to [`frechet_core::clt::run_scaling_experiment`] — same
/// records, same fit, bit for bit — for every `jobs ≥ 1`.
pub fn run_scaling_experiment_parallel(
    cfg: &CltConfig,
    jobs: usize,
) -> Result<ExperimentResult, CltError> {
    if jobs == 0 {
        return Err(CltError::BadConfig("worker count must be at least 1"));
    }
    check_regime(cfg)?;
    let sampler = RadialSampler::new(&cfg.density, &cfg.pole)?;
    let basis = tangent_basis(&cfg.pole);
    let total = cfg.sample_sizes.len() * cfg.replicates;

    // Every worker returns its stride's outcomes, or the first failure
    // tagged with its flat index so the reported error is the one the
    // sequential run would have hit first.
    type WorkerResult = Result<Vec<ReplicateOutcome>, (usize, CltError)>;
    let worker = |start: usize| -> WorkerResult {
        let mut outcomes = Vec::with_capacity(total / jobs + 1);
        let mut flat = start;
        while flat < total {
            let size_index = flat / cfg.replicates;
            let replicate = flat % cfg.replicates;
            outcomes.push(
                run_replicate(cfg, &sampler, &basis, size_index, replicate)
                    .map_err(|e| (flat, e))?,
            );
            flat += jobs;
        }
        Ok(outcomes)
    };

    let results: Vec<WorkerResult> = if jobs == 1 {
        vec![worker(0)]
    } else {
        thread::scope(|scope| {
            let handles: Vec<_> =
                (0..jobs).map(|start| scope.spawn(move || worker(start))).collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        })
    };

    let mut records = Vec::with_capacity(total);
    let mut first_error: Option<(usize, CltError)> = None;
    for result in results {
        match result {
            Ok(outcomes) => records.extend(outcomes),
            Err((flat, e)) => {
                if first_error.as_ref().is_none_or(|(f, _)| flat < *f) {
                    first_error = Some((flat, e));
                }
            }
        }
    }
    if let Some((_, e)) = first_error {
        return Err(e);
    }
    assemble_experiment(cfg, records)
}
