//! Replication-parallel scenario runs.

use rayon::prelude::*;

use checkshrink_core::experiments::{aggregate, run_replication, EvalReport, MethodSpec, ScenarioSpec};
use checkshrink_core::{Error, Result};

/// Environment variable capping the worker count; `0` or unset means one
/// worker per core.
pub const THREADS_ENV: &str = "CHECKSHRINK_THREADS";

pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(0)
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Scenario(format!("thread pool: {e}")))
}

/// Same report as [`checkshrink_core::experiments::run_scenario`]; each
/// replication draws from its own substream so the worker count does not
/// change the result.
pub fn run_scenario_parallel(spec: &ScenarioSpec, methods: &[MethodSpec], threads: usize) -> Result<EvalReport> {
    spec.validate()?;
    if methods.is_empty() {
        return Err(Error::Scenario("no methods requested".into()));
    }
    let outcomes = pool(threads)?.install(|| {
        (0..spec.reps).into_par_iter().map(|r| run_replication(spec, methods, r)).collect::<Result<Vec<_>>>()
    })?;
    aggregate(spec, methods, outcomes)
}
