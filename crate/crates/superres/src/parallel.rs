//! Thread-pool wrappers. Every parallel map here collects in index order
//! and derives its random streams from indices, never from the scheduler,
//! so results do not depend on the thread count.

use rayon::prelude::*;
use superres_core::montecarlo::{chunk_plan, simulate_stream, BatchSettings, RunSeed, ShotBatch};

use crate::error::{CliError, CliResult};

/// Runs `f` on a pool with `threads` workers (0 means one per core).
pub fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::config(format!("threads: {e}")))?;
    Ok(pool.install(f))
}

/// Same counts as the serial `simulate_batch`: chunk `k` always uses
/// stream `k` of `master_seed`.
pub fn simulate_batch_par(settings: &BatchSettings, n_shots: u64, master_seed: u64) -> CliResult<ShotBatch> {
    settings.validate()?;
    let ones = chunk_plan(n_shots)
        .into_par_iter()
        .map(|(k, n)| simulate_stream(settings, n, RunSeed::new(master_seed, k)))
        .collect::<Result<Vec<u64>, _>>()?
        .into_iter()
        .sum();
    Ok(ShotBatch::new(n_shots, ones, *settings)?)
}

/// Ordered parallel map over `0..n` with early error propagation.
pub fn par_indexed<T: Send>(n: usize, f: impl Fn(usize) -> CliResult<T> + Sync + Send) -> CliResult<Vec<T>> {
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use superres_core::analytics::Convention;
    use superres_core::montecarlo::simulate_batch;
    use superres_core::signal::{PulsePlan, TwoToneSignal};

    #[test]
    fn parallel_batch_matches_serial() {
        let n = 200;
        let ws = n as f64 * std::f64::consts::PI - 2.0 * std::f64::consts::PI;
        let plan = PulsePlan::with_detuning(ws, 5.0, n).unwrap();
        let s = BatchSettings::pulsed(
            TwoToneSignal::gaussian(ws, 0.05, 1.0).unwrap(),
            plan,
            Convention::Physical,
        );
        let serial = simulate_batch(&s, 300_000, 42).unwrap();
        for threads in [1, 3] {
            let par = with_pool(threads, || simulate_batch_par(&s, 300_000, 42))
                .unwrap()
                .unwrap();
            assert_eq!(par, serial);
        }
    }
}
