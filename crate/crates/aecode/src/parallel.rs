//! Multi-threaded drivers over the core scan.

use std::collections::BTreeMap;

use aecode_core::kl::Engine;
use aecode_core::search::scan::{enumerate_problems, evaluate, verification_channel, ScanConfig, ScanTable};
use aecode_core::{ErrorSet, HalfInt, Result};
use rayon::prelude::*;

/// Runs `f` on a pool of `jobs` threads.
pub fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().expect("thread pool");
    pool.install(f)
}

/// Same rows, in the same order, as the sequential scan for any `jobs`.
pub fn parallel_scan(config: &ScanConfig, engine: Engine, jobs: usize) -> Result<ScanTable> {
    let problems = enumerate_problems(config)?;
    with_pool(jobs, || {
        let mut ells: Vec<HalfInt> = problems.iter().map(|p| p.ell0).collect();
        ells.dedup();
        let channels: BTreeMap<HalfInt, Option<ErrorSet>> =
            ells.par_iter().map(|&ell| (ell, verification_channel(config, ell))).collect();
        let rows: Vec<_> = problems
            .par_iter()
            .map(|p| evaluate(config, p, channels[&p.ell0].as_ref(), engine))
            .collect::<Result<Vec<_>>>()?;
        let mut rows: Vec<_> = rows.into_iter().flatten().collect();
        rows.sort();
        Ok(ScanTable { config: config.clone(), rows, configurations: problems.len() })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use aecode_core::search::scan::{scan, Ansatz};
    use aecode_core::Mode;

    #[test]
    fn matches_sequential_scan() {
        let config = ScanConfig::new(1, Ansatz::ExhaustiveSmall, Mode::Correction, HalfInt::from_int(5));
        let seq = scan(&config, Engine::Exact).unwrap();
        for jobs in [1, 3] {
            assert_eq!(parallel_scan(&config, Engine::Exact, jobs).unwrap(), seq);
        }
    }
}
