//! Parallel execution of [`Replicated`] experiments. Replicates draw from
//! their own streams and are aggregated in index order, so the result does
//! not depend on the thread count.

use hardcore_core::estimators::Replicated;
use rayon::prelude::*;

use crate::error::{LabError, Result};

pub fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| LabError::usage(format!("cannot start {jobs} worker threads: {e}")))
}

/// Runs every replicate on up to `jobs` threads (0 picks the core count)
/// and returns the outcomes in replicate order.
pub fn run_outcomes<E: Replicated>(experiment: &E, jobs: usize) -> Result<Vec<E::Outcome>> {
    Ok(pool(jobs)?.install(|| {
        (0..experiment.replicates())
            .into_par_iter()
            .map(|i| experiment.run_replicate(i))
            .collect()
    }))
}

pub fn run<E: Replicated>(experiment: &E, jobs: usize) -> Result<E::Report> {
    let outcomes = run_outcomes(experiment, jobs)?;
    Ok(experiment.aggregate(outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use hardcore_core::estimators::{CouplingExperiment, CouplingParams, StartPolicy};
    use hardcore_core::graph::random_regular;
    use hardcore_core::bp::PhiFunction;

    #[test]
    fn thread_count_does_not_change_results() {
        let g = random_regular(100, 4, 3).unwrap();
        let params = CouplingParams {
            steps: 1000,
            replicates: 12,
            start: StartPolicy::EmptyPlusRandom,
            seed: 5,
        };
        let exp = CouplingExperiment::new(&g, 0.5, PhiFunction::uniform(100), params).unwrap();
        let serial = exp.run();
        assert_eq!(run(&exp, 1).unwrap(), serial);
        assert_eq!(run(&exp, 4).unwrap(), serial);
    }
}
