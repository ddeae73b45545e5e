//! Thread-pool evaluation.

use morphevo_core::decoder::Individual;
use morphevo_core::evolution::{evaluate_individual, BatchEvaluator, Evaluation, EvolutionConfig};
use morphevo_core::terrain::Heightmap;
use rayon::prelude::*;

use crate::Error;

/// Evaluates a batch on a dedicated rayon pool. Results keep input order,
/// so the worker count never changes an outcome.
pub struct ParallelEvaluator {
    pool: rayon::ThreadPool,
}

impl ParallelEvaluator {
    pub fn new(workers: usize) -> Result<Self, Error> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Internal(e.to_string()))?;
        Ok(ParallelEvaluator { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl BatchEvaluator for ParallelEvaluator {
    fn evaluate_batch(&self, batch: &[Individual], terrain: &Heightmap, config: &EvolutionConfig) -> Vec<Evaluation> {
        self.pool
            .install(|| batch.par_iter().map(|i| evaluate_individual(i, terrain, config)).collect())
    }
}
