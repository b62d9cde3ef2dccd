//! Tree GP: representation, variation operators, the generational loop,
//! and the liquid-driven and standard run drivers.

mod engine;
mod operators;
mod population;
mod tree;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::EvalBackend;
use crate::par::Parallelism;

pub use engine::{gp_generation, reconstruct_expression, run_lsgp, run_standard_gp, RunResult};
pub use operators::{crossover, mutation, ramped_population, random_tree, tournament_select, InitMethod};
pub use population::{BestArchive, Individual, Population};
pub use tree::{GpTree, Node};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpParams {
    pub pop_size: usize,
    pub generations: usize,
    pub max_height: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub tournament_size: usize,
    pub elite_count: usize,
    /// Inclusive depth range for ramped half-and-half initialization.
    pub init_depth: (usize, usize),
    /// Depth limit of the subtree grown by mutation.
    pub mutation_depth: usize,
    /// A run succeeds once its best Q is at or below this value.
    pub success_threshold: f64,
    pub backend: EvalBackend,
    /// Parallelism of fitness evaluation inside one generation.
    pub parallelism: Parallelism,
}

impl GpParams {
    pub fn new(pop_size: usize, generations: usize) -> Self {
        Self {
            pop_size,
            generations,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::config(format!("{name} {p} outside [0, 1]")))
            }
        };
        prob("crossover_prob", self.crossover_prob)?;
        prob("mutation_prob", self.mutation_prob)?;
        if self.pop_size == 0 {
            return Err(Error::config("pop_size must be at least 1"));
        }
        if self.tournament_size == 0 {
            return Err(Error::config("tournament_size must be at least 1"));
        }
        if self.elite_count >= self.pop_size {
            return Err(Error::config(format!(
                "elite_count {} must be below pop_size {}",
                self.elite_count, self.pop_size
            )));
        }
        let (lo, hi) = self.init_depth;
        if lo == 0 || lo > hi || hi > self.max_height {
            return Err(Error::config(format!(
                "init depth range {lo}..={hi} must lie within 1..={}",
                self.max_height
            )));
        }
        if self.mutation_depth == 0 {
            return Err(Error::config("mutation_depth must be at least 1"));
        }
        if self.success_threshold.is_nan() || self.success_threshold < 0.0 {
            return Err(Error::config("success_threshold must be a non-negative number"));
        }
        Ok(())
    }
}

impl Default for GpParams {
    fn default() -> Self {
        Self {
            pop_size: 100,
            generations: 50,
            max_height: 12,
            crossover_prob: 0.9,
            mutation_prob: 0.1,
            tournament_size: 2,
            elite_count: 1,
            init_depth: (2, 6),
            mutation_depth: 4,
            success_threshold: 0.0,
            backend: EvalBackend::Naive,
            parallelism: Parallelism::Sequential,
        }
    }
}
