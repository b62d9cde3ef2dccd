use crate::error::{Error, Result};
use crate::eval::{fitness, Evaluator};
use crate::gp::GpTree;
use crate::model::{FitnessCaseTable, Liquid, Value};
use crate::par::{self, Parallelism};

/// A tree plus its Q, cached together with the terminal-set generation it
/// was computed against.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub tree: GpTree,
    cached: Option<(Value, u64)>,
}

impl Individual {
    pub fn new(tree: GpTree) -> Self {
        Self { tree, cached: None }
    }

    pub fn with_fitness(tree: GpTree, q: Value, generation: u64) -> Self {
        Self {
            tree,
            cached: Some((q, generation)),
        }
    }

    /// The cached Q if it was computed against terminal generation `generation`.
    pub fn fitness(&self, generation: u64) -> Option<Value> {
        match self.cached {
            Some((q, g)) if g == generation => Some(q),
            _ => None,
        }
    }

    pub fn set_fitness(&mut self, q: Value, generation: u64) {
        self.cached = Some((q, generation));
    }

    pub fn mark_stale(&mut self) {
        self.cached = None;
    }

    pub fn is_stale(&self, generation: u64) -> bool {
        self.fitness(generation).is_none()
    }
}

/// Individuals together with the terminal generation their fitness refers to.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub individuals: Vec<Individual>,
    pub terminal_generation: u64,
}

impl Population {
    /// Evaluates `trees` against `evaluator`.
    pub fn evaluate(
        trees: Vec<GpTree>,
        evaluator: &Evaluator,
        terminal_generation: u64,
        parallelism: Parallelism,
    ) -> Self {
        let qs = par::map(parallelism, &trees, |t| evaluator.q(t));
        Self {
            individuals: trees
                .into_iter()
                .zip(qs)
                .map(|(t, q)| Individual::with_fitness(t, q, terminal_generation))
                .collect(),
            terminal_generation,
        }
    }

    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    pub fn q(&self, index: usize) -> Result<Value> {
        self.individuals[index]
            .fitness(self.terminal_generation)
            .ok_or(Error::StaleFitness { index })
    }

    /// Invalidates every cached fitness and moves to a new terminal generation.
    pub fn mark_stale(&mut self, terminal_generation: u64) {
        self.terminal_generation = terminal_generation;
        for ind in &mut self.individuals {
            ind.mark_stale();
        }
    }

    /// Recomputes every stale fitness.
    pub fn refresh(&mut self, evaluator: &Evaluator, parallelism: Parallelism) {
        let gen = self.terminal_generation;
        let qs = par::map(parallelism, &self.individuals, |ind| {
            ind.fitness(gen).unwrap_or_else(|| evaluator.q(&ind.tree))
        });
        for (ind, q) in self.individuals.iter_mut().zip(qs) {
            ind.set_fitness(q, gen);
        }
    }

    /// Index of the lowest Q, earliest index on ties.
    pub fn best(&self) -> Result<(usize, Value)> {
        let mut best: Option<(usize, Value)> = None;
        for i in 0..self.len() {
            let q = self.q(i)?;
            if best.is_none_or(|(_, b)| q < b) {
                best = Some((i, q));
            }
        }
        best.ok_or_else(|| Error::usage("empty population"))
    }

    /// Indices sorted by ascending Q, stable on index.
    pub fn ranked(&self) -> Result<Vec<usize>> {
        let qs = (0..self.len()).map(|i| self.q(i)).collect::<Result<Vec<_>>>()?;
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| qs[a].total_cmp(&qs[b]).then(a.cmp(&b)));
        Ok(idx)
    }

    pub fn mean_nodes(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.individuals.iter().map(|i| i.tree.len()).sum::<usize>() as f64 / self.len() as f64
    }

    pub fn max_height(&self) -> usize {
        self.individuals.iter().map(|i| i.tree.height()).max().unwrap_or(0)
    }
}

/// Best-so-far tree with a copy of the terminal set it was scored against.
#[derive(Debug, Clone, PartialEq)]
pub struct BestArchive {
    pub tree: GpTree,
    pub liquid_snapshot: Liquid,
    pub q: Value,
    /// GP generation at which it was captured.
    pub generation: usize,
}

impl BestArchive {
    /// Re-scores the archived tree on its own snapshot with the naive
    /// evaluator, independent of whichever backend produced `q`.
    pub fn rescore(&self, problem: &FitnessCaseTable) -> Result<Value> {
        fitness(&self.tree, self.liquid_snapshot.items(), problem)
    }

    pub fn is_consistent(&self, problem: &FitnessCaseTable) -> bool {
        self.rescore(problem).is_ok_and(|q| q == self.q)
    }
}
