use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::Rng;

use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::gp::operators::{crossover, mutation, ramped_population, tournament_select};
use crate::gp::{BestArchive, GpParams, GpTree, Individual, Node, Population};
use crate::ledger::{Expr, ProvenanceLedger};
use crate::liquid::{init_liquid, step_liquid, LiquidParams};
use crate::model::{FitnessCaseTable, FunctionSet, Liquid, Value};
use crate::par;

/// Outcome of one run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub success: bool,
    pub success_generation: Option<usize>,
    pub best_q: Value,
    pub archive: BestArchive,
    /// Mean node count over every population of the run.
    pub mean_tree_nodes: f64,
    pub generations_run: usize,
    /// Liquid generation at the end of the run (0 for standard GP).
    pub liquid_generation: u64,
    /// Present when the run tracked liquid provenance.
    pub ledger: Option<ProvenanceLedger>,
    pub elapsed: Duration,
}

/// One generational step: the `elite_count` best individuals are copied,
/// the rest come from tournament-selected parents via crossover (else
/// reproduction) and optional mutation. Offspring are scored before return.
pub fn gp_generation<R: Rng + ?Sized>(
    population: &Population,
    evaluator: &Evaluator,
    function_set: &FunctionSet,
    params: &GpParams,
    rng: &mut R,
) -> Result<Population> {
    let gen = population.terminal_generation;
    let ranked = population.ranked()?;
    let terminals = evaluator.terminal_count();
    let mut next: Vec<Individual> = ranked[..params.elite_count]
        .iter()
        .map(|&i| population.individuals[i].clone())
        .collect();

    // Variation consumes the RNG sequentially; scoring happens afterwards so
    // the random stream never depends on evaluation order.
    let mut fresh: Vec<GpTree> = Vec::with_capacity(params.pop_size - params.elite_count);
    let mut fresh_slots = Vec::with_capacity(params.pop_size - params.elite_count);
    while next.len() < params.pop_size {
        let p1 = tournament_select(population, params, rng)?;
        let parent = &population.individuals[p1].tree;
        let mut child = None;
        if rng.gen_bool(params.crossover_prob) {
            let p2 = tournament_select(population, params, rng)?;
            child = Some(crossover(parent, &population.individuals[p2].tree, params, rng));
        }
        if rng.gen_bool(params.mutation_prob) {
            let base = child.as_ref().unwrap_or(parent);
            child = Some(mutation(base, params, function_set, terminals, rng));
        }
        match child {
            // Reproduction keeps the parent's cached score.
            None => next.push(population.individuals[p1].clone()),
            Some(tree) => {
                fresh_slots.push(next.len());
                next.push(Individual::new(GpTree::leaf(0)));
                fresh.push(tree);
            }
        }
    }
    let qs = par::map(params.parallelism, &fresh, |t| evaluator.q(t));
    for ((slot, tree), q) in fresh_slots.into_iter().zip(fresh).zip(qs) {
        next[slot] = Individual::with_fitness(tree, q, gen);
    }
    debug_assert!(next.iter().all(|i| i.tree.height() <= params.max_height));
    Ok(Population {
        individuals: next,
        terminal_generation: gen,
    })
}

enum Terminals {
    Liquid {
        liquid: Liquid,
        params: LiquidParams,
        ledger: Option<ProvenanceLedger>,
    },
    Raw(Liquid),
}

impl Terminals {
    fn current(&self) -> &Liquid {
        match self {
            Terminals::Liquid { liquid, .. } => liquid,
            Terminals::Raw(l) => l,
        }
    }
}

/// Liquid state GP: tree leaves index liquid items, the liquid is rebuilt
/// every `update_period` generations, and the best tree is archived with a
/// snapshot of the liquid it was scored on.
pub fn run_lsgp<R: Rng + ?Sized>(
    problem: &FitnessCaseTable,
    gp: &GpParams,
    liquid_params: &LiquidParams,
    function_set: &FunctionSet,
    track_provenance: bool,
    rng: &mut R,
) -> Result<RunResult> {
    liquid_params.validate()?;
    let mut ledger = track_provenance.then(ProvenanceLedger::new);
    let liquid = init_liquid(problem, liquid_params, rng, ledger.as_mut())?;
    run(
        problem,
        gp,
        function_set,
        Terminals::Liquid {
            liquid,
            params: *liquid_params,
            ledger,
        },
        rng,
    )
}

/// Baseline GP over the raw input columns.
pub fn run_standard_gp<R: Rng + ?Sized>(
    problem: &FitnessCaseTable,
    gp: &GpParams,
    function_set: &FunctionSet,
    rng: &mut R,
) -> Result<RunResult> {
    let raw = Liquid::new(problem.columns().to_vec(), 0, None)?;
    run(problem, gp, function_set, Terminals::Raw(raw), rng)
}

fn run<R: Rng + ?Sized>(
    problem: &FitnessCaseTable,
    gp: &GpParams,
    function_set: &FunctionSet,
    mut terminals: Terminals,
    rng: &mut R,
) -> Result<RunResult> {
    let start = Instant::now();
    gp.validate()?;
    if function_set.algebra() != problem.algebra() {
        return Err(Error::config("function set algebra does not match the problem"));
    }
    let mut evaluator = Evaluator::new(gp.backend, terminals.current().items(), problem)?;
    let trees = ramped_population(gp, function_set, evaluator.terminal_count(), rng);
    let mut pop = Population::evaluate(trees, &evaluator, terminals.current().generation(), gp.parallelism);

    let mut node_sum = pop.mean_nodes();
    let mut node_pops = 1usize;
    let (i, q) = pop.best()?;
    let mut archive = BestArchive {
        tree: pop.individuals[i].tree.clone(),
        liquid_snapshot: terminals.current().clone(),
        q,
        generation: 0,
    };
    let solved = |q: Value| q <= gp.success_threshold;
    let mut success_generation = solved(q).then_some(0);
    let mut generations_run = 0;

    let consider = |pop: &Population, archive: &mut BestArchive, liquid: &Liquid, g: usize| -> Result<()> {
        let (i, q) = pop.best()?;
        if q < archive.q {
            *archive = BestArchive {
                tree: pop.individuals[i].tree.clone(),
                liquid_snapshot: liquid.clone(),
                q,
                generation: g,
            };
        }
        Ok(())
    };

    for g in 1..=gp.generations {
        if success_generation.is_some() {
            break;
        }
        pop = gp_generation(&pop, &evaluator, function_set, gp, rng)?;
        generations_run = g;
        node_sum += pop.mean_nodes();
        node_pops += 1;
        consider(&pop, &mut archive, terminals.current(), g)?;
        if solved(archive.q) {
            success_generation = Some(g);
            break;
        }
        if let Terminals::Liquid {
            liquid,
            params,
            ledger,
        } = &mut terminals
        {
            if g % params.update_period == 0 && g < gp.generations {
                *liquid = step_liquid(liquid, problem, params, function_set, rng, ledger.as_mut())?;
                evaluator = Evaluator::new(gp.backend, liquid.items(), problem)?;
                pop.mark_stale(liquid.generation());
                pop.refresh(&evaluator, gp.parallelism);
                consider(&pop, &mut archive, liquid, g)?;
                if solved(archive.q) {
                    success_generation = Some(g);
                }
            }
        }
    }

    let liquid_generation = terminals.current().generation();
    let ledger = match terminals {
        Terminals::Liquid { ledger, .. } => ledger,
        Terminals::Raw(_) => None,
    };
    Ok(RunResult {
        success: success_generation.is_some(),
        success_generation,
        best_q: archive.q,
        archive,
        mean_tree_nodes: node_sum / node_pops as f64,
        generations_run,
        liquid_generation,
        ledger,
        elapsed: start.elapsed(),
    })
}

/// Rewrites the archived tree over raw inputs by splicing in the ledger
/// expression behind every liquid item its leaves reference.
pub fn reconstruct_expression(archive: &BestArchive, ledger: Option<&ProvenanceLedger>) -> Result<Expr> {
    let ledger = ledger.ok_or_else(|| Error::Unsupported("provenance tracking was off for this run".into()))?;
    let ids = archive
        .liquid_snapshot
        .provenance_ids()
        .ok_or_else(|| Error::Unsupported("archived liquid carries no provenance ids".into()))?;
    let mut cache: HashMap<usize, Expr> = HashMap::new();
    let nodes = archive.tree.nodes();
    let mut stack: Vec<Expr> = Vec::new();
    for node in nodes.iter().rev() {
        match *node {
            Node::Leaf(i) => {
                let i = i as usize;
                let id = *ids.get(i).ok_or(Error::TerminalOutOfRange {
                    index: i,
                    count: ids.len(),
                })?;
                let expr = match cache.get(&i) {
                    Some(e) => e.clone(),
                    None => {
                        let e = ledger.expression(id)?;
                        cache.insert(i, e.clone());
                        e
                    }
                };
                stack.push(expr);
            }
            Node::Func(sym) => {
                let args: Vec<Expr> = (0..sym.arity()).map(|_| stack.pop().expect("well-formed tree")).collect();
                stack.push(Expr::Apply(sym, args));
            }
        }
    }
    Ok(stack.pop().expect("non-empty tree"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FunctionSymbol;
    use crate::problems::make_parity;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_generations_returns_initial_best() {
        let p = make_parity(3).unwrap();
        let gp = GpParams::new(20, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = run_lsgp(&p, &gp, &LiquidParams::for_inputs(3), &FunctionSet::boolean(), false, &mut rng).unwrap();
        assert_eq!(r.generations_run, 0);
        assert_eq!(r.liquid_generation, 0);
        assert!(r.archive.is_consistent(&p));
        assert_eq!(r.success, r.best_q == 0.0);
        let r = run_standard_gp(&p, &gp, &FunctionSet::boolean(), &mut rng).unwrap();
        assert_eq!(r.archive.generation, 0);
    }

    #[test]
    fn reproduction_only_keeps_trees() {
        let p = make_parity(3).unwrap();
        let gp = GpParams {
            crossover_prob: 0.0,
            mutation_prob: 0.0,
            ..GpParams::new(30, 1)
        };
        let fs = FunctionSet::boolean();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ev = Evaluator::new(gp.backend, p.columns(), &p).unwrap();
        let trees = ramped_population(&gp, &fs, 3, &mut rng);
        let pop = Population::evaluate(trees, &ev, 0, gp.parallelism);
        let next = gp_generation(&pop, &ev, &fs, &gp, &mut rng).unwrap();
        assert_eq!(next.len(), 30);
        for ind in &next.individuals {
            assert!(pop.individuals.iter().any(|o| o.tree == ind.tree));
        }
    }

    #[test]
    fn elite_count_bounds_new_individuals() {
        let p = make_parity(3).unwrap();
        let gp = GpParams {
            elite_count: 9,
            ..GpParams::new(10, 1)
        };
        let fs = FunctionSet::boolean();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ev = Evaluator::new(gp.backend, p.columns(), &p).unwrap();
        let pop = Population::evaluate(ramped_population(&gp, &fs, 3, &mut rng), &ev, 0, gp.parallelism);
        let next = gp_generation(&pop, &ev, &fs, &gp, &mut rng).unwrap();
        let new = next
            .individuals
            .iter()
            .filter(|i| !pop.individuals.iter().any(|o| o.tree == i.tree))
            .count();
        assert!(new <= 1);
    }

    #[test]
    fn best_q_is_monotone_at_fixed_terminals() {
        let p = make_parity(3).unwrap();
        let gp = GpParams::new(100, 50);
        let fs = FunctionSet::boolean();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut liquid_rng = ChaCha8Rng::seed_from_u64(40);
        let liquid = init_liquid(&p, &LiquidParams::for_inputs(3), &mut liquid_rng, None).unwrap();
        let ev = Evaluator::new(gp.backend, liquid.items(), &p).unwrap();
        let mut pop = Population::evaluate(ramped_population(&gp, &fs, 6, &mut rng), &ev, 0, gp.parallelism);
        let mut last = pop.best().unwrap().1;
        for _ in 0..50 {
            pop = gp_generation(&pop, &ev, &fs, &gp, &mut rng).unwrap();
            let q = pop.best().unwrap().1;
            assert!(q <= last);
            assert!(pop.max_height() <= 12);
            last = q;
        }
    }

    #[test]
    fn reconstruction_examples() {
        let p = make_parity(3).unwrap();
        let mut ledger = ProvenanceLedger::new();
        let x1 = ledger.push_terminal(0);
        let x2 = ledger.push_terminal(1);
        let and = ledger.push_combination(FunctionSymbol::And, vec![x1, x2]).unwrap();
        let liquid = Liquid::new(
            vec![ledger.replay(x1, &p).unwrap(), ledger.replay(and, &p).unwrap()],
            1,
            Some(vec![x1, and]),
        )
        .unwrap();
        let archive = |tree: GpTree| {
            let q = crate::eval::fitness(&tree, liquid.items(), &p).unwrap();
            BestArchive {
                tree,
                liquid_snapshot: liquid.clone(),
                q,
                generation: 0,
            }
        };
        let a = archive(GpTree::leaf(0));
        assert_eq!(reconstruct_expression(&a, Some(&ledger)).unwrap().to_string(), "x1");
        let b = archive(GpTree::leaf(1));
        let e = reconstruct_expression(&b, Some(&ledger)).unwrap();
        assert_eq!(e.to_string(), "AND(x1, x2)");
        assert_eq!(crate::model::q_error(p.targets(), &e.eval(&p).unwrap()).unwrap(), b.q);
        assert!(matches!(reconstruct_expression(&b, None), Err(Error::Unsupported(_))));
    }

    #[test]
    fn function_set_must_match_problem() {
        let p = make_parity(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(run_standard_gp(&p, &GpParams::new(10, 1), &FunctionSet::arithmetic(), &mut rng).is_err());
    }
}
