use rand::Rng;

use crate::error::Result;
use crate::gp::{GpParams, GpTree, Node, Population};
use crate::model::FunctionSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMethod {
    /// Every branch reaches exactly the target depth.
    Full,
    /// The root is a function; below it nodes are drawn from functions and
    /// terminals alike, so branches may stop early.
    Grow,
}

/// Random tree of height at most `depth` (exactly `depth` for `Full`).
pub fn random_tree<R: Rng + ?Sized>(
    function_set: &FunctionSet,
    terminal_count: usize,
    method: InitMethod,
    depth: usize,
    rng: &mut R,
) -> GpTree {
    assert!(terminal_count > 0, "terminal set must not be empty");
    assert!(depth > 0, "tree depth must be at least 1");
    let mut nodes = Vec::new();
    build(function_set, terminal_count, method, depth, rng, &mut nodes);
    GpTree::from_nodes_unchecked(nodes)
}

fn build<R: Rng + ?Sized>(
    fs: &FunctionSet,
    terminals: usize,
    method: InitMethod,
    remaining: usize,
    rng: &mut R,
    out: &mut Vec<Node>,
) {
    let symbols = fs.symbols();
    let leaf = |rng: &mut R| Node::Leaf(rng.gen_range(0..terminals) as u32);
    if remaining == 1 {
        out.push(leaf(rng));
        return;
    }
    let sym = match method {
        InitMethod::Full => symbols[rng.gen_range(0..symbols.len())],
        InitMethod::Grow if out.is_empty() => symbols[rng.gen_range(0..symbols.len())],
        InitMethod::Grow => {
            let pick = rng.gen_range(0..symbols.len() + terminals);
            if pick < terminals {
                out.push(Node::Leaf(pick as u32));
                return;
            }
            symbols[pick - terminals]
        }
    };
    out.push(Node::Func(sym));
    for _ in 0..sym.arity() {
        build(fs, terminals, method, remaining - 1, rng, out);
    }
}

/// Ramped half-and-half: depths cycle through `params.init_depth`, and each
/// depth alternates between full and grow.
pub fn ramped_population<R: Rng + ?Sized>(
    params: &GpParams,
    function_set: &FunctionSet,
    terminal_count: usize,
    rng: &mut R,
) -> Vec<GpTree> {
    let (lo, hi) = params.init_depth;
    let depths = hi - lo + 1;
    (0..params.pop_size)
        .map(|i| {
            let method = if i % 2 == 0 { InitMethod::Full } else { InitMethod::Grow };
            let depth = lo + (i / 2) % depths;
            random_tree(function_set, terminal_count, method, depth, rng)
        })
        .collect()
}

/// Draws `tournament_size` contestants with replacement and returns the one
/// with the lowest Q; the earliest drawn wins ties.
pub fn tournament_select<R: Rng + ?Sized>(
    population: &Population,
    params: &GpParams,
    rng: &mut R,
) -> Result<usize> {
    let n = population.len();
    let mut best = rng.gen_range(0..n);
    let mut best_q = population.q(best)?;
    for _ in 1..params.tournament_size {
        let c = rng.gen_range(0..n);
        let q = population.q(c)?;
        if q < best_q {
            best = c;
            best_q = q;
        }
    }
    Ok(best)
}

/// Subtree crossover: a uniform node of a copy of `a` is replaced by a
/// uniform subtree of `b`. An offspring over the height limit is dropped in
/// favor of a copy of `a`.
pub fn crossover<R: Rng + ?Sized>(a: &GpTree, b: &GpTree, params: &GpParams, rng: &mut R) -> GpTree {
    let at = rng.gen_range(0..a.len());
    let from = rng.gen_range(0..b.len());
    let donor = &b.nodes()[from..b.subtree_end(from)];
    let child = a.replace_subtree(at, donor);
    if child.height() > params.max_height {
        a.clone()
    } else {
        child
    }
}

/// Replaces a uniform node with a fresh grow tree of depth at most
/// `params.mutation_depth`, with the same height-limit fallback as crossover.
pub fn mutation<R: Rng + ?Sized>(
    t: &GpTree,
    params: &GpParams,
    function_set: &FunctionSet,
    terminal_count: usize,
    rng: &mut R,
) -> GpTree {
    let at = rng.gen_range(0..t.len());
    let fresh = random_tree(function_set, terminal_count, InitMethod::Grow, params.mutation_depth, rng);
    let child = t.replace_subtree(at, fresh.nodes());
    if child.height() > params.max_height {
        t.clone()
    } else {
        child
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::Individual;
    use crate::model::FunctionSymbol;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn depth_one_is_a_leaf() {
        let fs = FunctionSet::boolean();
        for method in [InitMethod::Full, InitMethod::Grow] {
            let t = random_tree(&fs, 6, method, 1, &mut rng(0));
            assert_eq!(t.len(), 1);
        }
    }

    #[test]
    fn full_depth_three_is_complete() {
        let t = random_tree(&FunctionSet::boolean(), 6, InitMethod::Full, 3, &mut rng(1));
        assert_eq!(t.leaves().count(), 4);
        assert_eq!(t.symbols().count(), 3);
        assert_eq!(t.height(), 3);
    }

    #[test]
    fn grow_heights_stay_in_range() {
        let fs = FunctionSet::boolean();
        let mut r = rng(2);
        for i in 0..10_000 {
            let depth = 2 + i % 5;
            let t = random_tree(&fs, 6, InitMethod::Grow, depth, &mut r);
            assert!((2..=6).contains(&t.height()));
            assert!(t.height() <= depth);
        }
    }

    #[test]
    fn unary_symbols_build_valid_trees() {
        let fs = FunctionSet::arithmetic();
        let mut r = rng(3);
        for _ in 0..500 {
            let t = random_tree(&fs, 2, InitMethod::Full, 4, &mut r);
            assert_eq!(t.height(), 4);
            assert!(GpTree::from_nodes(t.nodes().to_vec()).is_ok());
        }
    }

    fn pop(qs: &[f64]) -> Population {
        Population {
            individuals: qs
                .iter()
                .enumerate()
                .map(|(i, &q)| Individual::with_fitness(GpTree::leaf(i), q, 0))
                .collect(),
            terminal_generation: 0,
        }
    }

    #[test]
    fn tournament_examples() {
        let params = GpParams::default();
        assert_eq!(tournament_select(&pop(&[5.0]), &params, &mut rng(0)).unwrap(), 0);
        let big = GpParams {
            tournament_size: 50,
            ..GpParams::default()
        };
        assert_eq!(tournament_select(&pop(&[3.0, 0.0]), &big, &mut rng(0)).unwrap(), 1);
    }

    #[test]
    fn binary_tournament_pick_rate() {
        // P(best) = 1 − (1/2)² = 0.75
        let p = pop(&[0.0, 1.0]);
        let params = GpParams::default();
        let mut r = rng(7);
        let hits = (0..10_000)
            .filter(|_| tournament_select(&p, &params, &mut r).unwrap() == 0)
            .count();
        let f = hits as f64 / 10_000.0;
        assert!((f - 0.75).abs() <= 0.02, "frequency {f}");
    }

    #[test]
    fn tournament_rejects_stale() {
        let mut p = pop(&[1.0, 2.0]);
        p.mark_stale(1);
        assert!(tournament_select(&p, &GpParams::default(), &mut rng(0)).is_err());
    }

    #[test]
    fn crossover_small_cases() {
        let params = GpParams::default();
        let a = GpTree::leaf(1);
        let b = GpTree::leaf(4);
        assert_eq!(crossover(&a, &b, &params, &mut rng(0)), b);
        let t = random_tree(&FunctionSet::boolean(), 6, InitMethod::Full, 3, &mut rng(4));
        // Swapping a whole tree for itself at the root is the identity.
        assert_eq!(t.replace_subtree(0, t.nodes()), t);
    }

    #[test]
    fn variation_respects_height_and_bounds() {
        let fs = FunctionSet::boolean();
        let params = GpParams::default();
        let mut r = rng(5);
        let mut trees: Vec<GpTree> = (0..50)
            .map(|i| random_tree(&fs, 6, InitMethod::Full, 2 + i % 11, &mut r))
            .collect();
        for i in 0..10_000 {
            let a = &trees[r.gen_range(0..trees.len())];
            let b = &trees[r.gen_range(0..trees.len())];
            let c = crossover(a, b, &params, &mut r);
            assert!(c.height() <= 12);
            let m = mutation(&c, &params, &fs, 6, &mut r);
            assert!(m.height() <= 12);
            assert!(m.leaves().all(|l| l < 6));
            trees[i % 50] = m;
        }
    }

    #[test]
    fn mutation_of_a_leaf_with_leaf_replacement() {
        let fs = FunctionSet::new([FunctionSymbol::And]).unwrap();
        let params = GpParams {
            mutation_depth: 1,
            ..GpParams::default()
        };
        let t = GpTree::leaf(0);
        // One terminal and depth 1: the only possible replacement is t itself.
        assert_eq!(mutation(&t, &params, &fs, 1, &mut rng(0)), t);
    }
}
