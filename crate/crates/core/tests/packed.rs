mod common;

use common::{oracle_bits, oracle_q};
use lsgp::eval::{eval_tree, fitness, EvalBackend, Evaluator};
use lsgp::gp::{random_tree, GpTree, InitMethod};
use lsgp::model::{Algebra, BehaviorVector, FitnessCaseTable, FunctionSet};
use lsgp::packed::{packed_eval, packed_fitness, PackedVector, Word};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_case(seed: u64, m: usize, terminals: usize) -> (GpTree, Vec<Vec<bool>>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let method = if rng.gen_bool(0.5) { InitMethod::Full } else { InitMethod::Grow };
    let depth = rng.gen_range(1..=7);
    let tree = random_tree(&FunctionSet::boolean(), terminals, method, depth, &mut rng);
    let bits = |rng: &mut ChaCha8Rng| (0..m).map(|_| rng.gen_bool(0.5)).collect::<Vec<_>>();
    let vecs = (0..terminals).map(|_| bits(&mut rng)).collect();
    let targets = bits(&mut rng);
    (tree, vecs, targets)
}

fn as_vectors(bits: &[Vec<bool>]) -> Vec<BehaviorVector> {
    bits.iter()
        .map(|b| BehaviorVector::from_bits(&b.iter().map(|&x| x as u8).collect::<Vec<_>>()))
        .collect()
}

fn check_width<W: Word>(tree: &GpTree, vecs: &[BehaviorVector], targets: &BehaviorVector, expect: &[bool], q: usize) {
    let packed: Vec<PackedVector<W>> = vecs.iter().map(|v| PackedVector::pack(v).unwrap()).collect();
    let t = PackedVector::<W>::pack(targets).unwrap();
    let out = packed_eval(tree, &packed).unwrap();
    assert!(out.is_canonical(), "tail bits leaked at m = {}", out.len());
    let got: Vec<bool> = (0..out.len()).map(|k| out.bit(k)).collect();
    assert_eq!(got, expect);
    assert_eq!(packed_fitness(tree, &packed, &t).unwrap(), q as f64);
}

fn check(seed: u64, m: usize) {
    let (tree, bits, target_bits) = random_case(seed, m, 5);
    let expect = oracle_bits(&tree, &bits, m);
    let q = oracle_q(&tree, &bits, &target_bits);
    let vecs = as_vectors(&bits);
    let targets = as_vectors(std::slice::from_ref(&target_bits)).remove(0);

    let naive = eval_tree(&tree, &vecs).unwrap();
    assert_eq!(common::to_bools(&naive), expect);
    check_width::<u8>(&tree, &vecs, &targets, &expect, q);
    check_width::<u64>(&tree, &vecs, &targets, &expect, q);
    check_width::<u128>(&tree, &vecs, &targets, &expect, q);

    let table = FitnessCaseTable::from_columns(Algebra::Boolean, vecs.clone(), targets).unwrap();
    assert_eq!(fitness(&tree, &vecs, &table).unwrap(), q as f64);
    for backend in [EvalBackend::Naive, EvalBackend::Packed] {
        assert_eq!(Evaluator::new(backend, &vecs, &table).unwrap().q(&tree), q as f64);
    }
}

#[test]
fn word_boundary_lengths() {
    for m in [1, 7, 8, 9, 16, 17, 63, 64, 65, 127, 128, 129] {
        for seed in 0..40 {
            check(seed * 1000 + m as u64, m);
        }
    }
}

proptest! {
    #[test]
    fn packed_matches_oracle(seed in any::<u64>(), m in 1usize..300) {
        check(seed, m);
    }

    #[test]
    fn pack_round_trip(bits in proptest::collection::vec(any::<bool>(), 1..200)) {
        let v = BehaviorVector::from_bits(&bits.iter().map(|&b| b as u8).collect::<Vec<_>>());
        let p8 = PackedVector::<u8>::pack(&v).unwrap();
        let p64 = PackedVector::<u64>::pack(&v).unwrap();
        prop_assert_eq!(p8.unpack(), v.clone());
        prop_assert_eq!(p64.unpack(), v);
        prop_assert_eq!(p8.count_ones(), bits.iter().filter(|&&b| b).count());
        prop_assert!(p8.is_canonical() && p64.is_canonical());
    }
}
