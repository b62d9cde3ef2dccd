use lsgp::ledger::ProvenanceLedger;
use lsgp::liquid::{init_liquid, step_liquid, LiquidParams};
use lsgp::model::{symbol_applications, FunctionSet, FunctionSymbol, Liquid};
use lsgp::problems::make_parity;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn check_invariants(liquid: &Liquid, ledger: &ProvenanceLedger, params: &LiquidParams, m: usize, fs: &FunctionSet) {
    let problem = make_parity(3).unwrap();
    assert_eq!(liquid.len(), params.liquid_size);
    let ids = liquid.provenance_ids().expect("provenance");
    for (item, &id) in liquid.items().iter().zip(ids) {
        assert_eq!(item.len(), m);
        assert!(item.is_boolean());
        assert!(ledger.symbols_used(id).unwrap().iter().all(|&s| fs.contains(s)));
        assert_eq!(&ledger.replay(id, &problem).unwrap(), item);
    }
}

#[test]
fn thousand_steps_keep_invariants() {
    let problem = make_parity(3).unwrap();
    let fs = FunctionSet::boolean();
    for keep_inputs in [true, false] {
        let params = LiquidParams {
            keep_inputs,
            ..LiquidParams::for_inputs(3)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut ledger = ProvenanceLedger::new();
        let mut liquid = init_liquid(&problem, &params, &mut rng, Some(&mut ledger)).unwrap();
        for step in 1..=1000u64 {
            liquid = step_liquid(&liquid, &problem, &params, &fs, &mut rng, Some(&mut ledger)).unwrap();
            assert_eq!(liquid.generation(), step);
            if step % 50 == 0 || step == 1 {
                check_invariants(&liquid, &ledger, &params, 8, &fs);
            }
        }
        check_invariants(&liquid, &ledger, &params, 8, &fs);
    }
}

#[test]
fn restricted_function_set_closure() {
    let problem = make_parity(4).unwrap();
    let fs = FunctionSet::new([FunctionSymbol::Nand]).unwrap();
    let params = LiquidParams::for_inputs(4);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut ledger = ProvenanceLedger::new();
    let mut liquid = init_liquid(&problem, &params, &mut rng, Some(&mut ledger)).unwrap();
    for _ in 0..200 {
        liquid = step_liquid(&liquid, &problem, &params, &fs, &mut rng, Some(&mut ledger)).unwrap();
    }
    for &id in liquid.provenance_ids().unwrap() {
        assert!(ledger
            .symbols_used(id)
            .unwrap()
            .iter()
            .all(|&s| s == FunctionSymbol::Nand));
    }
}

#[test]
fn step_cost_is_linear_in_m() {
    // Each new item costs at most m applications, however deep its history.
    let fs = FunctionSet::boolean();
    for k in [3u32, 5, 8] {
        let problem = make_parity(k).unwrap();
        let params = LiquidParams::for_inputs(k as usize);
        let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
        let mut liquid = init_liquid(&problem, &params, &mut rng, None).unwrap();
        for _ in 0..50 {
            let before = symbol_applications();
            liquid = step_liquid(&liquid, &problem, &params, &fs, &mut rng, None).unwrap();
            let cost = symbol_applications() - before;
            assert!(cost <= (params.liquid_size * problem.m()) as u64, "cost {cost}");
        }
    }
}

#[test]
fn insertion_only_liquid_is_all_inputs() {
    let problem = make_parity(3).unwrap();
    let params = LiquidParams {
        p_insert: 1.0,
        ..LiquidParams::for_inputs(3)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut liquid = init_liquid(&problem, &params, &mut rng, None).unwrap();
    for _ in 0..20 {
        liquid = step_liquid(&liquid, &problem, &params, &FunctionSet::boolean(), &mut rng, None).unwrap();
        assert!(liquid.items().iter().all(|i| problem.columns().contains(i)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steps_preserve_shape(
        seed in any::<u64>(),
        k in 2u32..6,
        size in 1usize..16,
        p_insert in 0.0f64..=1.0,
        keep_inputs in any::<bool>(),
        steps in 1usize..30,
    ) {
        let problem = make_parity(k).unwrap();
        let fs = FunctionSet::boolean();
        let params = LiquidParams { liquid_size: size, p_insert, update_period: 5, keep_inputs };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ledger = ProvenanceLedger::new();
        let mut liquid = init_liquid(&problem, &params, &mut rng, Some(&mut ledger)).unwrap();
        for _ in 0..steps {
            liquid = step_liquid(&liquid, &problem, &params, &fs, &mut rng, Some(&mut ledger)).unwrap();
        }
        prop_assert_eq!(liquid.len(), size);
        for (item, &id) in liquid.items().iter().zip(liquid.provenance_ids().unwrap()) {
            prop_assert_eq!(item.len(), problem.m());
            prop_assert!(item.is_boolean());
            prop_assert_eq!(&ledger.replay(id, &problem).unwrap(), item);
        }
        if keep_inputs && size >= k as usize {
            prop_assert_eq!(&liquid.items()[..k as usize], problem.columns());
        }
    }
}
