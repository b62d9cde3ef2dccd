#![allow(dead_code)]

use lsgp::gp::{GpTree, Node};
use lsgp::model::FunctionSymbol;

/// Per-case recursive Boolean evaluation written from the truth tables, with
/// no shared code path with the library evaluators.
pub fn oracle_bits(tree: &GpTree, terminals: &[Vec<bool>], m: usize) -> Vec<bool> {
    (0..m)
        .map(|case| {
            let mut pos = 0;
            eval_at(tree.nodes(), &mut pos, terminals, case)
        })
        .collect()
}

fn eval_at(nodes: &[Node], pos: &mut usize, terminals: &[Vec<bool>], case: usize) -> bool {
    let node = nodes[*pos];
    *pos += 1;
    match node {
        Node::Leaf(i) => terminals[i as usize][case],
        Node::Func(sym) => {
            let a = eval_at(nodes, pos, terminals, case);
            let b = eval_at(nodes, pos, terminals, case);
            match sym {
                FunctionSymbol::And => a && b,
                FunctionSymbol::Or => a || b,
                FunctionSymbol::Nand => !(a && b),
                FunctionSymbol::Nor => !(a || b),
                other => panic!("{other} is not Boolean"),
            }
        }
    }
}

pub fn oracle_q(tree: &GpTree, terminals: &[Vec<bool>], targets: &[bool]) -> usize {
    oracle_bits(tree, terminals, targets.len())
        .iter()
        .zip(targets)
        .filter(|(a, b)| a != b)
        .count()
}

pub fn to_bools(v: &[f64]) -> Vec<bool> {
    v.iter().map(|&x| x == 1.0).collect()
}

/// Even-k parity computed directly, case c = binary c with x1 as the most
/// significant bit.
pub fn even_parity_oracle(k: u32) -> (Vec<Vec<bool>>, Vec<bool>) {
    let m = 1usize << k;
    let inputs = (0..k)
        .map(|j| (0..m).map(|c| (c >> (k - 1 - j)) & 1 == 1).collect())
        .collect();
    let targets = (0..m).map(|c| (c as u32).count_ones().is_multiple_of(2)).collect();
    (inputs, targets)
}
