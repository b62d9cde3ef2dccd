//! Tree evaluation over whole behavior vectors, with a naive `f64` backend
//! and the bit-packed Boolean backend behind one [`Evaluator`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{GpTree, Node};
use crate::model::{q_error_unchecked, Algebra, BehaviorVector, FitnessCaseTable, FunctionSymbol, Value};
use crate::packed::{packed_fitness_unchecked, Packed64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Slot {
    Terminal(usize),
    Buffer(usize),
}

/// Post-order evaluation of a prefix tree. Leaves refer to `terminals`
/// without copying; internal nodes write into recycled buffers of `len`
/// elements. Returns the root slot and the buffer pool it may point into.
pub(crate) fn run_stack<T, F>(tree: &GpTree, terminals: &[&[T]], len: usize, zero: T, mut op: F) -> (Slot, Vec<Vec<T>>)
where
    T: Copy,
    F: FnMut(FunctionSymbol, &[&[T]], &mut [T]),
{
    let mut pool: Vec<Vec<T>> = Vec::new();
    let mut free: Vec<usize> = Vec::new();
    let mut stack: Vec<Slot> = Vec::with_capacity(16);
    for node in tree.nodes().iter().rev() {
        match *node {
            Node::Leaf(i) => stack.push(Slot::Terminal(i as usize)),
            Node::Func(sym) => {
                let arity = sym.arity();
                let mut operands = [Slot::Terminal(0); 2];
                // Prefix order reversed: the first child is on top.
                for slot in operands.iter_mut().take(arity) {
                    *slot = stack.pop().expect("well-formed tree");
                }
                let out_idx = free.pop().unwrap_or_else(|| {
                    pool.push(vec![zero; len]);
                    pool.len() - 1
                });
                let mut out = std::mem::take(&mut pool[out_idx]);
                {
                    let view = |s: Slot| -> &[T] {
                        match s {
                            Slot::Terminal(i) => terminals[i],
                            Slot::Buffer(b) => &pool[b],
                        }
                    };
                    let args = [view(operands[0]), view(operands[1])];
                    op(sym, &args[..arity], &mut out);
                }
                pool[out_idx] = out;
                for s in &operands[..arity] {
                    if let Slot::Buffer(b) = *s {
                        free.push(b);
                    }
                }
                stack.push(Slot::Buffer(out_idx));
            }
        }
    }
    (stack.pop().expect("non-empty tree"), pool)
}

fn check_naive(tree: &GpTree, terminals: &[BehaviorVector]) -> Result<usize> {
    let Some(first) = terminals.first() else {
        return Err(Error::usage("empty terminal set"));
    };
    let m = first.len();
    if let Some(bad) = terminals.iter().find(|t| t.len() != m) {
        return Err(Error::LengthMismatch {
            expected: m,
            got: bad.len(),
        });
    }
    if let Some(index) = tree.leaves().find(|&i| i >= terminals.len()) {
        return Err(Error::TerminalOutOfRange {
            index,
            count: terminals.len(),
        });
    }
    Ok(m)
}

fn eval_naive(tree: &GpTree, terminals: &[&[Value]], m: usize) -> Vec<Value> {
    let (slot, pool) = run_stack(tree, terminals, m, 0.0, |sym, args, out| sym.apply_columns(args, out));
    match slot {
        Slot::Terminal(i) => terminals[i].to_vec(),
        Slot::Buffer(b) => pool.into_iter().nth(b).expect("result buffer"),
    }
}

/// Output of `tree` on every fitness case, leaf `i` reading `terminals[i]`.
pub fn eval_tree(tree: &GpTree, terminals: &[BehaviorVector]) -> Result<BehaviorVector> {
    let m = check_naive(tree, terminals)?;
    let refs: Vec<&[Value]> = terminals.iter().map(|t| t.values()).collect();
    Ok(BehaviorVector::new(eval_naive(tree, &refs, m)))
}

/// Q of `tree` against the problem's targets.
pub fn fitness(tree: &GpTree, terminals: &[BehaviorVector], problem: &FitnessCaseTable) -> Result<Value> {
    let out = eval_tree(tree, terminals)?;
    crate::model::q_error(problem.targets(), &out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalBackend {
    #[default]
    Naive,
    Packed,
}

impl std::str::FromStr for EvalBackend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(Self::Naive),
            "packed" => Ok(Self::Packed),
            _ => Err(Error::config(format!("unknown backend {s:?} (naive|packed)"))),
        }
    }
}

/// Fitness oracle bound to one terminal set and one target vector.
#[derive(Debug, Clone)]
pub enum Evaluator {
    Naive {
        terminals: Vec<BehaviorVector>,
        targets: BehaviorVector,
    },
    Packed {
        terminals: Vec<Packed64>,
        targets: Packed64,
    },
}

impl Evaluator {
    pub fn new(
        backend: EvalBackend,
        terminals: &[BehaviorVector],
        problem: &FitnessCaseTable,
    ) -> Result<Self> {
        let m = problem.m();
        if terminals.is_empty() {
            return Err(Error::usage("empty terminal set"));
        }
        if let Some(bad) = terminals.iter().find(|t| t.len() != m) {
            return Err(Error::LengthMismatch {
                expected: m,
                got: bad.len(),
            });
        }
        Ok(match backend {
            EvalBackend::Naive => Self::Naive {
                terminals: terminals.to_vec(),
                targets: problem.targets().clone(),
            },
            EvalBackend::Packed => {
                if problem.algebra() != Algebra::Boolean {
                    return Err(Error::config("the packed backend only supports Boolean problems"));
                }
                Self::Packed {
                    terminals: terminals
                        .iter()
                        .map(|t| Packed64::pack(t))
                        .collect::<Result<_>>()?,
                    targets: Packed64::pack(problem.targets())?,
                }
            }
        })
    }

    pub fn terminal_count(&self) -> usize {
        match self {
            Self::Naive { terminals, .. } => terminals.len(),
            Self::Packed { terminals, .. } => terminals.len(),
        }
    }

    /// Q of a tree whose leaves are already known to be in range.
    pub fn q(&self, tree: &GpTree) -> Value {
        debug_assert!(tree.max_leaf().is_none_or(|i| i < self.terminal_count()));
        match self {
            Self::Naive { terminals, targets } => {
                let refs: Vec<&[Value]> = terminals.iter().map(|t| t.values()).collect();
                let (slot, pool) = run_stack(tree, &refs, targets.len(), 0.0, |sym, args, out| {
                    sym.apply_columns(args, out)
                });
                let out: &[Value] = match slot {
                    Slot::Terminal(i) => &terminals[i],
                    Slot::Buffer(b) => &pool[b],
                };
                q_error_unchecked(targets, out)
            }
            Self::Packed { terminals, targets } => packed_fitness_unchecked(tree, terminals, targets),
        }
    }

    pub fn checked_q(&self, tree: &GpTree) -> Result<Value> {
        if let Some(index) = tree.leaves().find(|&i| i >= self.terminal_count()) {
            return Err(Error::TerminalOutOfRange {
                index,
                count: self.terminal_count(),
            });
        }
        Ok(self.q(tree))
    }
}
