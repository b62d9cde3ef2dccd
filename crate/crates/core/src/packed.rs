//! Bit-parallel Boolean evaluation.
//!
//! A Boolean behavior vector of length m is packed into ⌈m / w⌉ words of w
//! bits; bit k of the vector lives at bit `k % w` of word `k / w`. Function
//! symbols become word-wide bitwise operations and Q becomes the popcount
//! of `output XOR targets`. Bits at positions ≥ m are kept at zero after
//! every operation.

use num_traits::PrimInt;

use crate::error::{Error, Result};
use crate::eval::{run_stack, Slot};
use crate::gp::GpTree;
use crate::model::{Algebra, BehaviorVector, FunctionSymbol, Value};

/// Machine word usable as packing unit.
pub trait Word: PrimInt + Send + Sync + std::fmt::Debug + 'static {
    const BITS: usize;
}

macro_rules! impl_word {
    ($($t:ty),*) => {$(
        impl Word for $t {
            const BITS: usize = <$t>::BITS as usize;
        }
    )*};
}
impl_word!(u8, u16, u32, u64, u128);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedVector<W: Word = u64> {
    words: Vec<W>,
    m: usize,
}

pub type Packed64 = PackedVector<u64>;

impl<W: Word> PackedVector<W> {
    pub fn zeros(m: usize) -> Self {
        Self {
            words: vec![W::zero(); m.div_ceil(W::BITS)],
            m,
        }
    }

    pub fn pack(v: &[Value]) -> Result<Self> {
        let mut out = Self::zeros(v.len());
        for (k, &x) in v.iter().enumerate() {
            if x == 1.0 {
                out.words[k / W::BITS] = out.words[k / W::BITS] | (W::one() << (k % W::BITS));
            } else if x != 0.0 {
                return Err(Error::usage(format!("cannot pack non-Boolean value {x} at {k}")));
            }
        }
        Ok(out)
    }

    pub fn unpack(&self) -> BehaviorVector {
        BehaviorVector::new((0..self.m).map(|k| if self.bit(k) { 1.0 } else { 0.0 }).collect())
    }

    pub fn bit(&self, k: usize) -> bool {
        assert!(k < self.m, "bit {k} out of range for length {}", self.m);
        (self.words[k / W::BITS] >> (k % W::BITS)) & W::one() == W::one()
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn words(&self) -> &[W] {
        &self.words
    }

    pub fn word_width() -> usize {
        W::BITS
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// True when every bit at a position ≥ m is zero.
    pub fn is_canonical(&self) -> bool {
        self.words.last().is_none_or(|&w| w & !tail_mask::<W>(self.m) == W::zero())
    }

    /// Hamming distance to `other`.
    pub fn distance(&self, other: &Self) -> Result<usize> {
        if self.m != other.m {
            return Err(Error::LengthMismatch {
                expected: self.m,
                got: other.m,
            });
        }
        Ok(hamming(&self.words, &other.words))
    }
}

/// Mask of the valid bits in the final word for a vector of length `m`.
fn tail_mask<W: Word>(m: usize) -> W {
    match m % W::BITS {
        0 => !W::zero(),
        r => (W::one() << r) - W::one(),
    }
}

fn hamming<W: Word>(a: &[W], b: &[W]) -> usize {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x ^ y).count_ones() as usize)
        .sum()
}

/// Word-wide kernel. `out` must have the operands' word count; the tail of
/// the final word is re-masked for the complementing symbols.
#[inline]
pub(crate) fn apply_words<W: Word>(sym: FunctionSymbol, args: &[&[W]], out: &mut [W], m: usize) {
    match (sym, args) {
        (FunctionSymbol::And, [a, b]) => zip2(out, a, b, |x, y| x & y),
        (FunctionSymbol::Or, [a, b]) => zip2(out, a, b, |x, y| x | y),
        (FunctionSymbol::Nand, [a, b]) => {
            zip2(out, a, b, |x, y| !(x & y));
            mask_tail(out, m);
        }
        (FunctionSymbol::Nor, [a, b]) => {
            zip2(out, a, b, |x, y| !(x | y));
            mask_tail(out, m);
        }
        _ => unreachable!("packed kernel called with {sym}"),
    }
}

#[inline]
fn zip2<W: Word>(out: &mut [W], a: &[W], b: &[W], f: impl Fn(W, W) -> W) {
    for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
        *o = f(x, y);
    }
}

#[inline]
fn mask_tail<W: Word>(out: &mut [W], m: usize) {
    if let Some(last) = out.last_mut() {
        *last = *last & tail_mask::<W>(m);
    }
}

/// Applies a Boolean symbol to packed operands.
pub fn packed_apply<W: Word>(sym: FunctionSymbol, args: &[&PackedVector<W>]) -> Result<PackedVector<W>> {
    if sym.algebra() != Algebra::Boolean {
        return Err(Error::Unsupported(format!("{sym} has no packed form")));
    }
    if args.len() != sym.arity() {
        return Err(Error::Arity {
            symbol: sym,
            expected: sym.arity(),
            got: args.len(),
        });
    }
    let m = args[0].m;
    if let Some(bad) = args.iter().find(|a| a.m != m) {
        return Err(Error::LengthMismatch {
            expected: m,
            got: bad.m,
        });
    }
    let mut out = PackedVector::zeros(m);
    let words: Vec<&[W]> = args.iter().map(|a| a.words.as_slice()).collect();
    apply_words(sym, &words, &mut out.words, m);
    Ok(out)
}

/// Evaluates `tree` over packed terminals.
pub fn packed_eval<W: Word>(tree: &GpTree, terminals: &[PackedVector<W>]) -> Result<PackedVector<W>> {
    let m = check_terminals(tree, terminals)?;
    let refs: Vec<&[W]> = terminals.iter().map(|t| t.words.as_slice()).collect();
    let words = m.div_ceil(W::BITS);
    let (slot, pool) = run_stack(tree, &refs, words, W::zero(), |sym, args, out| {
        apply_words(sym, args, out, m)
    });
    let words = match slot {
        Slot::Terminal(i) => terminals[i].words.clone(),
        Slot::Buffer(b) => pool.into_iter().nth(b).expect("result buffer"),
    };
    Ok(PackedVector { words, m })
}

/// Q of `tree` as popcount(output XOR targets).
pub fn packed_fitness<W: Word>(
    tree: &GpTree,
    terminals: &[PackedVector<W>],
    targets: &PackedVector<W>,
) -> Result<Value> {
    let m = check_terminals(tree, terminals)?;
    if targets.m != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: targets.m,
        });
    }
    Ok(packed_fitness_unchecked(tree, terminals, targets))
}

pub(crate) fn packed_fitness_unchecked<W: Word>(
    tree: &GpTree,
    terminals: &[PackedVector<W>],
    targets: &PackedVector<W>,
) -> Value {
    let m = targets.m;
    let refs: Vec<&[W]> = terminals.iter().map(|t| t.words.as_slice()).collect();
    let (slot, pool) = run_stack(tree, &refs, targets.words.len(), W::zero(), |sym, args, out| {
        apply_words(sym, args, out, m)
    });
    let out: &[W] = match slot {
        Slot::Terminal(i) => &terminals[i].words,
        Slot::Buffer(b) => &pool[b],
    };
    hamming(out, &targets.words) as Value
}

fn check_terminals<W: Word>(tree: &GpTree, terminals: &[PackedVector<W>]) -> Result<usize> {
    let Some(first) = terminals.first() else {
        return Err(Error::usage("empty terminal set"));
    };
    if let Some(bad) = terminals.iter().find(|t| t.m != first.m) {
        return Err(Error::LengthMismatch {
            expected: first.m,
            got: bad.m,
        });
    }
    if let Some(index) = tree.leaves().find(|&i| i >= terminals.len()) {
        return Err(Error::TerminalOutOfRange {
            index,
            count: terminals.len(),
        });
    }
    if let Some(sym) = tree.symbols().find(|s| s.algebra() != Algebra::Boolean) {
        return Err(Error::Unsupported(format!("{sym} has no packed form")));
    }
    Ok(first.m)
}
