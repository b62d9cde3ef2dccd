//! Shared domain types: function symbols, fitness-case tables, behavior
//! vectors, the liquid, and the Q error.
//!
//! Values are `f64` in both algebras. Boolean problems use exactly `0.0` and
//! `1.0`, so one Q formula serves parity and regression alike.

use std::cell::Cell;
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::RecordId;

pub type Value = f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algebra {
    Boolean,
    Arithmetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FunctionSymbol {
    And,
    Or,
    Nand,
    Nor,
    Add,
    Sub,
    Mul,
    /// Protected division: a zero divisor yields 1.
    Div,
    Sin,
}

impl FunctionSymbol {
    pub const BOOLEAN: [FunctionSymbol; 4] = [Self::And, Self::Or, Self::Nand, Self::Nor];
    pub const ARITHMETIC: [FunctionSymbol; 5] =
        [Self::Add, Self::Sub, Self::Mul, Self::Div, Self::Sin];

    pub fn arity(self) -> usize {
        match self {
            Self::Sin => 1,
            _ => 2,
        }
    }

    pub fn algebra(self) -> Algebra {
        match self {
            Self::And | Self::Or | Self::Nand | Self::Nor => Algebra::Boolean,
            _ => Algebra::Arithmetic,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::And => "AND",
            Self::Or => "OR",
            Self::Nand => "NAND",
            Self::Nor => "NOR",
            Self::Add => "+",
            Self::Sub => "-",
            Self::Mul => "*",
            Self::Div => "/",
            Self::Sin => "sin",
        }
    }

    /// Applies the symbol to already-validated operands. `b` is ignored by
    /// unary symbols. Boolean operands must be exactly 0 or 1.
    #[inline]
    pub(crate) fn apply_raw(self, a: Value, b: Value) -> Value {
        let truth = |x: bool| if x { 1.0 } else { 0.0 };
        match self {
            Self::And => truth(a != 0.0 && b != 0.0),
            Self::Or => truth(a != 0.0 || b != 0.0),
            Self::Nand => truth(!(a != 0.0 && b != 0.0)),
            Self::Nor => truth(!(a != 0.0 || b != 0.0)),
            Self::Add => a + b,
            Self::Sub => a - b,
            Self::Mul => a * b,
            Self::Div => {
                if b == 0.0 {
                    1.0
                } else {
                    a / b
                }
            }
            Self::Sin => a.sin(),
        }
    }

    /// Elementwise application over whole behavior vectors, writing into
    /// `out`. Operand slices must all have `out.len()` entries.
    pub(crate) fn apply_columns(self, args: &[&[Value]], out: &mut [Value]) {
        count_applications(out.len());
        match args {
            [a] => {
                for (o, &x) in out.iter_mut().zip(a.iter()) {
                    *o = self.apply_raw(x, 0.0);
                }
            }
            [a, b] => {
                for ((o, &x), &y) in out.iter_mut().zip(a.iter()).zip(b.iter()) {
                    *o = self.apply_raw(x, y);
                }
            }
            _ => unreachable!("symbols have arity 1 or 2"),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let sym = match s.trim().to_ascii_uppercase().as_str() {
            "AND" => Self::And,
            "OR" => Self::Or,
            "NAND" => Self::Nand,
            "NOR" => Self::Nor,
            "+" | "ADD" => Self::Add,
            "-" | "SUB" => Self::Sub,
            "*" | "MUL" => Self::Mul,
            "/" | "DIV" => Self::Div,
            "SIN" => Self::Sin,
            _ => return None,
        };
        Some(sym)
    }
}

impl fmt::Display for FunctionSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn is_bool(v: Value) -> bool {
    v == 0.0 || v == 1.0
}

/// Applies `sym` to `args`, checking arity and the value domain.
pub fn apply_symbol(sym: FunctionSymbol, args: &[Value]) -> Result<Value> {
    if args.len() != sym.arity() {
        return Err(Error::Arity {
            symbol: sym,
            expected: sym.arity(),
            got: args.len(),
        });
    }
    if sym.algebra() == Algebra::Boolean {
        if let Some(bad) = args.iter().find(|v| !is_bool(**v)) {
            return Err(Error::usage(format!("{sym} applied to non-Boolean value {bad}")));
        }
    }
    count_applications(1);
    Ok(sym.apply_raw(args[0], args.get(1).copied().unwrap_or(0.0)))
}

/// Q = Σ|f_k − o_k|. For 0/1 vectors this is the Hamming distance.
pub fn q_error(targets: &[Value], outputs: &[Value]) -> Result<Value> {
    if targets.len() != outputs.len() {
        return Err(Error::LengthMismatch {
            expected: targets.len(),
            got: outputs.len(),
        });
    }
    Ok(q_error_unchecked(targets, outputs))
}

#[inline]
pub(crate) fn q_error_unchecked(targets: &[Value], outputs: &[Value]) -> Value {
    targets
        .iter()
        .zip(outputs)
        .map(|(f, o)| (f - o).abs())
        .sum()
}

thread_local! {
    static APPLICATIONS: Cell<u64> = const { Cell::new(0) };
}

#[inline]
fn count_applications(n: usize) {
    APPLICATIONS.with(|c| c.set(c.get() + n as u64));
}

/// Number of scalar symbol applications performed on this thread so far.
/// Used to check the O(m) cost of liquid item creation against the
/// O(m·g) cost of tree evaluation without timing anything.
pub fn symbol_applications() -> u64 {
    APPLICATIONS.with(Cell::get)
}

/// Validated, non-empty set of function symbols from a single algebra.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionSet {
    symbols: Vec<FunctionSymbol>,
}

impl FunctionSet {
    pub fn new(symbols: impl IntoIterator<Item = FunctionSymbol>) -> Result<Self> {
        let mut symbols: Vec<_> = symbols.into_iter().collect();
        symbols.dedup();
        let Some(first) = symbols.first() else {
            return Err(Error::config("function set must not be empty"));
        };
        let algebra = first.algebra();
        if symbols.iter().any(|s| s.algebra() != algebra) {
            return Err(Error::config("function set mixes Boolean and arithmetic symbols"));
        }
        Ok(Self { symbols })
    }

    /// {AND, OR, NAND, NOR}
    pub fn boolean() -> Self {
        Self {
            symbols: FunctionSymbol::BOOLEAN.to_vec(),
        }
    }

    /// {+, −, ×, protected ÷, sin}
    pub fn arithmetic() -> Self {
        Self {
            symbols: FunctionSymbol::ARITHMETIC.to_vec(),
        }
    }

    pub fn for_algebra(algebra: Algebra) -> Self {
        match algebra {
            Algebra::Boolean => Self::boolean(),
            Algebra::Arithmetic => Self::arithmetic(),
        }
    }

    pub fn symbols(&self) -> &[FunctionSymbol] {
        &self.symbols
    }

    pub fn contains(&self, sym: FunctionSymbol) -> bool {
        self.symbols.contains(&sym)
    }

    pub fn algebra(&self) -> Algebra {
        self.symbols[0].algebra()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Per-fitness-case outputs o₁..o_m of some expression. The length is fixed
/// at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BehaviorVector(Vec<Value>);

impl BehaviorVector {
    pub fn new(values: Vec<Value>) -> Self {
        Self(values)
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        Self(bits.iter().map(|&b| Value::from(b)).collect())
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn into_values(self) -> Vec<Value> {
        self.0
    }

    pub fn is_boolean(&self) -> bool {
        self.0.iter().all(|v| is_bool(*v))
    }
}

impl Deref for BehaviorVector {
    type Target = [Value];

    fn deref(&self) -> &[Value] {
        &self.0
    }
}

impl fmt::Display for BehaviorVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_boolean() {
            f.write_str("(")?;
            for v in &self.0 {
                write!(f, "{}", *v as u8)?;
            }
            f.write_str(")")
        } else {
            write!(f, "{:?}", self.0)
        }
    }
}

/// m fitness cases over n inputs plus one target each. Inputs are stored
/// column-wise since every consumer wants whole columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FitnessCaseTable {
    algebra: Algebra,
    columns: Vec<BehaviorVector>,
    targets: BehaviorVector,
}

impl FitnessCaseTable {
    /// Builds a table from row-major inputs (`rows[k][j]` = v_j^k).
    pub fn from_rows(algebra: Algebra, rows: &[Vec<Value>], targets: Vec<Value>) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::Data("a fitness-case table needs at least one case".into()));
        }
        let n = rows[0].len();
        if let Some((k, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Parse {
                row: k + 1,
                message: format!("expected {n} inputs, found {}", row.len()),
            });
        }
        let columns = (0..n)
            .map(|j| BehaviorVector(rows.iter().map(|r| r[j]).collect()))
            .collect();
        Self::from_columns(algebra, columns, BehaviorVector(targets))
    }

    pub fn from_columns(
        algebra: Algebra,
        columns: Vec<BehaviorVector>,
        targets: BehaviorVector,
    ) -> Result<Self> {
        let m = targets.len();
        if m == 0 {
            return Err(Error::Data("a fitness-case table needs at least one case".into()));
        }
        if columns.is_empty() {
            return Err(Error::Data("a fitness-case table needs at least one input".into()));
        }
        for c in &columns {
            if c.len() != m {
                return Err(Error::LengthMismatch {
                    expected: m,
                    got: c.len(),
                });
            }
        }
        let all = columns.iter().chain(std::iter::once(&targets));
        match algebra {
            Algebra::Boolean => {
                if all.clone().any(|c| !c.is_boolean()) {
                    return Err(Error::Data("Boolean table holds a value outside {0, 1}".into()));
                }
            }
            Algebra::Arithmetic => {
                if all.flat_map(|c| c.iter()).any(|v| !v.is_finite()) {
                    return Err(Error::Data("table holds a non-finite value".into()));
                }
            }
        }
        Ok(Self {
            algebra,
            columns,
            targets,
        })
    }

    pub fn algebra(&self) -> Algebra {
        self.algebra
    }

    /// Number of inputs.
    pub fn n(&self) -> usize {
        self.columns.len()
    }

    /// Number of fitness cases.
    pub fn m(&self) -> usize {
        self.targets.len()
    }

    /// Input `j` (0-based) across all cases.
    pub fn column(&self, j: usize) -> Option<&BehaviorVector> {
        self.columns.get(j)
    }

    pub fn columns(&self) -> &[BehaviorVector] {
        &self.columns
    }

    pub fn targets(&self) -> &BehaviorVector {
        &self.targets
    }

    /// v_j^k with 0-based `case` and `input`.
    pub fn input(&self, case: usize, input: usize) -> Value {
        self.columns[input][case]
    }

    pub fn row(&self, case: usize) -> Vec<Value> {
        self.columns.iter().map(|c| c[case]).collect()
    }
}

/// Ordered pool of behavior vectors serving as the GP terminal set.
#[derive(Debug, Clone, PartialEq)]
pub struct Liquid {
    items: Vec<BehaviorVector>,
    generation: u64,
    provenance: Option<Vec<RecordId>>,
}

impl Liquid {
    pub fn new(
        items: Vec<BehaviorVector>,
        generation: u64,
        provenance: Option<Vec<RecordId>>,
    ) -> Result<Self> {
        let Some(first) = items.first() else {
            return Err(Error::usage("liquid must hold at least one item"));
        };
        let m = first.len();
        if let Some(bad) = items.iter().find(|v| v.len() != m) {
            return Err(Error::LengthMismatch {
                expected: m,
                got: bad.len(),
            });
        }
        if let Some(ids) = &provenance {
            if ids.len() != items.len() {
                return Err(Error::LengthMismatch {
                    expected: items.len(),
                    got: ids.len(),
                });
            }
        }
        Ok(Self {
            items,
            generation,
            provenance,
        })
    }

    pub fn items(&self) -> &[BehaviorVector] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Length m shared by every item.
    pub fn item_len(&self) -> usize {
        self.items[0].len()
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn provenance_ids(&self) -> Option<&[RecordId]> {
        self.provenance.as_deref()
    }
}
