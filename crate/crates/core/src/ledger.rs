//! Append-only history of liquid items.
//!
//! A liquid item only stores its behavior vector. When the ledger is enabled
//! every item also gets a record pointing at the records of its parents, so
//! the expression behind any item can be rebuilt over the raw inputs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BehaviorVector, FitnessCaseTable, FunctionSymbol, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RecordId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Record {
    /// Raw input column `j` (0-based).
    Terminal(usize),
    Combination {
        symbol: FunctionSymbol,
        parents: Vec<RecordId>,
    },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProvenanceLedger {
    records: Vec<Record>,
}

impl ProvenanceLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: RecordId) -> Option<&Record> {
        self.records.get(id.0)
    }

    pub fn push_terminal(&mut self, input: usize) -> RecordId {
        self.records.push(Record::Terminal(input));
        RecordId(self.records.len() - 1)
    }

    /// Appends a combination record. Parents must already be in the ledger,
    /// which keeps the records in topological order.
    pub fn push_combination(
        &mut self,
        symbol: FunctionSymbol,
        parents: Vec<RecordId>,
    ) -> Result<RecordId> {
        if parents.len() != symbol.arity() {
            return Err(Error::Arity {
                symbol,
                expected: symbol.arity(),
                got: parents.len(),
            });
        }
        let next = self.records.len();
        if let Some(p) = parents.iter().find(|p| p.0 >= next) {
            return Err(Error::usage(format!(
                "parent record {} does not precede new record {next}",
                p.0
            )));
        }
        self.records.push(Record::Combination { symbol, parents });
        Ok(RecordId(next))
    }

    /// Recomputes the behavior vector of `id` from the raw inputs.
    pub fn replay(&self, id: RecordId, table: &FitnessCaseTable) -> Result<BehaviorVector> {
        self.check(id)?;
        // Memoized over the reachable prefix so shared ancestry is computed once.
        let mut memo: Vec<Option<Vec<Value>>> = vec![None; id.0 + 1];
        let mut stack = vec![id.0];
        while let Some(&top) = stack.last() {
            if memo[top].is_some() {
                stack.pop();
                continue;
            }
            match &self.records[top] {
                Record::Terminal(j) => {
                    let col = table.column(*j).ok_or(Error::TerminalOutOfRange {
                        index: *j,
                        count: table.n(),
                    })?;
                    memo[top] = Some(col.to_vec());
                    stack.pop();
                }
                Record::Combination { symbol, parents } => {
                    let pending: Vec<usize> = parents
                        .iter()
                        .map(|p| p.0)
                        .filter(|p| memo[*p].is_none())
                        .collect();
                    if pending.is_empty() {
                        let args: Vec<&[Value]> = parents
                            .iter()
                            .map(|p| memo[p.0].as_deref().expect("parent computed"))
                            .collect();
                        let mut out = vec![0.0; table.m()];
                        symbol.apply_columns(&args, &mut out);
                        memo[top] = Some(out);
                        stack.pop();
                    } else {
                        stack.extend(pending);
                    }
                }
            }
        }
        Ok(BehaviorVector::new(memo.swap_remove(id.0).expect("root computed")))
    }

    /// Expands `id` into an expression over raw inputs.
    pub fn expression(&self, id: RecordId) -> Result<Expr> {
        self.check(id)?;
        Ok(match &self.records[id.0] {
            Record::Terminal(j) => Expr::Input(*j),
            Record::Combination { symbol, parents } => Expr::Apply(
                *symbol,
                parents
                    .iter()
                    .map(|p| self.expression(*p))
                    .collect::<Result<_>>()?,
            ),
        })
    }

    /// Every symbol used anywhere in the ancestry of `id`.
    pub fn symbols_used(&self, id: RecordId) -> Result<Vec<FunctionSymbol>> {
        self.check(id)?;
        let mut seen = vec![false; id.0 + 1];
        let mut out = Vec::new();
        let mut stack = vec![id.0];
        while let Some(i) = stack.pop() {
            if std::mem::replace(&mut seen[i], true) {
                continue;
            }
            if let Record::Combination { symbol, parents } = &self.records[i] {
                if !out.contains(symbol) {
                    out.push(*symbol);
                }
                stack.extend(parents.iter().map(|p| p.0));
            }
        }
        out.sort();
        Ok(out)
    }

    fn check(&self, id: RecordId) -> Result<()> {
        if id.0 < self.records.len() {
            Ok(())
        } else {
            Err(Error::usage(format!("record {} not in ledger", id.0)))
        }
    }
}

/// Expression tree over raw inputs.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Input(usize),
    Apply(FunctionSymbol, Vec<Expr>),
}

impl Expr {
    pub fn eval(&self, table: &FitnessCaseTable) -> Result<BehaviorVector> {
        match self {
            Expr::Input(j) => table.column(*j).cloned().ok_or(Error::TerminalOutOfRange {
                index: *j,
                count: table.n(),
            }),
            Expr::Apply(symbol, args) => {
                if args.len() != symbol.arity() {
                    return Err(Error::Arity {
                        symbol: *symbol,
                        expected: symbol.arity(),
                        got: args.len(),
                    });
                }
                let vals = args
                    .iter()
                    .map(|a| a.eval(table))
                    .collect::<Result<Vec<_>>>()?;
                let refs: Vec<&[Value]> = vals.iter().map(|v| v.values()).collect();
                let mut out = vec![0.0; table.m()];
                symbol.apply_columns(&refs, &mut out);
                Ok(BehaviorVector::new(out))
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Input(_) => 1,
            Expr::Apply(_, args) => 1 + args.iter().map(Expr::node_count).sum::<usize>(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Input(j) => write!(f, "x{}", j + 1),
            Expr::Apply(symbol, args) => {
                write!(f, "{symbol}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}
