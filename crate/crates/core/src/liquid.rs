//! Creation and generational update of the liquid.
//!
//! Items are created either by insertion (a raw input column) or by
//! recombination (a function symbol applied elementwise to one or two parent
//! items). Both cost at most m symbol applications, independent of how deep
//! the expression behind an item is.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::{ProvenanceLedger, RecordId};
use crate::model::{BehaviorVector, FitnessCaseTable, FunctionSet, FunctionSymbol, Liquid, Value};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiquidParams {
    pub liquid_size: usize,
    pub p_insert: f64,
    /// GP generations between liquid updates.
    pub update_period: usize,
    /// Carry the first n slots (the raw inputs after initialization) over
    /// every update instead of regenerating them.
    pub keep_inputs: bool,
}

impl LiquidParams {
    /// Twice the input count, insertion probability 0.05, update every 5
    /// GP generations.
    pub fn for_inputs(n: usize) -> Self {
        Self {
            liquid_size: 2 * n,
            p_insert: 0.05,
            update_period: 5,
            keep_inputs: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.liquid_size == 0 {
            return Err(Error::config("liquid_size must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.p_insert) {
            return Err(Error::config(format!("p_insert {} outside [0, 1]", self.p_insert)));
        }
        if self.update_period == 0 {
            return Err(Error::config("update_period must be at least 1"));
        }
        Ok(())
    }
}

/// Input column `j` (0-based) as a liquid item.
pub fn terminal_vector(problem: &FitnessCaseTable, j: usize) -> Result<BehaviorVector> {
    problem.column(j).cloned().ok_or(Error::TerminalOutOfRange {
        index: j,
        count: problem.n(),
    })
}

/// Initial liquid made only of single-terminal items. With
/// `liquid_size ≥ n`, slots `0..n` hold the inputs in order and the rest are
/// uniform random inputs; otherwise every slot is random.
pub fn init_liquid<R: Rng + ?Sized>(
    problem: &FitnessCaseTable,
    params: &LiquidParams,
    rng: &mut R,
    mut ledger: Option<&mut ProvenanceLedger>,
) -> Result<Liquid> {
    params.validate()?;
    let n = problem.n();
    let fixed = if params.liquid_size >= n { n } else { 0 };
    let mut items = Vec::with_capacity(params.liquid_size);
    let mut ids = Vec::with_capacity(params.liquid_size);
    for slot in 0..params.liquid_size {
        let j = if slot < fixed { slot } else { rng.gen_range(0..n) };
        items.push(terminal_vector(problem, j)?);
        if let Some(l) = ledger.as_deref_mut() {
            ids.push(l.push_terminal(j));
        }
    }
    Liquid::new(items, 0, ledger.map(|_| ids))
}

/// Elementwise application of `sym` to the parent items.
pub fn recombine(
    liquid: &Liquid,
    sym: FunctionSymbol,
    parents: &[usize],
    function_set: &FunctionSet,
) -> Result<BehaviorVector> {
    if !function_set.contains(sym) {
        return Err(Error::SymbolNotInSet { symbol: sym });
    }
    if parents.len() != sym.arity() {
        return Err(Error::Arity {
            symbol: sym,
            expected: sym.arity(),
            got: parents.len(),
        });
    }
    if let Some(&bad) = parents.iter().find(|&&p| p >= liquid.len()) {
        return Err(Error::TerminalOutOfRange {
            index: bad,
            count: liquid.len(),
        });
    }
    let args: Vec<&[Value]> = parents.iter().map(|&p| liquid.items()[p].values()).collect();
    let mut out = vec![0.0; liquid.item_len()];
    sym.apply_columns(&args, &mut out);
    Ok(BehaviorVector::new(out))
}

/// A uniformly chosen input column. Returns the column and its index.
pub fn insert_item<R: Rng + ?Sized>(problem: &FitnessCaseTable, rng: &mut R) -> (usize, BehaviorVector) {
    let j = rng.gen_range(0..problem.n());
    (j, problem.columns()[j].clone())
}

/// Builds the next liquid generation. Each new item is an insertion with
/// probability `p_insert`, otherwise a recombination with a uniform symbol
/// and uniform parents (with replacement) from the old liquid. All slots
/// are regenerated, except the first n when `keep_inputs` is set.
pub fn step_liquid<R: Rng + ?Sized>(
    liquid: &Liquid,
    problem: &FitnessCaseTable,
    params: &LiquidParams,
    function_set: &FunctionSet,
    rng: &mut R,
    mut ledger: Option<&mut ProvenanceLedger>,
) -> Result<Liquid> {
    params.validate()?;
    let old_ids = match (liquid.provenance_ids(), ledger.is_some()) {
        (Some(ids), true) => Some(ids),
        (None, false) => None,
        _ => {
            return Err(Error::usage(
                "ledger must be supplied exactly when the liquid carries provenance",
            ))
        }
    };
    if liquid.len() != params.liquid_size {
        return Err(Error::LengthMismatch {
            expected: params.liquid_size,
            got: liquid.len(),
        });
    }
    let symbols = function_set.symbols();
    let kept = if params.keep_inputs && params.liquid_size >= problem.n() {
        problem.n()
    } else {
        0
    };
    let mut items = liquid.items()[..kept].to_vec();
    let mut ids: Vec<RecordId> = old_ids.map(|ids| ids[..kept].to_vec()).unwrap_or_default();
    let mut parents = Vec::with_capacity(2);
    for _ in kept..params.liquid_size {
        if rng.gen_bool(params.p_insert) {
            let (j, item) = insert_item(problem, rng);
            items.push(item);
            if let Some(l) = ledger.as_deref_mut() {
                ids.push(l.push_terminal(j));
            }
        } else {
            let sym = symbols[rng.gen_range(0..symbols.len())];
            parents.clear();
            parents.extend((0..sym.arity()).map(|_| rng.gen_range(0..liquid.len())));
            items.push(recombine(liquid, sym, &parents, function_set)?);
            if let (Some(l), Some(old)) = (ledger.as_deref_mut(), old_ids) {
                ids.push(l.push_combination(sym, parents.iter().map(|&p| old[p]).collect())?);
            }
        }
    }
    Liquid::new(items, liquid.generation() + 1, ledger.map(|_| ids))
}
