//! Problem instances: even-k-parity truth tables and regression data.

use std::io::Write;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{Algebra, FitnessCaseTable, Value};

pub const MAX_PARITY_K: u32 = 20;

/// Even-k-parity truth table. Rows run in ascending binary order with x₁ as
/// the most significant bit; the target is 1 iff an even number of inputs
/// are 1.
pub fn make_parity(k: u32) -> Result<FitnessCaseTable> {
    if !(1..=MAX_PARITY_K).contains(&k) {
        return Err(Error::usage(format!(
            "parity arity must be in 1..={MAX_PARITY_K}, got {k}"
        )));
    }
    let m = 1usize << k;
    let bit = |row: usize, j: u32| ((row >> (k - 1 - j)) & 1) as Value;
    let rows: Vec<Vec<Value>> = (0..m).map(|r| (0..k).map(|j| bit(r, j)).collect()).collect();
    let targets = (0..m)
        .map(|r| if r.count_ones() % 2 == 0 { 1.0 } else { 0.0 })
        .collect();
    FitnessCaseTable::from_rows(Algebra::Boolean, &rows, targets)
}

/// f(x) = x⁴ + x³ + x² + x
pub fn quartic(x: Value) -> Value {
    x.powi(4) + x.powi(3) + x.powi(2) + x
}

/// `points` samples of the quartic polynomial with x uniform in [−1, 1].
pub fn make_quartic<R: Rng + ?Sized>(points: usize, rng: &mut R) -> Result<FitnessCaseTable> {
    if points == 0 {
        return Err(Error::usage("quartic needs at least one point"));
    }
    let xs: Vec<Value> = (0..points).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    table_for(&xs)
}

pub(crate) fn table_for(xs: &[Value]) -> Result<FitnessCaseTable> {
    let rows: Vec<Vec<Value>> = xs.iter().map(|&x| vec![x]).collect();
    FitnessCaseTable::from_rows(Algebra::Arithmetic, &rows, xs.iter().map(|&x| quartic(x)).collect())
}

/// Reads a regression table: `n` input columns then one target per row.
/// A first line whose first field is not numeric is taken as a header.
pub fn load_regression_csv(path: impl AsRef<Path>, n: usize) -> Result<FitnessCaseTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_regression_csv(file, n)
}

pub fn parse_regression_csv<R: std::io::Read>(reader: R, n: usize) -> Result<FitnessCaseTable> {
    if n == 0 {
        return Err(Error::usage("regression data needs at least one input column"));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if i == 0 && rec.get(0).is_some_and(|f| f.parse::<Value>().is_err()) {
            continue;
        }
        if rec.len() != n + 1 {
            return Err(Error::Parse {
                row,
                message: format!("expected {} fields, found {}", n + 1, rec.len()),
            });
        }
        let vals = rec
            .iter()
            .map(|f| {
                f.parse::<Value>().map_err(|_| Error::Parse {
                    row,
                    message: format!("not a number: {f:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(bad) = vals.iter().find(|v| !v.is_finite()) {
            return Err(Error::Data(format!("row {row}: non-finite value {bad}")));
        }
        targets.push(vals[n]);
        rows.push(vals[..n].to_vec());
    }
    if rows.is_empty() {
        return Err(Error::Data("no fitness cases in input".into()));
    }
    FitnessCaseTable::from_rows(Algebra::Arithmetic, &rows, targets)
}

/// Writes `table` in the format [`load_regression_csv`] reads. Values use
/// shortest round-trip formatting so a reload is exact.
pub fn write_regression_csv(table: &FitnessCaseTable, mut out: impl Write) -> std::io::Result<()> {
    let header: Vec<String> = (1..=table.n()).map(|j| format!("x{j}")).collect();
    writeln!(out, "{},f", header.join(","))?;
    for k in 0..table.m() {
        let mut fields: Vec<String> = table.row(k).iter().map(Value::to_string).collect();
        fields.push(table.targets()[k].to_string());
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}
