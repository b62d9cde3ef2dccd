use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::EvalBackend;
use crate::gp::GpParams;
use crate::liquid::LiquidParams;
use crate::model::FitnessCaseTable;
use crate::problems::{load_regression_csv, make_parity, MAX_PARITY_K};

pub const WORKERS_ENV: &str = "LSGP_WORKERS";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProblemSpec {
    Parity(u32),
    Regression(PathBuf),
}

impl ProblemSpec {
    pub fn load(&self) -> Result<FitnessCaseTable> {
        match self {
            ProblemSpec::Parity(k) => make_parity(*k),
            ProblemSpec::Regression(path) => load_regression_csv(path, regression_inputs(path)?),
        }
    }
}

/// Input count of a regression file: fields in the first data row minus one.
fn regression_inputs(path: &Path) -> Result<usize> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    for (i, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.iter().all(|f| f.is_empty()) {
            continue;
        }
        if i == 0 && fields[0].parse::<f64>().is_err() {
            continue;
        }
        return match fields.len() {
            0 | 1 => Err(Error::Parse {
                row: i + 1,
                message: "need at least one input and one target column".into(),
            }),
            n => Ok(n - 1),
        };
    }
    Err(Error::Data(format!("{} holds no fitness cases", path.display())))
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemSpec::Parity(k) => write!(f, "parity:{k}"),
            ProblemSpec::Regression(p) => write!(f, "regression:{}", p.display()),
        }
    }
}

impl std::str::FromStr for ProblemSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some(("parity", k)) => {
                let k: u32 = k
                    .parse()
                    .map_err(|_| Error::config(format!("bad parity arity {k:?}")))?;
                if !(1..=MAX_PARITY_K).contains(&k) {
                    return Err(Error::config(format!("parity arity must be in 1..={MAX_PARITY_K}")));
                }
                Ok(ProblemSpec::Parity(k))
            }
            Some(("regression", path)) if !path.is_empty() => Ok(ProblemSpec::Regression(path.into())),
            _ => Err(Error::config(format!(
                "unknown problem {s:?} (expected parity:K or regression:FILE)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Lsgp,
    Gp,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Lsgp => "lsgp",
            Algorithm::Gp => "gp",
        })
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lsgp" => Ok(Algorithm::Lsgp),
            "gp" => Ok(Algorithm::Gp),
            _ => Err(Error::config(format!("unknown algorithm {s:?} (lsgp|gp)"))),
        }
    }
}

/// Liquid settings before the problem's input count is known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiquidSettings {
    /// Defaults to twice the input count.
    pub liquid_size: Option<usize>,
    pub p_insert: f64,
    pub update_period: usize,
    pub keep_inputs: bool,
}

impl Default for LiquidSettings {
    fn default() -> Self {
        let d = LiquidParams::for_inputs(1);
        Self {
            liquid_size: None,
            p_insert: d.p_insert,
            update_period: d.update_period,
            keep_inputs: d.keep_inputs,
        }
    }
}

impl LiquidSettings {
    pub fn resolve(&self, n: usize) -> LiquidParams {
        LiquidParams {
            liquid_size: self.liquid_size.unwrap_or(2 * n),
            p_insert: self.p_insert,
            update_period: self.update_period,
            keep_inputs: self.keep_inputs,
        }
    }
}

/// Population size and generation budget per even-parity instance, with
/// the number of runs originally performed.
pub fn parity_preset(k: u32) -> Option<(usize, usize, usize)> {
    Some(match k {
        3 => (100, 50, 100),
        4 => (1000, 50, 100),
        5 => (5000, 50, 100),
        6 => (5000, 500, 100),
        7 => (5000, 1000, 100),
        8 => (10000, 2000, 8),
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub algorithm: Algorithm,
    pub gp: GpParams,
    pub liquid: LiquidSettings,
    pub runs: usize,
    pub base_seed: u64,
    pub ledger: bool,
    pub out_dir: Option<PathBuf>,
    /// Worker threads for concurrent runs. `Some(1)` runs them one after
    /// another; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(problem: ProblemSpec, algorithm: Algorithm, gp: GpParams, runs: usize, base_seed: u64) -> Self {
        Self {
            problem,
            algorithm,
            gp,
            liquid: LiquidSettings::default(),
            runs,
            base_seed,
            ledger: false,
            out_dir: None,
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::config("runs must be at least 1"));
        }
        self.gp.validate()?;
        if self.algorithm == Algorithm::Lsgp {
            self.liquid.resolve(1).validate()?;
        }
        if self.ledger && self.algorithm != Algorithm::Lsgp {
            return Err(Error::config("the provenance ledger only applies to lsgp"));
        }
        if matches!(self.problem, ProblemSpec::Regression(_)) && self.gp.backend == EvalBackend::Packed {
            return Err(Error::config("the packed backend only supports parity problems"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("worker count must be at least 1"));
        }
        Ok(())
    }

    /// Builds a config from `key=value` pairs, applied in order. Keys use
    /// the long flag names (`pop`, `gens`, `liquid-size`, ...); `_` and `-`
    /// are interchangeable. A `preset=even-K` pair is applied first.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let pairs: Vec<(String, &str)> = pairs
            .into_iter()
            .map(|(k, v)| (k.trim().replace('_', "-").to_ascii_lowercase(), v.trim()))
            .collect();

        let mut problem: Option<ProblemSpec> = None;
        let mut algorithm: Option<Algorithm> = None;
        let mut gp = GpParams::default();
        let mut runs: Option<usize> = None;
        let mut seed: Option<u64> = None;
        for (_, v) in pairs.iter().filter(|(k, _)| k == "preset") {
            let k = v
                .strip_prefix("even-")
                .and_then(|k| k.parse::<u32>().ok())
                .ok_or_else(|| Error::config(format!("unknown preset {v:?} (even-3 .. even-8)")))?;
            let (pop, gens, r) =
                parity_preset(k).ok_or_else(|| Error::config(format!("no preset for even-{k}")))?;
            problem = Some(ProblemSpec::Parity(k));
            gp.pop_size = pop;
            gp.generations = gens;
            runs = Some(r);
        }

        let mut cfg_liquid = LiquidSettings::default();
        let mut ledger = false;
        let mut out_dir = None;
        let mut workers = None;
        for (key, value) in &pairs {
            let v = *value;
            match key.as_str() {
                "preset" => {}
                "problem" => problem = Some(v.parse()?),
                "algo" | "algorithm" => algorithm = Some(v.parse()?),
                "pop" => gp.pop_size = num(key, v)?,
                "gens" | "generations" => gp.generations = num(key, v)?,
                "runs" => runs = Some(num(key, v)?),
                "seed" => seed = Some(num(key, v)?),
                "liquid-size" => cfg_liquid.liquid_size = Some(num(key, v)?),
                "p-insert" => cfg_liquid.p_insert = num(key, v)?,
                "update-period" => cfg_liquid.update_period = num(key, v)?,
                "keep-inputs" => cfg_liquid.keep_inputs = flag(key, v)?,
                "backend" => gp.backend = v.parse()?,
                "ledger" => ledger = flag(key, v)?,
                "out" => out_dir = Some(PathBuf::from(v)),
                "workers" => workers = Some(num(key, v)?),
                "max-height" => gp.max_height = num(key, v)?,
                "crossover-prob" => gp.crossover_prob = num(key, v)?,
                "mutation-prob" => gp.mutation_prob = num(key, v)?,
                "tournament-size" => gp.tournament_size = num(key, v)?,
                "elite-count" => gp.elite_count = num(key, v)?,
                "success-threshold" => gp.success_threshold = num(key, v)?,
                other => return Err(Error::config(format!("unknown key {other:?}"))),
            }
        }
        let cfg = Self {
            problem: problem.ok_or_else(|| Error::config("missing problem"))?,
            algorithm: algorithm.ok_or_else(|| Error::config("missing algo"))?,
            gp,
            liquid: cfg_liquid,
            runs: runs.ok_or_else(|| Error::config("missing runs"))?,
            base_seed: seed.unwrap_or(0),
            ledger,
            out_dir,
            workers,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses the flat `key=value` format; blank lines and `#` comments are
    /// skipped.
    pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}: expected key=value, got {line:?}", i + 1))
            })?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(out)
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::config(format!("{key}: cannot parse {v:?}")))
}

fn flag(key: &str, v: &str) -> Result<bool> {
    match v {
        "" | "1" | "true" | "on" | "yes" => Ok(true),
        "0" | "false" | "off" | "no" => Ok(false),
        _ => Err(Error::config(format!("{key}: expected a boolean, got {v:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_problem_specs() {
        assert_eq!("parity:3".parse::<ProblemSpec>().unwrap(), ProblemSpec::Parity(3));
        assert!("parity:0".parse::<ProblemSpec>().is_err());
        assert!("parity:x".parse::<ProblemSpec>().is_err());
        assert_eq!(
            "regression:data.csv".parse::<ProblemSpec>().unwrap(),
            ProblemSpec::Regression("data.csv".into())
        );
        assert!("xor:2".parse::<ProblemSpec>().is_err());
    }

    #[test]
    fn pairs_build_a_config() {
        let cfg = ExperimentConfig::from_pairs([
            ("problem", "parity:4"),
            ("algo", "lsgp"),
            ("pop", "1000"),
            ("gens", "50"),
            ("runs", "10"),
            ("seed", "7"),
            ("liquid_size", "10"),
            ("p-insert", "0.1"),
            ("backend", "packed"),
            ("ledger", "true"),
        ])
        .unwrap();
        assert_eq!(cfg.problem, ProblemSpec::Parity(4));
        assert_eq!(cfg.gp.pop_size, 1000);
        assert_eq!(cfg.liquid.resolve(4).liquid_size, 10);
        assert_eq!(cfg.liquid.resolve(4).p_insert, 0.1);
        assert_eq!(cfg.gp.backend, EvalBackend::Packed);
        assert!(cfg.ledger);
        assert_eq!(cfg.base_seed, 7);
    }

    #[test]
    fn preset_then_override() {
        let cfg = ExperimentConfig::from_pairs([("algo", "gp"), ("runs", "3"), ("preset", "even-5")]).unwrap();
        assert_eq!(cfg.problem, ProblemSpec::Parity(5));
        assert_eq!((cfg.gp.pop_size, cfg.gp.generations, cfg.runs), (5000, 50, 3));
        assert_eq!(parity_preset(8), Some((10000, 2000, 8)));
    }

    #[test]
    fn config_errors() {
        assert!(ExperimentConfig::from_pairs([("problem", "parity:3"), ("algo", "gp")]).is_err());
        assert!(ExperimentConfig::from_pairs([("problem", "parity:3"), ("algo", "gp"), ("runs", "0")]).is_err());
        assert!(ExperimentConfig::from_pairs([("problem", "parity:3"), ("algo", "gp"), ("runs", "1"), ("bogus", "1")])
            .is_err());
        assert!(
            ExperimentConfig::from_pairs([("problem", "parity:3"), ("algo", "gp"), ("runs", "1"), ("ledger", "on")])
                .is_err()
        );
        assert!(ExperimentConfig::parse_kv("pop 5").is_err());
        let kv = ExperimentConfig::parse_kv("# c\n\npop = 5\nalgo=gp\n").unwrap();
        assert_eq!(kv, vec![("pop".into(), "5".into()), ("algo".into(), "gp".into())]);
    }
}
