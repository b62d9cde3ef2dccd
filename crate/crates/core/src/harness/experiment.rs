use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gp::{reconstruct_expression, run_lsgp, run_standard_gp, RunResult};
use crate::harness::config::{Algorithm, ExperimentConfig};
use crate::harness::summary::{summarize, ExperimentSummary, RunRecord, TimingRecord, SUMMARY_HEADER};
use crate::model::{q_error, FitnessCaseTable, FunctionSet};
use crate::par::{self, Parallelism};

pub const RUNS_FILE: &str = "runs.jsonl";
pub const TIMINGS_FILE: &str = "timings.jsonl";
pub const SUMMARY_FILE: &str = "summary.csv";

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub summary: ExperimentSummary,
    pub records: Vec<RunRecord>,
    pub timings: Vec<TimingRecord>,
}

/// Seed of run `index`.
pub fn run_seed(base_seed: u64, index: usize) -> u64 {
    base_seed.wrapping_add(index as u64)
}

/// Executes run `index` of `config` in isolation.
pub fn execute_run(
    config: &ExperimentConfig,
    problem: &FitnessCaseTable,
    function_set: &FunctionSet,
    index: usize,
) -> Result<(RunRecord, RunResult)> {
    let seed = run_seed(config.base_seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let result = match config.algorithm {
        Algorithm::Lsgp => run_lsgp(
            problem,
            &config.gp,
            &config.liquid.resolve(problem.n()),
            function_set,
            config.ledger,
            &mut rng,
        )?,
        Algorithm::Gp => run_standard_gp(problem, &config.gp, function_set, &mut rng)?,
    };
    let reconstructed_q = match &result.ledger {
        Some(ledger) => {
            let expr = reconstruct_expression(&result.archive, Some(ledger))?;
            Some(q_error(problem.targets(), &expr.eval(problem)?)?)
        }
        None => None,
    };
    let record = RunRecord {
        run: index,
        seed,
        success: result.success,
        success_generation: result.success_generation,
        best_q: result.best_q,
        mean_tree_nodes: result.mean_tree_nodes,
        reconstructed_q,
    };
    Ok((record, result))
}

struct Outputs {
    runs: (PathBuf, File),
    timings: (PathBuf, File),
    summary: (PathBuf, File),
}

impl Outputs {
    fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let open = |name: &str| -> Result<(PathBuf, File)> {
            let p = dir.join(name);
            let f = File::create(&p).map_err(|e| Error::io(&p, e))?;
            Ok((p, f))
        };
        Ok(Self {
            runs: open(RUNS_FILE)?,
            timings: open(TIMINGS_FILE)?,
            summary: open(SUMMARY_FILE)?,
        })
    }
}

fn write_jsonl<T: serde::Serialize>((path, file): (PathBuf, File), rows: &[T]) -> Result<()> {
    let mut w = BufWriter::new(file);
    for r in rows {
        let line = serde_json::to_string(r).expect("records serialize");
        writeln!(w, "{line}").map_err(|e| Error::io(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}

/// Fields of the summary CSV row, in header order.
pub fn summary_row(config: &ExperimentConfig, summary: &ExperimentSummary) -> Vec<String> {
    vec![
        config.problem.to_string(),
        config.algorithm.to_string(),
        config.gp.pop_size.to_string(),
        config.gp.generations.to_string(),
        summary.runs.to_string(),
        config.base_seed.to_string(),
        summary.success_rate.to_string(),
        summary
            .mean_success_generation
            .map(|g| g.to_string())
            .unwrap_or_default(),
        summary.mean_best_q.to_string(),
        format!("{:.3}", summary.wall_time.as_secs_f64()),
    ]
}

fn write_summary((path, file): (PathBuf, File), row: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_writer(file);
    let io = |e: csv::Error| Error::io(&path, std::io::Error::other(e));
    w.write_record(SUMMARY_HEADER.split(',')).map_err(io)?;
    w.write_record(row).map_err(io)?;
    w.flush().map_err(|e| Error::io(&path, e))
}

/// Runs `config.runs` independent seeded runs and aggregates them. Output
/// files are created before the first run so an unwritable directory fails
/// fast. Records are ordered by run index whatever the worker count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let outputs = config.out_dir.as_deref().map(Outputs::create).transpose()?;
    let problem = config.problem.load()?;
    let function_set = FunctionSet::for_algebra(problem.algebra());

    let start = Instant::now();
    let mode = match config.workers {
        Some(1) => Parallelism::Sequential,
        _ => Parallelism::Parallel,
    };
    let results = par::with_workers(config.workers, || {
        par::map_range(mode, config.runs, |i| {
            execute_run(config, &problem, &function_set, i).map(|(rec, res)| {
                let timing = TimingRecord {
                    run: i,
                    seed: rec.seed,
                    elapsed_ms: res.elapsed.as_secs_f64() * 1e3,
                };
                (rec, timing)
            })
        })
    });
    let (records, timings): (Vec<_>, Vec<_>) = results.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();
    let mut summary = summarize(&records)?;
    summary.wall_time = start.elapsed();

    if let Some(out) = outputs {
        write_jsonl(out.runs, &records)?;
        write_jsonl(out.timings, &timings)?;
        write_summary(out.summary, &summary_row(config, &summary))?;
    }
    Ok(ExperimentOutcome {
        summary,
        records,
        timings,
    })
}

/// Reads `runs.jsonl` back.
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                row: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}
