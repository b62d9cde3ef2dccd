use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lsgp::harness::{parity_preset, run_experiment, ExperimentConfig, WORKERS_ENV};

#[derive(Parser)]
#[command(name = "lsgp", version, about = "Liquid state genetic programming experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a batch of seeded runs and write runs.jsonl / summary.csv.
    Run(Box<RunArgs>),
    /// List the built-in even-parity presets.
    Presets,
}

#[derive(Args)]
struct RunArgs {
    /// Flat key=value file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// even-K preset for problem, population, generations and runs.
    #[arg(long)]
    preset: Option<String>,
    /// parity:K or regression:FILE
    #[arg(long)]
    problem: Option<String>,
    /// lsgp or gp
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    pop: Option<usize>,
    #[arg(long)]
    gens: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    liquid_size: Option<usize>,
    #[arg(long)]
    p_insert: Option<f64>,
    #[arg(long)]
    update_period: Option<usize>,
    /// Carry the input items over liquid updates (false: replace every item).
    #[arg(long)]
    keep_inputs: Option<bool>,
    /// naive or packed
    #[arg(long)]
    backend: Option<String>,
    /// Track liquid provenance and rebuild each archive over raw inputs.
    #[arg(long)]
    ledger: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Concurrent runs (default: $LSGP_WORKERS, else all cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    crossover_prob: Option<f64>,
    #[arg(long)]
    mutation_prob: Option<f64>,
    #[arg(long)]
    tournament_size: Option<usize>,
    #[arg(long)]
    elite_count: Option<usize>,
    #[arg(long)]
    max_height: Option<usize>,
}

impl RunArgs {
    fn pairs(&self) -> Result<Vec<(String, String)>, lsgp::Error> {
        let mut pairs = Vec::new();
        if let Ok(w) = std::env::var(WORKERS_ENV) {
            pairs.push(("workers".to_string(), w));
        }
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| lsgp::Error::Config(format!("{}: {e}", path.display())))?;
            pairs.extend(ExperimentConfig::parse_kv(&text)?);
        }
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                pairs.push((k.to_string(), v));
            }
        };
        put("preset", self.preset.clone());
        put("problem", self.problem.clone());
        put("algo", self.algo.clone());
        put("pop", self.pop.map(|v| v.to_string()));
        put("gens", self.gens.map(|v| v.to_string()));
        put("runs", self.runs.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("liquid-size", self.liquid_size.map(|v| v.to_string()));
        put("p-insert", self.p_insert.map(|v| v.to_string()));
        put("update-period", self.update_period.map(|v| v.to_string()));
        put("keep-inputs", self.keep_inputs.map(|v| v.to_string()));
        put("backend", self.backend.clone());
        put("ledger", self.ledger.then(|| "true".to_string()));
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("workers", self.workers.map(|v| v.to_string()));
        put("crossover-prob", self.crossover_prob.map(|v| v.to_string()));
        put("mutation-prob", self.mutation_prob.map(|v| v.to_string()));
        put("tournament-size", self.tournament_size.map(|v| v.to_string()));
        put("elite-count", self.elite_count.map(|v| v.to_string()));
        put("max-height", self.max_height.map(|v| v.to_string()));
        Ok(pairs)
    }
}

fn run(args: &RunArgs) -> ExitCode {
    let config = match args
        .pairs()
        .and_then(|p| ExperimentConfig::from_pairs(p.iter().map(|(k, v)| (k.as_str(), v.as_str()))))
    {
        Ok(c) => c,
        Err(e) => {
            eprintln!("lsgp: {e}");
            return ExitCode::from(2);
        }
    };
    match run_experiment(&config) {
        Ok(outcome) => {
            let s = &outcome.summary;
            println!(
                "{} {}: {}/{} successful (rate {}), mean best Q {}, {:.2}s",
                config.problem,
                config.algorithm,
                s.success_count,
                s.runs,
                s.success_rate,
                s.mean_best_q,
                s.wall_time.as_secs_f64()
            );
            if let Some(g) = s.mean_success_generation {
                println!("mean success generation {g}, median {}", s.median_success_generation.unwrap_or(0));
            }
            ExitCode::SUCCESS
        }
        Err(e @ (lsgp::Error::Config(_) | lsgp::Error::Usage(_))) => {
            eprintln!("lsgp: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("lsgp: {e}");
            ExitCode::FAILURE
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run(&args),
        Command::Presets => {
            println!("preset  pop    gens  runs");
            for k in 3..=8 {
                let (pop, gens, runs) = parity_preset(k).expect("preset");
                println!("even-{k}  {pop:<6} {gens:<5} {runs}");
            }
            ExitCode::SUCCESS
        }
    }
}
