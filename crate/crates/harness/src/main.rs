use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use ccmckp::instance::{read_instance, write_instance, Benchmark, Instance, Scale};
use ccmckp::nhils::{random_initialization, Ablation};
use ccmckp::opera::StageSchedule;
use ccmckp::rng::{stream, tag};
use ccmckp_harness::output::write_metric_rows;
use ccmckp_harness::{
    compare_evaluators, load_fronts, recompute_metrics, run_plan, write_bundle, Budget, ExperimentPlan,
};

#[derive(Parser)]
#[command(name = "ccmckp", version, about = "Chance-constrained multiple-choice knapsack experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate benchmark instances as JSON documents.
    Gen {
        /// `lab`, `app` or `all`.
        #[arg(long, default_value = "all")]
        benchmark: String,
        /// `ls1` .. `ls6` or `all`.
        #[arg(long, default_value = "all")]
        scale: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "instances")]
        out: PathBuf,
    },
    /// Execute an experiment plan.
    Run {
        /// TOML plan file.
        plan: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        repetitions: Option<usize>,
        /// Fixed generation budget for every run.
        #[arg(long, conflicts_with = "matched_to")]
        generations: Option<usize>,
        /// Cap other variants at this variant's wall time.
        #[arg(long)]
        matched_to: Option<Ablation>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Draws per member for the feasible solution ratio.
        #[arg(long)]
        reference_samples: Option<u64>,
        /// Stage schedule for every algorithm, e.g. `10000:0.999,100000:0.9999,1000000:inf`.
        #[arg(long)]
        schedule: Option<StageSchedule>,
    },
    /// Compare staged and fixed-sample evaluation on random solutions.
    CompareMc {
        #[command(flatten)]
        source: InstanceSource,
        #[arg(long, default_value_t = 200)]
        solutions: usize,
        #[arg(long, default_value_t = 1_000_000)]
        fixed: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        schedule: Option<StageSchedule>,
    },
    /// Recompute HV, IGD and IGD+ from stored fronts.
    Metrics {
        /// Results directory holding `fronts/`.
        dir: PathBuf,
        #[arg(long, default_value_t = ccmckp::metrics::DEFAULT_MARGIN)]
        margin: f64,
        /// Output file; defaults to `<dir>/metrics.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InstanceSource {
    /// Instance document; overrides the generator options.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value = "lab")]
    benchmark: Benchmark,
    #[arg(long, default_value = "ls1")]
    scale: Scale,
    #[arg(long, default_value_t = 1)]
    instance_seed: u64,
}

impl InstanceSource {
    fn load(&self) -> Result<Instance> {
        match &self.instance {
            Some(path) => read_file(path),
            None => Ok(self.benchmark.generate(self.scale, self.instance_seed)),
        }
    }
}

fn read_file(path: &Path) -> Result<Instance> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_instance(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

fn pick<T: Copy>(arg: &str, all: &[T], parse: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>> {
    if arg == "all" {
        return Ok(all.to_vec());
    }
    parse(arg).map(|v| vec![v]).map_err(anyhow::Error::msg)
}

fn gen(benchmark: &str, scale: &str, seed: u64, out: &Path) -> Result<()> {
    let benchmarks = pick(benchmark, &[Benchmark::Lab, Benchmark::App], str::parse)?;
    let scales = pick(scale, &Scale::ALL, str::parse)?;
    std::fs::create_dir_all(out)?;
    for b in benchmarks {
        for &s in &scales {
            let inst = b.generate(s, seed);
            let path = out.join(format!("{}.json", inst.label()));
            write_instance(&inst, BufWriter::new(File::create(&path)?))?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run(
    plan_path: &Path,
    seed: Option<u64>,
    repetitions: Option<usize>,
    generations: Option<usize>,
    matched_to: Option<Ablation>,
    out: Option<PathBuf>,
    reference_samples: Option<u64>,
    schedule: Option<StageSchedule>,
) -> Result<()> {
    let mut plan = ExperimentPlan::load(plan_path)?;
    if let Some(s) = seed {
        plan.seed = s;
    }
    if let Some(r) = repetitions {
        plan.repetitions = r;
    }
    if let Some(g) = generations {
        plan.budget = Budget::Generations(g);
    }
    if let Some(v) = matched_to {
        plan.budget = Budget::WallTimeMatchedTo(v);
    }
    if let Some(dir) = out {
        plan.outputs.dir = dir;
    }
    if let Some(n) = reference_samples {
        plan.reference_samples = n;
    }
    if let Some(s) = schedule {
        for a in &mut plan.algorithms {
            a.config.schedule = s.clone();
        }
    }
    plan.validate()?;
    let base = plan_path.parent().unwrap_or(Path::new("."));
    let bundle = run_plan(&plan, base)?;
    let dir = if plan.outputs.dir.is_absolute() { plan.outputs.dir.clone() } else { base.join(&plan.outputs.dir) };
    write_bundle(&bundle, &dir)?;
    println!("{:<12} {:<16} {:>24} {:>24} {:>24} {:>20}", "instance", "algorithm", "HV", "IGD", "IGD+", "FSR");
    for r in &bundle.summary {
        println!("{:<12} {:<16} {:>24} {:>24} {:>24} {:>20}", r.instance, r.algorithm, r.hv, r.igd, r.igd_plus, r.fsr);
    }
    let failed: usize = bundle.summary.iter().map(|r| r.failed).sum();
    if failed > 0 {
        eprintln!("{failed} cell(s) failed; see results.csv");
    }
    println!("results written to {}", dir.display());
    Ok(())
}

fn compare_mc(
    source: &InstanceSource,
    solutions: usize,
    fixed: u64,
    seed: u64,
    schedule: Option<StageSchedule>,
) -> Result<()> {
    if solutions == 0 || fixed == 0 {
        bail!("--solutions and --fixed must be positive");
    }
    let inst = source.load()?;
    let population = random_initialization(&inst, solutions, &mut stream(seed, &[tag::INIT]));
    let report = compare_evaluators(&inst, &population, &schedule.unwrap_or_default(), fixed, seed);
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn metrics(dir: &Path, margin: f64, out: Option<PathBuf>) -> Result<()> {
    let rows = recompute_metrics(&load_fronts(dir)?, margin)?;
    let path = out.unwrap_or_else(|| dir.join("metrics.csv"));
    write_metric_rows(&path, &rows)?;
    println!("{} rows written to {}", rows.len(), path.display());
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen { benchmark, scale, seed, out } => gen(&benchmark, &scale, seed, &out),
        Command::Run { plan, seed, repetitions, generations, matched_to, out, reference_samples, schedule } => {
            run(&plan, seed, repetitions, generations, matched_to, out, reference_samples, schedule)
        }
        Command::CompareMc { source, solutions, fixed, seed, schedule } => {
            compare_mc(&source, solutions, fixed, seed, schedule)
        }
        Command::Metrics { dir, margin, out } => metrics(&dir, margin, out),
    }
}
