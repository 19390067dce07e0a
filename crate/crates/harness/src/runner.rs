use anyhow::Result;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::Duration;

use ccmckp::instance::Instance;
use ccmckp::metrics::{build_reference, fsr, hypervolume, igd, igd_plus, ObjectivePoint, ReferenceData};
use ccmckp::moea::Solution;
use ccmckp::nhils::{run_with_stop, FrontPoint, NhilsConfig, RunResult};
use ccmckp::rng::{derive_seed, tag};

use crate::plan::{Budget, ExperimentPlan};

/// Generation ceiling for runs capped by wall time.
const MATCHED_GENERATION_CEILING: usize = 1_000_000;

/// One (instance, algorithm, repetition) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub instance: String,
    pub algorithm: String,
    pub repetition: usize,
    pub seed: u64,
    pub status: String,
    pub hv: Option<f64>,
    pub igd: Option<f64>,
    pub igd_plus: Option<f64>,
    pub fsr: Option<f64>,
    pub generations: Option<usize>,
    pub evaluations: Option<u64>,
    pub samples: Option<u64>,
    pub front_size: Option<usize>,
    pub error: String,
}

/// Mean and sample standard deviation of a cell group, or `-` when no run
/// produced a feasible front.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub instance: String,
    pub algorithm: String,
    pub runs: usize,
    pub failed: usize,
    pub hv: String,
    pub igd: String,
    pub igd_plus: String,
    pub fsr: String,
    pub generations: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFront {
    pub instance: String,
    pub algorithm: String,
    pub repetition: usize,
    pub points: Vec<FrontPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceReference {
    pub instance: String,
    pub reference: Option<ReferenceData>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub instance: String,
    pub algorithm: String,
    pub repetition: usize,
    pub wall_time_s: f64,
    /// Duration of the final generation, the most a time cap can overshoot.
    pub last_generation_s: f64,
}

/// Everything a plan produces. Wall times are kept apart from the other
/// tables, which are reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsBundle {
    pub plan: ExperimentPlan,
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
    pub fronts: Vec<RunFront>,
    pub references: Vec<InstanceReference>,
    pub timings: Vec<TimingRow>,
}

struct Completed {
    run: RunResult,
    last_generation: Duration,
    fsr: f64,
}

/// Mean and sample standard deviation.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn fmt_stat(xs: &[f64]) -> String {
    if xs.is_empty() {
        return "-".into();
    }
    if xs.iter().any(|x| x.is_infinite()) {
        return "inf".into();
    }
    let (m, s) = mean_sd(xs);
    format!("{m:.4} ± {s:.4}")
}

fn cell_config(plan: &ExperimentPlan, alg: usize, seed: u64, matched: bool) -> NhilsConfig {
    let spec = &plan.algorithms[alg];
    let mut cfg = spec.config.clone();
    cfg.ablation = spec.variant;
    cfg.run_seed = seed;
    match plan.budget {
        Budget::Generations(n) => cfg.max_generations = n,
        Budget::WallTimeMatchedTo(_) if matched => cfg.max_generations = MATCHED_GENERATION_CEILING,
        Budget::WallTimeMatchedTo(_) => {}
    }
    cfg
}

fn run_cell(
    instance: &Instance,
    cfg: &NhilsConfig,
    cap: Option<Duration>,
    reference_samples: u64,
) -> Result<Completed> {
    let (mut previous, mut last_generation) = (Duration::ZERO, Duration::ZERO);
    let run = run_with_stop(instance, cfg, |_, elapsed| {
        last_generation = elapsed.saturating_sub(previous);
        previous = elapsed;
        cap.is_some_and(|c| elapsed >= c)
    })?;
    let members: Vec<Solution> = run.population.iter().map(|i| i.solution.clone()).collect();
    let fsr = fsr(instance, &members, reference_samples, derive_seed(cfg.run_seed, &[tag::REFERENCE]))?;
    Ok(Completed { run, last_generation, fsr })
}

/// Runs every cell of `plan`. Instance files resolve against `base`. A cell
/// that fails is recorded with its error and the plan continues.
pub fn run_plan(plan: &ExperimentPlan, base: &Path) -> Result<ResultsBundle> {
    plan.validate()?;
    let mut bundle = ResultsBundle {
        plan: plan.clone(),
        rows: Vec::new(),
        summary: Vec::new(),
        fronts: Vec::new(),
        references: Vec::new(),
        timings: Vec::new(),
    };
    let n_alg = plan.algorithms.len();
    let reps = plan.repetitions;

    for (ii, iref) in plan.instances.iter().enumerate() {
        let loaded = iref.load(base);
        let label = match &loaded {
            Ok(inst) => inst.label().to_string(),
            Err(_) => format!("instance-{ii}"),
        };
        // outcomes[alg][rep]
        let mut outcomes: Vec<Vec<Result<Completed, String>>> = (0..n_alg).map(|_| Vec::new()).collect();
        match &loaded {
            Err(e) => {
                for slot in outcomes.iter_mut() {
                    slot.extend((0..reps).map(|_| Err(format!("{e:#}"))));
                }
            }
            Ok(inst) => {
                let anchor = match plan.budget {
                    Budget::WallTimeMatchedTo(v) => plan.algorithms.iter().position(|a| a.variant == v),
                    Budget::Generations(_) => None,
                };
                let mut order: Vec<usize> = (0..n_alg).collect();
                if let Some(a) = anchor {
                    order.retain(|&k| k != a);
                    order.insert(0, a);
                }
                let mut caps: Vec<Option<Duration>> = vec![None; reps];
                for &alg in &order {
                    let matched = anchor.is_some_and(|a| a != alg);
                    for (rep, cap) in caps.iter_mut().enumerate() {
                        let cfg = cell_config(plan, alg, plan.cell_seed(ii, alg, rep), matched);
                        let limit = if matched { Some(cap.unwrap_or(Duration::ZERO)) } else { None };
                        let out = run_cell(inst, &cfg, limit, plan.reference_samples).map_err(|e| format!("{e:#}"));
                        if Some(alg) == anchor {
                            *cap = out.as_ref().ok().map(|c| c.run.wall_time);
                        }
                        outcomes[alg].push(out);
                    }
                }
            }
        }

        let fronts: Vec<Vec<ObjectivePoint>> = outcomes
            .iter()
            .flatten()
            .filter_map(|o| o.as_ref().ok())
            .map(|c| c.run.front().into_iter().map(ObjectivePoint::from).collect())
            .collect();
        let reference = if fronts.iter().any(|f: &Vec<ObjectivePoint>| !f.is_empty()) {
            Some(build_reference(&fronts, plan.margin)?)
        } else {
            None
        };

        for (alg, runs) in outcomes.iter().enumerate() {
            let name = plan.algorithms[alg].variant.name().to_string();
            let mut hv = Vec::new();
            let mut ig = Vec::new();
            let mut igp = Vec::new();
            let mut fs = Vec::new();
            let mut gens = Vec::new();
            let mut failed = 0;
            for (rep, out) in runs.iter().enumerate() {
                let seed = plan.cell_seed(ii, alg, rep);
                let mut row = ResultRow {
                    instance: label.clone(),
                    algorithm: name.clone(),
                    repetition: rep,
                    seed,
                    status: "ok".into(),
                    hv: None,
                    igd: None,
                    igd_plus: None,
                    fsr: None,
                    generations: None,
                    evaluations: None,
                    samples: None,
                    front_size: None,
                    error: String::new(),
                };
                match out {
                    Err(e) => {
                        failed += 1;
                        row.status = "failed".into();
                        row.error = e.clone();
                    }
                    Ok(c) => {
                        let front = c.run.front();
                        let pts: Vec<ObjectivePoint> = front.iter().copied().map(ObjectivePoint::from).collect();
                        if let Some(r) = &reference {
                            let h = hypervolume(&pts, r.ref_point);
                            let d = igd(&pts, &r.ref_set)?;
                            let dp = igd_plus(&pts, &r.ref_set)?;
                            row.hv = Some(h);
                            row.igd = Some(d);
                            row.igd_plus = Some(dp);
                            if !pts.is_empty() {
                                hv.push(h);
                                ig.push(d);
                                igp.push(dp);
                            }
                        }
                        row.fsr = Some(c.fsr);
                        row.generations = Some(c.run.generations_run());
                        row.evaluations = Some(c.run.total_evaluations);
                        row.samples = Some(c.run.total_samples);
                        row.front_size = Some(front.len());
                        fs.push(c.fsr);
                        gens.push(c.run.generations_run() as f64);
                        bundle.fronts.push(RunFront {
                            instance: label.clone(),
                            algorithm: name.clone(),
                            repetition: rep,
                            points: front,
                        });
                        bundle.timings.push(TimingRow {
                            instance: label.clone(),
                            algorithm: name.clone(),
                            repetition: rep,
                            wall_time_s: c.run.wall_time.as_secs_f64(),
                            last_generation_s: c.last_generation.as_secs_f64(),
                        });
                    }
                }
                bundle.rows.push(row);
            }
            bundle.summary.push(SummaryRow {
                instance: label.clone(),
                algorithm: name,
                runs: runs.len(),
                failed,
                hv: fmt_stat(&hv),
                igd: fmt_stat(&ig),
                igd_plus: fmt_stat(&igp),
                fsr: fmt_stat(&fs),
                generations: fmt_stat(&gens),
            });
        }
        bundle.references.push(InstanceReference { instance: label, reference });
    }
    Ok(bundle)
}
