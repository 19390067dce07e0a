use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::time::{Duration, Instant};

use super::config::{Ablation, NhilsConfig};
use super::init::{hybrid_initialization, random_initialization};
use super::local_search::{LocalSearch, LsOutcome};
use crate::error::Result;
use crate::instance::Instance;
use crate::moea::{
    binary_tournament, crossover, environmental_selection, evaluate, mutate, nondominated_sort, rank_and_crowding,
    Evaluation, Individual, Solution,
};
use crate::opera::StageSchedule;
use crate::rng::{stream, tag};

/// A point of an objective-space front as `(cost, confidence level)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontPoint {
    pub cost: f64,
    pub cl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    /// 0 for the initial population.
    pub generation: usize,
    pub evaluations: u64,
    pub samples: u64,
    pub local_search_calls: usize,
    pub feasible: usize,
    /// Distinct feasible non-dominated points of the population, by cost.
    pub front: Vec<FrontPoint>,
}

/// Outcome of one solver run. Equality and serialization ignore wall time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResult {
    pub instance: String,
    pub ablation: Ablation,
    pub run_seed: u64,
    pub population: Vec<Individual>,
    pub generations: Vec<GenerationStats>,
    pub total_evaluations: u64,
    pub total_samples: u64,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl PartialEq for RunResult {
    fn eq(&self, other: &Self) -> bool {
        self.instance == other.instance
            && self.ablation == other.ablation
            && self.run_seed == other.run_seed
            && self.population == other.population
            && self.generations == other.generations
            && self.total_evaluations == other.total_evaluations
            && self.total_samples == other.total_samples
    }
}

impl RunResult {
    /// Generations completed after initialization.
    pub fn generations_run(&self) -> usize {
        self.generations.len().saturating_sub(1)
    }

    /// Feasible non-dominated points of the final population.
    pub fn front(&self) -> Vec<FrontPoint> {
        self.generations.last().map(|g| g.front.clone()).unwrap_or_default()
    }
}

fn feasible_front(population: &[Individual]) -> Vec<FrontPoint> {
    let evals: Vec<Evaluation> = population.iter().map(|i| i.evaluation).collect();
    let Some(first) = nondominated_sort(&evals).into_iter().next() else {
        return Vec::new();
    };
    let mut pts: Vec<FrontPoint> = first
        .into_iter()
        .filter(|&i| evals[i].feasible)
        .map(|i| FrontPoint { cost: evals[i].cost, cl: evals[i].p_hat() })
        .collect();
    pts.sort_by(|a, b| a.cost.total_cmp(&b.cost).then(a.cl.total_cmp(&b.cl)));
    pts.dedup();
    pts
}

fn evaluate_all(
    instance: &Instance,
    solutions: Vec<Solution>,
    schedule: &StageSchedule,
    seed: u64,
    generation: usize,
) -> Vec<Individual> {
    solutions
        .into_par_iter()
        .enumerate()
        .map(|(idx, solution)| {
            let mut rng = stream(seed, &[tag::EVALUATION, generation as u64, idx as u64]);
            let evaluation = evaluate(instance, &solution, schedule, &mut rng);
            Individual { solution, evaluation }
        })
        .collect()
}

/// Tournament, crossover and mutation until `S` offspring exist. Offspring
/// that duplicate a parent or an earlier child are redrawn, up to a bounded
/// number of tries after which duplicates are admitted.
fn make_offspring<R: Rng + ?Sized>(
    population: &[Individual],
    sizes: &[usize],
    cfg: &NhilsConfig,
    rng: &mut R,
) -> Vec<Solution> {
    let target = cfg.population_size;
    let evals: Vec<Evaluation> = population.iter().map(|i| i.evaluation).collect();
    let (rank, crowding) = rank_and_crowding(&evals);
    let mut seen: HashSet<Solution> = population.iter().map(|i| i.solution.clone()).collect();
    let mut offspring = Vec::with_capacity(target);
    let patience = 100 * target;
    let mut tries = 0;
    while offspring.len() < target {
        let a = binary_tournament(&rank, &crowding, rng);
        let b = binary_tournament(&rank, &crowding, rng);
        let (c1, c2) = crossover(&population[a].solution, &population[b].solution, sizes, &cfg.variation, rng);
        for child in [c1, c2] {
            let child = mutate(&child, sizes, &cfg.variation, rng);
            if offspring.len() < target && (seen.insert(child.clone()) || tries >= patience) {
                offspring.push(child);
            }
        }
        tries += 1;
    }
    offspring
}

fn stats(generation: usize, population: &[Individual], evaluations: u64, samples: u64, ls: usize) -> GenerationStats {
    GenerationStats {
        generation,
        evaluations,
        samples,
        local_search_calls: ls,
        feasible: population.iter().filter(|i| i.evaluation.feasible).count(),
        front: feasible_front(population),
    }
}

/// Runs the solver for `max_generations` generations.
pub fn run(instance: &Instance, cfg: &NhilsConfig) -> Result<RunResult> {
    run_with_stop(instance, cfg, |_, _| false)
}

/// Like [`run`], but `stop` is consulted after every generation with that
/// generation's statistics and the elapsed time; returning `true` ends the run.
pub fn run_with_stop(
    instance: &Instance,
    cfg: &NhilsConfig,
    mut stop: impl FnMut(&GenerationStats, Duration) -> bool,
) -> Result<RunResult> {
    let started = Instant::now();
    cfg.validate()?;
    let seed = cfg.run_seed;
    let sizes = instance.class_sizes();

    let mut init_rng = stream(seed, &[tag::INIT]);
    let initial = if cfg.ablation.hybrid_init() {
        hybrid_initialization(instance, cfg, &mut init_rng)?
    } else {
        random_initialization(instance, cfg.population_size, &mut init_rng)
    };
    let mut population = evaluate_all(instance, initial, &cfg.schedule, seed, 0);
    let samples0 = population.iter().map(|i| i.evaluation.cl.samples_used).sum();
    let mut generations = vec![stats(0, &population, population.len() as u64, samples0, 0)];

    let ls = LocalSearch::new(instance, cfg);
    for t in 1..=cfg.max_generations {
        let mut var_rng = stream(seed, &[tag::VARIATION, t as u64]);
        let offspring = make_offspring(&population, &sizes, cfg, &mut var_rng);
        let merged: Vec<Solution> = population.iter().map(|i| i.solution.clone()).chain(offspring).collect();
        let mut pool = evaluate_all(instance, merged, &cfg.schedule, seed, t);
        let mut evaluations = pool.len() as u64;
        let mut samples: u64 = pool.iter().map(|i| i.evaluation.cl.samples_used).sum();

        let mut ls_calls = 0;
        if cfg.ablation.local_search() {
            let mut gate = stream(seed, &[tag::LS_GATE, t as u64]);
            let chosen: Vec<usize> = (0..pool.len()).filter(|_| gate.random::<f64>() < cfg.local_search_prob).collect();
            let outcomes: Vec<LsOutcome> = chosen
                .par_iter()
                .map(|&idx| {
                    let mut rng = stream(seed, &[tag::LOCAL_SEARCH, t as u64, idx as u64]);
                    ls.apply(pool[idx].clone(), &mut rng)
                })
                .collect();
            ls_calls = outcomes.len();
            for out in outcomes {
                evaluations += out.evaluations;
                samples += out.samples;
                pool.push(out.individual);
            }
        }

        let evals: Vec<Evaluation> = pool.iter().map(|i| i.evaluation).collect();
        let keep = environmental_selection(&evals, cfg.population_size)?;
        population = keep.into_iter().map(|i| pool[i].clone()).collect();
        generations.push(stats(t, &population, evaluations, samples, ls_calls));
        if stop(generations.last().expect("just pushed"), started.elapsed()) {
            break;
        }
    }

    Ok(RunResult {
        instance: instance.label().to_string(),
        ablation: cfg.ablation,
        run_seed: seed,
        total_evaluations: generations.iter().map(|g| g.evaluations).sum(),
        total_samples: generations.iter().map(|g| g.samples).sum(),
        population,
        generations,
        wall_time: started.elapsed(),
    })
}
