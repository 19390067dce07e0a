use rand::seq::index;
use rand::Rng;

use super::config::NhilsConfig;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::moea::Solution;
use crate::sampling::{SurrogateConfig, SurrogateTable};

/// Per class, the item maximizing `(max_k c_ik - c_ij) / w~_ij`; ties go to
/// the lower surrogate weight, then the lower index.
pub fn greedy_seed(instance: &Instance, cfg: &SurrogateConfig) -> Solution {
    greedy_with(instance, &SurrogateTable::new(instance, cfg))
}

pub(crate) fn greedy_with(instance: &Instance, table: &SurrogateTable) -> Solution {
    let genes = instance
        .classes()
        .iter()
        .enumerate()
        .map(|(i, class)| {
            let top = class.items.iter().map(|it| it.cost).fold(f64::NEG_INFINITY, f64::max);
            let ratio = |j: usize| {
                let gain = top - class.items[j].cost;
                let w = table.get(i, j);
                match (gain > 0.0, w > 0.0) {
                    (_, true) => gain / w,
                    (true, false) => f64::INFINITY,
                    (false, false) => 0.0,
                }
            };
            (0..class.len())
                .reduce(|best, j| {
                    let better =
                        ratio(j).total_cmp(&ratio(best)).then(table.get(i, best).total_cmp(&table.get(i, j))).is_gt();
                    if better {
                        j
                    } else {
                        best
                    }
                })
                .expect("classes are non-empty")
        })
        .collect();
    Solution::new(genes)
}

/// Swaps items for lighter alternatives until the surrogate total fits the
/// capacity. Each step takes the swap with the largest surrogate-weight
/// reduction per unit of cost increase (swaps that do not raise the cost
/// rank first), ties going to the larger reduction and then the cheaper item.
pub fn repair_to_surrogate_feasible(instance: &Instance, s: &Solution, cfg: &SurrogateConfig) -> Result<Solution> {
    repair_with(instance, s, &SurrogateTable::new(instance, cfg))
}

pub(crate) fn repair_with(instance: &Instance, s: &Solution, table: &SurrogateTable) -> Result<Solution> {
    let mut genes = s.genes().to_vec();
    if table.is_feasible(&genes) {
        return Ok(Solution::new(genes));
    }
    let min_total = table.min_total();
    if min_total > table.capacity() {
        return Err(Error::Irreparable { min_total, capacity: table.capacity() });
    }
    while !table.is_feasible(&genes) {
        let mut best: Option<(f64, f64, f64, usize, usize)> = None;
        for (i, &cur) in genes.iter().enumerate() {
            let w_cur = table.get(i, cur);
            let c_cur = instance.item(i, cur).cost;
            for (k, &w) in table.class(i).iter().enumerate() {
                if w >= w_cur {
                    continue;
                }
                let reduction = w_cur - w;
                let dc = instance.item(i, k).cost - c_cur;
                let score = if dc <= 0.0 { f64::INFINITY } else { reduction / dc };
                let wins = match best {
                    None => true,
                    Some((bs, br, bc, _, _)) => {
                        score > bs || (score == bs && (reduction > br || (reduction == br && dc < bc)))
                    }
                };
                if wins {
                    best = Some((score, reduction, dc, i, k));
                }
            }
        }
        let (_, _, _, i, k) = best.expect("a lighter alternative exists while above the minimum total");
        genes[i] = k;
    }
    Ok(Solution::new(genes))
}

/// Repaired greedy seed followed by surrogate-feasible perturbations of it.
///
/// A perturbation resamples a random subset of `1..=ceil(m/2)` classes to
/// other items. After `max_perturbation_attempts` tries the remainder is
/// filled with copies of the seed moved one gene toward a lighter item.
pub fn hybrid_initialization<R: Rng + ?Sized>(
    instance: &Instance,
    cfg: &NhilsConfig,
    rng: &mut R,
) -> Result<Vec<Solution>> {
    let table = SurrogateTable::new(instance, &cfg.surrogate);
    let seed = repair_with(instance, &greedy_with(instance, &table), &table)?;
    let size = cfg.population_size;
    let m = instance.class_count();
    let sizes = instance.class_sizes();
    let mut population = Vec::with_capacity(size);
    population.push(seed.clone());

    let max_subset = m.div_ceil(2);
    let mut attempts = 0;
    while population.len() < size && attempts < cfg.perturbation_attempts() {
        attempts += 1;
        let k = rng.random_range(1..=max_subset);
        let mut genes = seed.genes().to_vec();
        for i in index::sample(rng, m, k) {
            if sizes[i] > 1 {
                let alt = rng.random_range(0..sizes[i] - 1);
                genes[i] = if alt >= genes[i] { alt + 1 } else { alt };
            }
        }
        if table.is_feasible(&genes) {
            population.push(Solution::new(genes));
        }
    }

    while population.len() < size {
        let mut genes = seed.genes().to_vec();
        let movable: Vec<usize> =
            (0..m).filter(|&i| table.class(i).iter().any(|&w| w < table.get(i, genes[i]))).collect();
        if !movable.is_empty() {
            let i = movable[rng.random_range(0..movable.len())];
            let w_cur = table.get(i, genes[i]);
            let lighter: Vec<usize> = (0..sizes[i]).filter(|&k| table.get(i, k) < w_cur).collect();
            genes[i] = lighter[rng.random_range(0..lighter.len())];
        }
        population.push(Solution::new(genes));
    }
    Ok(population)
}

/// Uniformly random genes.
pub fn random_initialization<R: Rng + ?Sized>(instance: &Instance, size: usize, rng: &mut R) -> Vec<Solution> {
    let sizes = instance.class_sizes();
    (0..size).map(|_| Solution::new(sizes.iter().map(|&n| rng.random_range(0..n)).collect())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Benchmark, Scale};
    use crate::rng::stream;

    fn toy() -> Instance {
        // (cost, weight)
        Instance::deterministic(
            "toy",
            &[
                vec![(10.0, 1.0), (6.0, 2.0), (2.0, 5.0)],
                vec![(9.0, 1.0), (8.0, 4.0), (1.0, 4.0)],
                vec![(5.0, 3.0), (5.0, 2.0), (0.0, 2.0)],
            ],
            8.0,
            0.9,
        )
        .unwrap()
    }

    #[test]
    fn greedy_matches_enumerated_ratios() {
        let inst = toy();
        // class 0: ratios 0, 4/2, 8/5 -> item 1
        // class 1: 0, 1/4, 8/4 -> item 2
        // class 2: 0, 0, 5/2 -> item 2
        assert_eq!(greedy_seed(&inst, &SurrogateConfig::default()).genes(), &[1, 2, 2]);
    }

    #[test]
    fn greedy_ties_prefer_lighter_item() {
        let inst = Instance::deterministic("t", &[vec![(4.0, 2.0), (2.0, 2.0), (0.0, 4.0)]], 10.0, 0.9).unwrap();
        // ratios 0, 1, 1 -> tie on ratio, item 1 is lighter
        assert_eq!(greedy_seed(&inst, &SurrogateConfig::default()).genes(), &[1]);
    }

    #[test]
    fn repair_reaches_feasibility() {
        let inst = toy();
        let cfg = SurrogateConfig::default();
        let s = Solution::new(vec![2, 1, 0]);
        let fixed = repair_to_surrogate_feasible(&inst, &s, &cfg).unwrap();
        let table = SurrogateTable::new(&inst, &cfg);
        assert!(table.is_feasible(fixed.genes()));
        // weight 12 -> 8 needs two steps. Ranked swaps: class 2 item 0 -> 2 (cost down), then
        // class 1 item 1 -> 0 (reduction 3 for +1 cost), reaching weight 8.
        assert_eq!(fixed.genes(), &[2, 0, 2]);
    }

    #[test]
    fn repair_keeps_feasible_input() {
        let inst = toy();
        let s = Solution::new(vec![0, 0, 1]);
        assert_eq!(repair_to_surrogate_feasible(&inst, &s, &SurrogateConfig::default()).unwrap(), s);
    }

    #[test]
    fn repair_reports_irreparable() {
        let inst = Instance::deterministic("t", &[vec![(1.0, 3.0)], vec![(1.0, 3.0), (0.0, 4.0)]], 5.0, 0.9).unwrap();
        let err = repair_to_surrogate_feasible(&inst, &Solution::new(vec![0, 1]), &SurrogateConfig::default());
        assert!(matches!(err, Err(Error::Irreparable { .. })));
    }

    #[test]
    fn single_member_population_is_the_seed() {
        let inst = toy();
        let cfg = NhilsConfig { population_size: 1, ..Default::default() };
        let pop = hybrid_initialization(&inst, &cfg, &mut stream(1, &[])).unwrap();
        let seed = repair_to_surrogate_feasible(&inst, &greedy_seed(&inst, &cfg.surrogate), &cfg.surrogate).unwrap();
        assert_eq!(pop, vec![seed]);
    }

    #[test]
    fn unique_feasible_selection_fills_population() {
        let inst =
            Instance::deterministic("t", &[vec![(1.0, 3.0), (0.0, 5.0)], vec![(1.0, 2.0), (0.0, 4.0)]], 5.0, 0.9)
                .unwrap();
        let cfg = NhilsConfig { population_size: 10, max_perturbation_attempts: Some(50), ..Default::default() };
        let pop = hybrid_initialization(&inst, &cfg, &mut stream(1, &[])).unwrap();
        assert_eq!(pop.len(), 10);
        assert!(pop.iter().all(|s| s.genes() == [0, 0]));
    }

    #[test]
    fn ls1_population_is_surrogate_feasible() {
        let inst = Benchmark::Lab.generate(Scale::Ls1, 1);
        let cfg = NhilsConfig::default();
        let pop = hybrid_initialization(&inst, &cfg, &mut stream(2, &[])).unwrap();
        let table = SurrogateTable::new(&inst, &cfg.surrogate);
        assert_eq!(pop.len(), 100);
        assert!(pop.iter().all(|s| s.is_valid_for(&inst) && table.is_feasible(s.genes())));
    }
}
