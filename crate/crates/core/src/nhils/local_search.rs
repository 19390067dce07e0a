use rand::seq::{index, SliceRandom};
use rand::Rng;

use super::config::NhilsConfig;
use crate::instance::Instance;
use crate::moea::{evaluate, Evaluation, Individual, Solution};
use crate::opera::StageSchedule;
use crate::sampling::SurrogateTable;

/// Result of a local-search call plus the evaluator work it consumed.
#[derive(Debug, Clone, PartialEq)]
pub struct LsOutcome {
    pub individual: Individual,
    pub evaluations: u64,
    pub samples: u64,
}

/// Single-swap, double-swap and degradation moves over one instance.
///
/// Candidate moves are screened by cost and surrogate feasibility before the
/// staged estimator is called. A move replaces the current individual when
/// its estimate improves one objective without worsening the other.
#[derive(Debug, Clone)]
pub struct LocalSearch<'a> {
    instance: &'a Instance,
    table: SurrogateTable,
    schedule: &'a StageSchedule,
    pair_budget: usize,
}

fn improves(new: &Evaluation, old: &Evaluation) -> bool {
    new.cost <= old.cost && new.p_hat() >= old.p_hat() && (new.cost < old.cost || new.p_hat() > old.p_hat())
}

impl<'a> LocalSearch<'a> {
    pub fn new(instance: &'a Instance, cfg: &'a NhilsConfig) -> Self {
        Self {
            instance,
            table: SurrogateTable::new(instance, &cfg.surrogate),
            schedule: &cfg.schedule,
            pair_budget: cfg.double_swap_budget_for(instance.class_count()),
        }
    }

    fn cost(&self, class: usize, item: usize) -> f64 {
        self.instance.item(class, item).cost
    }

    fn try_genes<R: Rng + ?Sized>(&self, genes: Vec<usize>, out: &mut LsOutcome, rng: &mut R) -> Individual {
        let solution = Solution::new(genes);
        let evaluation = evaluate(self.instance, &solution, self.schedule, rng);
        out.evaluations += 1;
        out.samples += evaluation.cl.samples_used;
        Individual { solution, evaluation }
    }

    /// One pass over the classes in random order, trying every other item of
    /// each class in index order and keeping the first improving swap.
    pub fn single_swap<R: Rng + ?Sized>(&self, start: Individual, rng: &mut R) -> LsOutcome {
        let mut out = LsOutcome { individual: start, evaluations: 0, samples: 0 };
        let mut order: Vec<usize> = (0..self.instance.class_count()).collect();
        order.shuffle(rng);
        for i in order {
            let cur = out.individual.solution.genes()[i];
            for k in 0..self.instance.class(i).len() {
                if k == cur || self.cost(i, k) > self.cost(i, cur) {
                    continue;
                }
                let mut genes = out.individual.solution.genes().to_vec();
                genes[i] = k;
                if !self.table.is_feasible(&genes) {
                    continue;
                }
                let cand = self.try_genes(genes, &mut out, rng);
                if improves(&cand.evaluation, &out.individual.evaluation) {
                    out.individual = cand;
                    break;
                }
            }
        }
        out
    }

    /// Tries coordinated changes in two classes. Up to `min(m(m-1)/2, budget)`
    /// class pairs are drawn without replacement; within a pair every item
    /// combination is tried in index order and the first improvement is kept.
    pub fn double_swap<R: Rng + ?Sized>(&self, start: Individual, rng: &mut R) -> LsOutcome {
        let mut out = LsOutcome { individual: start, evaluations: 0, samples: 0 };
        let m = self.instance.class_count();
        let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| ((a + 1)..m).map(move |b| (a, b))).collect();
        if pairs.is_empty() {
            return out;
        }
        let budget = self.pair_budget.min(pairs.len());
        for p in index::sample(rng, pairs.len(), budget) {
            let (a, b) = pairs[p];
            let (ca, cb) = {
                let g = out.individual.solution.genes();
                (g[a], g[b])
            };
            let base = self.cost(a, ca) + self.cost(b, cb);
            'pair: for ka in (0..self.instance.class(a).len()).filter(|&k| k != ca) {
                for kb in (0..self.instance.class(b).len()).filter(|&k| k != cb) {
                    if self.cost(a, ka) + self.cost(b, kb) > base {
                        continue;
                    }
                    let mut genes = out.individual.solution.genes().to_vec();
                    genes[a] = ka;
                    genes[b] = kb;
                    if !self.table.is_feasible(&genes) {
                        continue;
                    }
                    let cand = self.try_genes(genes, &mut out, rng);
                    if improves(&cand.evaluation, &out.individual.evaluation) {
                        out.individual = cand;
                        break 'pair;
                    }
                }
            }
        }
        out
    }

    /// Moves one random class to a random other item and keeps the move if
    /// it stays surrogate-feasible and meets the confidence requirement,
    /// whatever it does to the cost.
    pub fn degradation<R: Rng + ?Sized>(&self, start: Individual, rng: &mut R) -> LsOutcome {
        let mut out = LsOutcome { individual: start, evaluations: 0, samples: 0 };
        let open: Vec<usize> = (0..self.instance.class_count()).filter(|&i| self.instance.class(i).len() > 1).collect();
        if open.is_empty() {
            return out;
        }
        let i = open[rng.random_range(0..open.len())];
        let cur = out.individual.solution.genes()[i];
        let alt = rng.random_range(0..self.instance.class(i).len() - 1);
        let mut genes = out.individual.solution.genes().to_vec();
        genes[i] = if alt >= cur { alt + 1 } else { alt };
        if !self.table.is_feasible(&genes) {
            return out;
        }
        let cand = self.try_genes(genes, &mut out, rng);
        if cand.evaluation.p_hat() >= self.instance.required_confidence() {
            out.individual = cand;
        }
        out
    }

    /// Single swap, then double swap, then degradation.
    pub fn apply<R: Rng + ?Sized>(&self, start: Individual, rng: &mut R) -> LsOutcome {
        let a = self.single_swap(start, rng);
        let b = self.double_swap(a.individual, rng);
        let c = self.degradation(b.individual, rng);
        LsOutcome {
            individual: c.individual,
            evaluations: a.evaluations + b.evaluations + c.evaluations,
            samples: a.samples + b.samples + c.samples,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn evaluated(inst: &Instance, cfg: &NhilsConfig, genes: Vec<usize>) -> Individual {
        let solution = Solution::new(genes);
        let evaluation = evaluate(inst, &solution, &cfg.schedule, &mut stream(0, &[]));
        Individual { solution, evaluation }
    }

    fn singletons() -> Instance {
        Instance::deterministic("s", &[vec![(1.0, 1.0)], vec![(2.0, 1.0)]], 5.0, 0.9).unwrap()
    }

    #[test]
    fn singleton_classes_are_fixed_points() {
        let inst = singletons();
        let cfg = NhilsConfig::default();
        let ls = LocalSearch::new(&inst, &cfg);
        let start = evaluated(&inst, &cfg, vec![0, 0]);
        let mut rng = stream(1, &[]);
        for out in [
            ls.single_swap(start.clone(), &mut rng),
            ls.double_swap(start.clone(), &mut rng),
            ls.degradation(start.clone(), &mut rng),
            ls.apply(start.clone(), &mut rng),
        ] {
            assert_eq!(out.individual, start);
            assert_eq!(out.evaluations, 0);
        }
    }

    #[test]
    fn cheaper_feasible_swap_is_taken() {
        let inst = Instance::deterministic("t", &[vec![(5.0, 1.0), (3.0, 1.0)]], 2.0, 0.9).unwrap();
        let cfg = NhilsConfig::default();
        let ls = LocalSearch::new(&inst, &cfg);
        let out = ls.single_swap(evaluated(&inst, &cfg, vec![0]), &mut stream(1, &[]));
        assert_eq!(out.individual.solution.genes(), &[1]);
        assert_eq!(out.individual.evaluation.cost, 3.0);
    }

    /// Brute force: repeatedly apply the first improving single swap, scanning
    /// classes in the given order.
    fn swap_chain(inst: &Instance, mut genes: Vec<usize>, order: &[usize]) -> Vec<usize> {
        let exact = |g: &[usize]| {
            let w: f64 = g.iter().enumerate().map(|(i, &j)| inst.item(i, j).oracle.bank()[0]).sum();
            let c: f64 = g.iter().enumerate().map(|(i, &j)| inst.item(i, j).cost).sum();
            (c, if w <= inst.capacity() { 1.0 } else { 0.0 })
        };
        for &i in order {
            let (c0, p0) = exact(&genes);
            for k in 0..inst.class(i).len() {
                let mut g = genes.clone();
                g[i] = k;
                let (c, p) = exact(&g);
                if k != genes[i] && c <= c0 && p >= p0 && (c < c0 || p > p0) {
                    genes = g;
                    break;
                }
            }
        }
        genes
    }

    #[test]
    fn single_swap_matches_enumerated_chain() {
        let inst = Instance::deterministic(
            "t",
            &[vec![(9.0, 1.0), (4.0, 2.0), (1.0, 4.0)], vec![(8.0, 1.0), (5.0, 2.0), (2.0, 3.0)]],
            5.0,
            0.9,
        )
        .unwrap();
        let cfg = NhilsConfig { surrogate: crate::sampling::SurrogateConfig { lambda: 0.0 }, ..Default::default() };
        let ls = LocalSearch::new(&inst, &cfg);
        for seed in 0..20 {
            let mut rng = stream(seed, &[]);
            let mut probe = rng.clone();
            let mut order: Vec<usize> = vec![0, 1];
            order.shuffle(&mut probe);
            let got = ls.single_swap(evaluated(&inst, &cfg, vec![0, 0]), &mut rng);
            assert_eq!(got.individual.solution.genes(), swap_chain(&inst, vec![0, 0], &order));
        }
    }

    #[test]
    fn double_swap_finds_coordinated_exchange() {
        // Each single change either overflows or costs more; swapping both
        // classes together saves 2 at equal weight.
        let inst =
            Instance::deterministic("t", &[vec![(5.0, 1.0), (2.0, 3.0)], vec![(5.0, 3.0), (6.0, 1.0)]], 4.0, 0.9)
                .unwrap();
        let cfg = NhilsConfig::default();
        let ls = LocalSearch::new(&inst, &cfg);
        let start = evaluated(&inst, &cfg, vec![0, 0]);
        assert!(ls.single_swap(start.clone(), &mut stream(1, &[])).individual == start);
        let out = ls.double_swap(start, &mut stream(1, &[]));
        assert_eq!(out.individual.solution.genes(), &[1, 1]);
        assert_eq!(out.individual.evaluation.cost, 8.0);
    }

    #[test]
    fn double_swap_needs_two_classes() {
        let inst = Instance::deterministic("t", &[vec![(5.0, 1.0), (2.0, 1.0)]], 4.0, 0.9).unwrap();
        let cfg = NhilsConfig::default();
        let ls = LocalSearch::new(&inst, &cfg);
        let start = evaluated(&inst, &cfg, vec![0]);
        assert_eq!(ls.double_swap(start.clone(), &mut stream(1, &[])).individual, start);
    }

    #[test]
    fn degradation_rules() {
        let cfg = NhilsConfig::default();
        // the only move overflows the surrogate capacity
        let inst = Instance::deterministic("t", &[vec![(5.0, 1.0), (2.0, 9.0)]], 4.0, 0.9).unwrap();
        let ls = LocalSearch::new(&inst, &cfg);
        let start = evaluated(&inst, &cfg, vec![0]);
        assert_eq!(ls.degradation(start.clone(), &mut stream(1, &[])).individual, start);
        // the only move raises cost but stays feasible
        let inst = Instance::deterministic("t", &[vec![(2.0, 1.0), (5.0, 2.0)]], 4.0, 0.9).unwrap();
        let ls = LocalSearch::new(&inst, &cfg);
        let out = ls.degradation(evaluated(&inst, &cfg, vec![0]), &mut stream(1, &[]));
        assert_eq!(out.individual.solution.genes(), &[1]);
        assert_eq!(out.individual.evaluation.cost, 5.0);
    }

    #[test]
    fn composite_matches_stage_trace() {
        let inst = Instance::deterministic(
            "t",
            &[vec![(5.0, 1.0), (3.0, 2.0), (1.0, 4.0)], vec![(4.0, 1.0), (2.0, 2.0)]],
            4.0,
            0.9,
        )
        .unwrap();
        let cfg = NhilsConfig::default();
        let ls = LocalSearch::new(&inst, &cfg);
        let start = evaluated(&inst, &cfg, vec![0, 0]);
        let mut rng = stream(9, &[]);
        let mut trace = rng.clone();
        let got = ls.apply(start.clone(), &mut rng);
        let a = ls.single_swap(start, &mut trace);
        let b = ls.double_swap(a.individual, &mut trace);
        let c = ls.degradation(b.individual, &mut trace);
        assert_eq!(got.individual, c.individual);
        assert!(
            got.individual
                .solution
                .genes()
                .iter()
                .enumerate()
                .map(|(i, &j)| inst.item(i, j).oracle.bank()[0])
                .sum::<f64>()
                <= 4.0
        );
    }
}
