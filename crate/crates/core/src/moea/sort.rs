use super::solution::{constrained_dominates, Evaluation};

/// Partitions indices into fronts under constrained dominance, O(S^2).
/// Indices within a front are ascending.
pub fn nondominated_sort(population: &[Evaluation]) -> Vec<Vec<usize>> {
    let n = population.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    for p in 0..n {
        for q in (p + 1)..n {
            if constrained_dominates(&population[p], &population[q]) {
                dominated_by[p].push(q);
                counts[q] += 1;
            } else if constrained_dominates(&population[q], &population[p]) {
                dominated_by[q].push(p);
                counts[p] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| counts[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated_by[p] {
                counts[q] -= 1;
                if counts[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance over (cost, -p_hat) within one front.
///
/// Fronts of at most two members are all boundary. Otherwise exact duplicates
/// of an earlier member get 0 and the distance is computed over the distinct
/// points: per objective the extremes get `inf` and interior points add the
/// range-normalized gap between their neighbours.
pub fn crowding_distance(front: &[Evaluation]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let key = |e: &Evaluation| (e.cost, e.neg_cl);
    let unique: Vec<usize> = (0..n).filter(|&i| !(0..i).any(|k| key(&front[k]) == key(&front[i]))).collect();
    let mut dist = vec![0.0; n];
    if unique.len() <= 2 {
        for &i in &unique {
            dist[i] = f64::INFINITY;
        }
        return dist;
    }
    let objectives: [fn(&Evaluation) -> f64; 2] = [|e| e.cost, |e| e.neg_cl];
    for value in objectives {
        let mut order = unique.clone();
        order.sort_by(|&a, &b| value(&front[a]).total_cmp(&value(&front[b])).then(a.cmp(&b)));
        let (first, last) = (order[0], order[order.len() - 1]);
        let range = value(&front[last]) - value(&front[first]);
        dist[first] = f64::INFINITY;
        dist[last] = f64::INFINITY;
        if range > 0.0 {
            for w in order.windows(3) {
                dist[w[1]] += (value(&front[w[2]]) - value(&front[w[0]])) / range;
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moea::solution::tests::ev;

    #[test]
    fn mutually_nondominated_is_one_front() {
        let pop = [ev(1.0, 0.91, 0.9), ev(2.0, 0.95, 0.9), ev(3.0, 0.99, 0.9)];
        assert_eq!(nondominated_sort(&pop), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn chain_gives_singletons() {
        let pop = [ev(3.0, 0.91, 0.9), ev(1.0, 0.99, 0.9), ev(2.0, 0.95, 0.9)];
        assert_eq!(nondominated_sort(&pop), vec![vec![1], vec![2], vec![0]]);
    }

    #[test]
    fn small_fronts_are_all_boundary() {
        assert_eq!(crowding_distance(&[ev(1.0, 0.9, 0.9)]), vec![f64::INFINITY]);
        assert!(crowding_distance(&[ev(1.0, 0.9, 0.9), ev(1.0, 0.9, 0.9)]).iter().all(|d| d.is_infinite()));
    }

    #[test]
    fn collinear_middle_point() {
        let front = [ev(0.0, 0.5, 0.1), ev(1.0, 0.75, 0.1), ev(2.0, 1.0, 0.1)];
        let d = crowding_distance(&front);
        assert!(d[0].is_infinite() && d[2].is_infinite());
        assert_eq!(d[1], 2.0);
    }

    #[test]
    fn duplicates_get_zero() {
        let front = [ev(1.0, 0.9, 0.9), ev(1.0, 0.9, 0.9), ev(1.0, 0.9, 0.9)];
        let d = crowding_distance(&front);
        assert_eq!(d[1..], [0.0, 0.0]);
        let front = [ev(0.0, 0.5, 0.1), ev(1.0, 0.75, 0.1), ev(1.0, 0.75, 0.1), ev(2.0, 1.0, 0.1)];
        let d = crowding_distance(&front);
        assert_eq!((d[1], d[2]), (2.0, 0.0));
    }
}
