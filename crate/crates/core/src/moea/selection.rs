use rand::Rng;

use super::solution::Evaluation;
use super::sort::{crowding_distance, nondominated_sort};
use crate::error::{Error, Result};

/// Rank (0 = first front) and crowding distance of every member.
pub fn rank_and_crowding(population: &[Evaluation]) -> (Vec<usize>, Vec<f64>) {
    let mut rank = vec![0; population.len()];
    let mut crowding = vec![0.0; population.len()];
    for (r, front) in nondominated_sort(population).into_iter().enumerate() {
        let members: Vec<Evaluation> = front.iter().map(|&i| population[i]).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&members)) {
            rank[i] = r;
            crowding[i] = d;
        }
    }
    (rank, crowding)
}

/// Indices of the `target_size` survivors, in admission order.
///
/// Whole fronts are admitted in rank order; the front that overflows is cut
/// by descending crowding distance, then lower cost, then input order.
pub fn environmental_selection(merged: &[Evaluation], target_size: usize) -> Result<Vec<usize>> {
    if target_size > merged.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot select {target_size} survivors from {} candidates",
            merged.len()
        )));
    }
    let mut survivors = Vec::with_capacity(target_size);
    for front in nondominated_sort(merged) {
        let room = target_size - survivors.len();
        if room == 0 {
            break;
        }
        if front.len() <= room {
            survivors.extend(front);
            continue;
        }
        let members: Vec<Evaluation> = front.iter().map(|&i| merged[i]).collect();
        let dist = crowding_distance(&members);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| {
            dist[b].total_cmp(&dist[a]).then(members[a].cost.total_cmp(&members[b].cost)).then(front[a].cmp(&front[b]))
        });
        survivors.extend(order.into_iter().take(room).map(|k| front[k]));
        break;
    }
    Ok(survivors)
}

/// Binary tournament on (lower rank, larger crowding distance).
pub fn binary_tournament<R: Rng + ?Sized>(rank: &[usize], crowding: &[f64], rng: &mut R) -> usize {
    let n = rank.len();
    let a = rng.random_range(0..n);
    let b = rng.random_range(0..n);
    match rank[a].cmp(&rank[b]) {
        std::cmp::Ordering::Less => a,
        std::cmp::Ordering::Greater => b,
        std::cmp::Ordering::Equal if crowding[b] > crowding[a] => b,
        std::cmp::Ordering::Equal => a,
    }
}
