use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dominance::{crowding_distance, nondominated_sort, rank_and_crowding, select_survivors};

/// Base MOEA used by the strategies.
///
/// `Generational`: (μ+λ) truncation by rank and crowding.
/// `SteadyState`: offspring are inserted one at a time, each time removing
/// the worst-ranked, most crowded member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    #[default]
    Generational,
    SteadyState,
}

/// Survivor selection over `points` (current population followed by
/// offspring, in insertion order). Returns `mu` sorted indices.
pub fn survive<P: AsRef<[f64]>>(points: &[P], mu: usize, kind: EngineKind) -> Vec<usize> {
    if points.len() <= mu {
        return (0..points.len()).collect();
    }
    match kind {
        EngineKind::Generational => select_survivors(points, mu),
        EngineKind::SteadyState => {
            let mut alive: Vec<usize> = (0..mu).collect();
            for next in mu..points.len() {
                alive.push(next);
                let worst = worst_member(points, &alive);
                alive.remove(worst);
            }
            alive
        }
    }
}

/// Position in `alive` of the member to drop: last front, smallest crowding
/// distance, latest index on ties.
fn worst_member<P: AsRef<[f64]>>(points: &[P], alive: &[usize]) -> usize {
    let sub: Vec<&[f64]> = alive.iter().map(|&i| points[i].as_ref()).collect();
    let fronts = nondominated_sort(&sub);
    let last = fronts.last().expect("nonempty population");
    let members: Vec<&[f64]> = last.iter().map(|&i| sub[i]).collect();
    let crowd = crowding_distance(&members);
    let mut worst = 0;
    for k in 1..last.len() {
        if crowd[k] <= crowd[worst] {
            worst = k;
        }
    }
    last[worst]
}

/// Binary tournament on (rank, crowding): lower rank wins, then larger
/// crowding, then a coin flip.
pub fn binary_tournament<R: Rng + ?Sized>(rank: &[usize], crowd: &[f64], rng: &mut R) -> usize {
    let n = rank.len();
    let a = rng.random_range(0..n);
    let b = rng.random_range(0..n);
    if rank[a] != rank[b] {
        return if rank[a] < rank[b] { a } else { b };
    }
    if crowd[a] != crowd[b] {
        return if crowd[a] > crowd[b] { a } else { b };
    }
    if rng.random::<bool>() {
        a
    } else {
        b
    }
}

/// Draws `count` tournament winners over the given objective vectors.
pub fn tournament_parents<P: AsRef<[f64]>, R: Rng + ?Sized>(
    points: &[P],
    count: usize,
    rng: &mut R,
) -> Vec<usize> {
    let (rank, crowd) = rank_and_crowding(points);
    (0..count)
        .map(|_| binary_tournament(&rank, &crowd, rng))
        .collect()
}

pub fn uniform_selection<R: Rng + ?Sized>(n: usize, rng: &mut R) -> usize {
    rng.random_range(0..n)
}

/// Binary tournament on a single minimized value; ties go to a coin flip.
pub fn scalar_tournament<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> usize {
    let n = values.len();
    let a = rng.random_range(0..n);
    let b = rng.random_range(0..n);
    if values[a] < values[b] {
        a
    } else if values[b] < values[a] {
        b
    } else if rng.random::<bool>() {
        a
    } else {
        b
    }
}

/// Indices of the `mu` smallest values (ties by index), sorted.
pub fn scalar_survivors(values: &[f64], mu: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order.truncate(mu);
    order.sort_unstable();
    order
}
