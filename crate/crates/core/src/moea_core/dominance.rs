use std::cmp::Ordering;

use super::{CoreError, Individual};

/// Pareto dominance for minimization: `a <= b` componentwise and `a < b` somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool, CoreError> {
    if a.len() != b.len() {
        return Err(CoreError::LengthMismatch(a.len(), b.len()));
    }
    Ok(dominates_unchecked(a, b))
}

pub(crate) fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Partitions points into nondominated fronts. Indices within a front are
/// ascending. Uses an `O(n log n)` sweep for two objectives.
pub fn nondominated_sort<P: AsRef<[f64]>>(points: &[P]) -> Vec<Vec<usize>> {
    if points.is_empty() {
        return Vec::new();
    }
    if points.iter().all(|p| p.as_ref().len() == 2) {
        sort_2d(points)
    } else {
        nondominated_sort_naive(points)
    }
}

/// Fast nondominated sorting by pairwise domination counts, `O(m n^2)`.
pub fn nondominated_sort_naive<P: AsRef<[f64]>>(points: &[P]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominating: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (points[i].as_ref(), points[j].as_ref());
            if dominates_unchecked(a, b) {
                dominating[i].push(j);
                dominated_by[j] += 1;
            } else if dominates_unchecked(b, a) {
                dominating[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominating[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

fn sort_2d<P: AsRef<[f64]>>(points: &[P]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (points[i].as_ref(), points[j].as_ref());
        a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])).then(i.cmp(&j))
    });
    // Last point added to each front; its second objective is the front's minimum.
    let mut tails: Vec<[f64; 2]> = Vec::new();
    let mut fronts: Vec<Vec<usize>> = Vec::new();
    for i in order {
        let p = points[i].as_ref();
        let r = tails.partition_point(|t| t[1] < p[1] || (t[1] == p[1] && t[0] < p[0]));
        if r == fronts.len() {
            fronts.push(vec![i]);
            tails.push([p[0], p[1]]);
        } else {
            fronts[r].push(i);
            tails[r] = [p[0], p[1]];
        }
    }
    for f in &mut fronts {
        f.sort_unstable();
    }
    fronts
}

/// Indices of the nondominated points (first front).
pub fn nondominated_filter<P: AsRef<[f64]>>(points: &[P]) -> Vec<usize> {
    nondominated_sort(points).into_iter().next().unwrap_or_default()
}

/// Fronts of individual ids. Fails on any Pending slot, or on Pseudo slots
/// unless `allow_pseudo`.
pub fn sort_population(
    population: &[Individual],
    allow_pseudo: bool,
) -> Result<Vec<Vec<u64>>, CoreError> {
    let points = population
        .iter()
        .map(|ind| ind.objectives(allow_pseudo))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(nondominated_sort(&points)
        .into_iter()
        .map(|f| f.into_iter().map(|i| population[i].id).collect())
        .collect())
}

/// Crowding distance of each point within the given set. Extremes get infinity.
pub fn crowding_distance<P: AsRef<[f64]>>(points: &[P]) -> Vec<f64> {
    let n = points.len();
    let mut dist = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let m = points[0].as_ref().len();
    let mut order: Vec<usize> = (0..n).collect();
    for obj in 0..m {
        order.sort_by(|&i, &j| {
            points[i].as_ref()[obj]
                .total_cmp(&points[j].as_ref()[obj])
                .then(i.cmp(&j))
        });
        let lo = points[order[0]].as_ref()[obj];
        let hi = points[order[n - 1]].as_ref()[obj];
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in 1..n - 1 {
            let gap = points[order[w + 1]].as_ref()[obj] - points[order[w - 1]].as_ref()[obj];
            dist[order[w]] += gap / range;
        }
    }
    dist
}

/// Nondominated rank and within-front crowding distance of every point.
pub fn rank_and_crowding<P: AsRef<[f64]>>(points: &[P]) -> (Vec<usize>, Vec<f64>) {
    let mut rank = vec![0; points.len()];
    let mut crowd = vec![0.0; points.len()];
    for (r, front) in nondominated_sort(points).iter().enumerate() {
        let members: Vec<&[f64]> = front.iter().map(|&i| points[i].as_ref()).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&members)) {
            rank[i] = r;
            crowd[i] = d;
        }
    }
    (rank, crowd)
}

/// Elitist truncation to `mu` points: whole fronts first, then the last
/// front by descending crowding distance (ties by index). Returns sorted indices.
pub fn select_survivors<P: AsRef<[f64]>>(points: &[P], mu: usize) -> Vec<usize> {
    let mut chosen = Vec::with_capacity(mu.min(points.len()));
    for front in nondominated_sort(points) {
        if chosen.len() + front.len() <= mu {
            chosen.extend(front);
            if chosen.len() == mu {
                break;
            }
            continue;
        }
        let members: Vec<&[f64]> = front.iter().map(|&i| points[i].as_ref()).collect();
        let crowd = crowding_distance(&members);
        let mut by_crowd: Vec<usize> = (0..front.len()).collect();
        by_crowd.sort_by(|&a, &b| {
            crowd[b]
                .partial_cmp(&crowd[a])
                .unwrap_or(Ordering::Equal)
                .then(front[a].cmp(&front[b]))
        });
        chosen.extend(by_crowd.into_iter().take(mu - chosen.len()).map(|k| front[k]));
        break;
    }
    chosen.sort_unstable();
    chosen
}
