//! Quality indicators for minimization fronts.

use thiserror::Error;

use crate::moea_core::nondominated_filter;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("no point of the front dominates the reference point")]
    EmptyFront,
    #[error("front or reference set is empty")]
    EmptySet,
    #[error("only bi-objective fronts are supported, got {0} objectives")]
    DimensionUnsupported(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("attainment level must lie in (0, 1], got {0}")]
    InvalidLevel(f64),
}

/// Exact 2-D hypervolume. Points that do not strictly dominate the
/// reference are dropped; their count is returned alongside the area.
pub fn hypervolume_2d_counted(
    front: &[Vec<f64>],
    reference: [f64; 2],
) -> Result<(f64, usize), MetricsError> {
    if let Some(p) = front.iter().find(|p| p.len() != 2) {
        return Err(MetricsError::DimensionUnsupported(p.len()));
    }
    let mut pts: Vec<[f64; 2]> = front
        .iter()
        .filter(|p| p[0] < reference[0] && p[1] < reference[1])
        .map(|p| [p[0], p[1]])
        .collect();
    let discarded = front.len() - pts.len();
    if pts.is_empty() {
        return Err(MetricsError::EmptyFront);
    }
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut area = 0.0;
    let mut ceiling = reference[1];
    for p in pts {
        if p[1] < ceiling {
            area += (reference[0] - p[0]) * (ceiling - p[1]);
            ceiling = p[1];
        }
    }
    Ok((area, discarded))
}

pub fn hypervolume_2d(front: &[Vec<f64>], reference: [f64; 2]) -> Result<f64, MetricsError> {
    hypervolume_2d_counted(front, reference).map(|(a, _)| a)
}

/// Mean distance from each reference point to its nearest front point.
pub fn igd(front: &[Vec<f64>], reference_set: &[Vec<f64>]) -> Result<f64, MetricsError> {
    if front.is_empty() || reference_set.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    let m = reference_set[0].len();
    if let Some(p) = front.iter().chain(reference_set).find(|p| p.len() != m) {
        return Err(MetricsError::LengthMismatch(m, p.len()));
    }
    let total: f64 = reference_set
        .iter()
        .map(|r| {
            front
                .iter()
                .map(|f| f.iter().zip(r).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Ok(total / reference_set.len() as f64)
}

/// Componentwise maximum over all points, pushed out by 10% of its
/// magnitude (0.1 where the maximum is zero).
pub fn default_reference_point<'a, I>(points: I) -> Option<Vec<f64>>
where
    I: IntoIterator<Item = &'a Vec<f64>>,
{
    let mut max: Option<Vec<f64>> = None;
    for p in points {
        match &mut max {
            None => max = Some(p.clone()),
            Some(m) => {
                for (a, b) in m.iter_mut().zip(p) {
                    *a = a.max(*b);
                }
            }
        }
    }
    max.map(|m| {
        m.into_iter()
            .map(|v| if v == 0.0 { 0.1 } else { v + 0.1 * v.abs() })
            .collect()
    })
}

/// Nondominated, deduplicated points sorted by the first objective.
pub fn normalize_front(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = nondominated_filter(points)
        .into_iter()
        .map(|i| points[i].clone())
        .collect();
    out.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    out.dedup();
    out
}

/// Corners of the `level` attainment surface of bi-objective runs.
///
/// A grid point is attained by a run when some member of its front weakly
/// dominates it. The returned staircase corners bound the region attained
/// by at least `ceil(level * runs)` runs, sorted by ascending first objective
/// (and hence descending second).
pub fn attainment_summary(fronts: &[Vec<Vec<f64>>], level: f64) -> Result<Vec<[f64; 2]>, MetricsError> {
    if !(level > 0.0 && level <= 1.0) {
        return Err(MetricsError::InvalidLevel(level));
    }
    if fronts.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    if let Some(p) = fronts.iter().flatten().find(|p| p.len() != 2) {
        return Err(MetricsError::DimensionUnsupported(p.len()));
    }
    let runs = fronts.len();
    let need = ((level * runs as f64) - 1e-9).ceil().max(1.0) as usize;
    let mut xs: Vec<f64> = fronts.iter().flatten().map(|p| p[0]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let mut corners = Vec::new();
    let mut last = f64::INFINITY;
    for x in xs {
        // lowest second objective each run reaches at this first-objective value
        let mut reach: Vec<f64> = fronts
            .iter()
            .map(|f| {
                f.iter()
                    .filter(|p| p[0] <= x)
                    .map(|p| p[1])
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        reach.sort_by(f64::total_cmp);
        let y = reach[need - 1];
        if y < last {
            corners.push([x, y]);
            last = y;
        }
    }
    Ok(corners)
}
