//! Geometric primitives: distances, k-means costs, means, good points,
//! aspect ratios, and the `Clustering` record they assemble into.
//!
//! The metric is Euclidean on R^d throughout. Every distance goes through
//! [`squared_dist`], so swapping the metric is a contained change.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point;
use crate::tol::{le_snapped, rel_eq};

/// Squared Euclidean distance.
pub fn squared_dist(a: &Point, b: &Point) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.coords()
        .iter()
        .zip(b.coords())
        .map(|(x, y)| (x - y) * (x - y))
        .sum())
}

/// Euclidean distance.
pub fn dist(a: &Point, b: &Point) -> Result<f64> {
    squared_dist(a, b).map(f64::sqrt)
}

/// 1-means cost of `xs` about the center `c`: the sum of squared distances.
pub fn cost_with_center(xs: &[Point], c: &Point) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::invalid("cost of an empty point set is undefined"));
    }
    let mut total = 0.0;
    for x in xs {
        total += squared_dist(x, c)?;
    }
    Ok(total)
}

/// Coordinate-wise average of a nonempty point set.
pub fn mean(xs: &[Point]) -> Result<Point> {
    if xs.is_empty() {
        return Err(Error::invalid("mean of an empty point set is undefined"));
    }
    let dim = xs[0].dim();
    let mut acc = vec![0.0; dim];
    for x in xs {
        if x.dim() != dim {
            return Err(Error::invalid("dimension mismatch in point set"));
        }
        for (a, c) in acc.iter_mut().zip(x.coords()) {
            *a += c;
        }
    }
    let n = xs.len() as f64;
    for a in acc.iter_mut() {
        *a /= n;
    }
    Point::new(acc)
}

/// Optimal 1-means cost of `xs` (cost about its mean).
pub fn one_means_cost(xs: &[Point]) -> Result<f64> {
    let mu = mean(xs)?;
    cost_with_center(xs, &mu)
}

/// Indices of the good points of `xs`: the x with single-center cost at most
/// three times the optimal 1-means cost. Always a strict majority of the set.
pub fn good_points(xs: &[Point]) -> Result<Vec<usize>> {
    let budget = 3.0 * one_means_cost(xs)?;
    let mut good = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        if le_snapped(cost_with_center(xs, x)?, budget) {
            good.push(i);
        }
    }
    Ok(good)
}

/// Max pairwise distance divided by min pairwise distance over distinct
/// index pairs. Undefined for singletons or sets containing duplicates.
pub fn aspect_ratio(xs: &[Point]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::UndefinedRatio(
            "need at least two points".to_string(),
        ));
    }
    let mut max_d2 = 0.0f64;
    let mut min_d2 = f64::INFINITY;
    for i in 0..xs.len() {
        for j in (i + 1)..xs.len() {
            let d2 = squared_dist(&xs[i], &xs[j])?;
            max_d2 = max_d2.max(d2);
            min_d2 = min_d2.min(d2);
        }
    }
    if min_d2 == 0.0 {
        return Err(Error::UndefinedRatio(
            "minimum pairwise distance is zero".to_string(),
        ));
    }
    Ok((max_d2 / min_d2).sqrt())
}

/// Assign every point to its nearest center (ties to the lowest center
/// index) and return the summed squared distance.
pub fn cost_of_centers(xs: &[Point], centers: &[Point]) -> Result<f64> {
    if centers.is_empty() {
        return Err(Error::invalid("no centers given"));
    }
    let mut total = 0.0;
    for x in xs {
        let mut best = f64::INFINITY;
        for c in centers {
            let d2 = squared_dist(x, c)?;
            if d2 < best {
                best = d2;
            }
        }
        total += best;
    }
    Ok(total)
}

/// Nearest-center assignment with ties broken toward the lowest center index.
pub fn assign_to_centers(xs: &[Point], centers: &[Point]) -> Result<Vec<usize>> {
    if centers.is_empty() {
        return Err(Error::invalid("no centers given"));
    }
    let mut assignment = Vec::with_capacity(xs.len());
    for x in xs {
        let mut best = f64::INFINITY;
        let mut best_idx = 0;
        for (ci, c) in centers.iter().enumerate() {
            let d2 = squared_dist(x, c)?;
            if d2 < best {
                best = d2;
                best_idx = ci;
            }
        }
        assignment.push(best_idx);
    }
    Ok(assignment)
}

/// A clustering given by a per-point cluster index, the cluster centers, and
/// the per-cluster costs about those centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// Per-point cluster index in `0..num_clusters()`.
    pub assignment: Vec<usize>,
    pub centers: Vec<Point>,
    pub per_cluster_cost: Vec<f64>,
    pub total_cost: f64,
}

impl Clustering {
    /// Build from an assignment, re-centering every cluster at its mean.
    /// Cluster labels are canonicalized to first-appearance order, so two
    /// partitions that agree as set partitions produce identical records.
    pub fn from_assignment(points: &[Point], raw_assignment: &[usize]) -> Result<Self> {
        if points.is_empty() || raw_assignment.len() != points.len() {
            return Err(Error::invalid("assignment must cover a nonempty point set"));
        }
        let mut relabel: Vec<Option<usize>> = vec![None; raw_assignment.len()];
        let mut next = 0usize;
        let mut assignment = Vec::with_capacity(points.len());
        for &raw in raw_assignment {
            if raw >= raw_assignment.len() {
                return Err(Error::invalid("cluster index out of range"));
            }
            let label = *relabel[raw].get_or_insert_with(|| {
                let l = next;
                next += 1;
                l
            });
            assignment.push(label);
        }

        let mut members: Vec<Vec<usize>> = vec![Vec::new(); next];
        for (i, &c) in assignment.iter().enumerate() {
            members[c].push(i);
        }
        let mut centers = Vec::with_capacity(next);
        let mut per_cluster_cost = Vec::with_capacity(next);
        for cluster in &members {
            let pts: Vec<Point> = cluster.iter().map(|&i| points[i].clone()).collect();
            let mu = mean(&pts)?;
            per_cluster_cost.push(cost_with_center(&pts, &mu)?);
            centers.push(mu);
        }
        let total_cost = per_cluster_cost.iter().sum();
        Ok(Clustering {
            assignment,
            centers,
            per_cluster_cost,
            total_cost,
        })
    }

    pub fn num_clusters(&self) -> usize {
        self.centers.len()
    }

    /// Member indices per cluster, in point order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); self.num_clusters()];
        for (i, &c) in self.assignment.iter().enumerate() {
            members[c].push(i);
        }
        members
    }

    /// Check the internal consistency of the record (assignment in range,
    /// total equal to the per-cluster sum within tolerance).
    pub fn validate(&self) -> Result<()> {
        let ell = self.num_clusters();
        if self.per_cluster_cost.len() != ell {
            return Err(Error::invalid("per-cluster cost length mismatch"));
        }
        if self.assignment.iter().any(|&c| c >= ell) {
            return Err(Error::invalid("assignment index out of range"));
        }
        let sum: f64 = self.per_cluster_cost.iter().sum();
        if !rel_eq(sum, self.total_cost) {
            return Err(Error::invalid("total cost does not match cluster sum"));
        }
        Ok(())
    }
}
