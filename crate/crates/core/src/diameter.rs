//! Min-max-diameter partitions: split a point set into at most `ell` groups
//! minimizing the largest intra-group diameter.
//!
//! Exact mode enumerates set partitions (general dimension, n <= 15) or runs
//! a sorted-interval dynamic program (1-D, any practical n). Approx mode is
//! farthest-first traversal with a factor-2 certificate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::dist;
use crate::point::Point;
use crate::tol::rel_eq;

/// How to compute a min-max-diameter partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiamMode {
    /// Exact optimum; errors when the instance is outside the exact regimes.
    Exact,
    /// Farthest-first traversal; value within a factor 2 of the optimum.
    Approx,
    /// Exact when feasible, otherwise farthest-first.
    Auto,
}

/// A partition into at most `ell` groups together with its max intra-group
/// diameter. `exact` records whether the value is the true optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterPartition {
    pub assignment: Vec<usize>,
    pub value: f64,
    pub exact: bool,
}

/// Max pairwise distance of a point set (0 for a singleton).
pub fn diameter(xs: &[Point]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::invalid("diameter of an empty set is undefined"));
    }
    let mut best = 0.0f64;
    for i in 0..xs.len() {
        for j in (i + 1)..xs.len() {
            best = best.max(dist(&xs[i], &xs[j])?);
        }
    }
    Ok(best)
}

const EXACT_ENUM_MAX_N: usize = 15;
const EXACT_1D_MAX_N: usize = 20_000;

fn exact_feasible(n: usize, dim: usize) -> bool {
    dim == 1 && n <= EXACT_1D_MAX_N || n <= EXACT_ENUM_MAX_N
}

/// Best-`ell`-diameter partition of `xs`.
pub fn min_max_diameter_partition(
    xs: &[Point],
    ell: usize,
    mode: DiamMode,
) -> Result<DiameterPartition> {
    if ell == 0 {
        return Err(Error::invalid("number of groups must be >= 1"));
    }
    if xs.is_empty() {
        return Err(Error::invalid("cannot partition an empty set"));
    }
    let n = xs.len();
    if ell >= n {
        // Singletons are optimal regardless of mode.
        return Ok(DiameterPartition {
            assignment: (0..n).collect(),
            value: 0.0,
            exact: true,
        });
    }
    if ell == 1 {
        return Ok(DiameterPartition {
            assignment: vec![0; n],
            value: diameter(xs)?,
            exact: true,
        });
    }
    match mode {
        DiamMode::Exact => exact_partition(xs, ell),
        DiamMode::Approx => gonzalez_partition(xs, ell),
        DiamMode::Auto => {
            if exact_feasible(n, xs[0].dim()) {
                exact_partition(xs, ell)
            } else {
                gonzalez_partition(xs, ell)
            }
        }
    }
}

/// Best-`ell`-diameter value only.
pub fn diam_value(xs: &[Point], ell: usize, mode: DiamMode) -> Result<f64> {
    min_max_diameter_partition(xs, ell, mode).map(|p| p.value)
}

fn exact_partition(xs: &[Point], ell: usize) -> Result<DiameterPartition> {
    let n = xs.len();
    if xs[0].dim() == 1 {
        if n > EXACT_1D_MAX_N {
            return Err(Error::unsupported(format!(
                "exact 1-D diameter partition limited to n <= {EXACT_1D_MAX_N}, got {n}"
            )));
        }
        return exact_partition_1d(xs, ell);
    }
    if n > EXACT_ENUM_MAX_N {
        return Err(Error::unsupported(format!(
            "exact diameter partition limited to n <= {EXACT_ENUM_MAX_N} in dimension > 1, got {n}"
        )));
    }
    exact_partition_enum(xs, ell)
}

/// Exhaustive search over canonical assignments with branch-and-bound on the
/// running max diameter. The first optimum found is kept, which makes the
/// lexicographically smallest assignment win among ties.
fn exact_partition_enum(xs: &[Point], ell: usize) -> Result<DiameterPartition> {
    let n = xs.len();
    let mut d = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = dist(&xs[i], &xs[j])?;
            d[i][j] = v;
            d[j][i] = v;
        }
    }

    struct Search<'a> {
        d: &'a [Vec<f64>],
        ell: usize,
        n: usize,
        assignment: Vec<usize>,
        members: Vec<Vec<usize>>,
        best_value: f64,
        best_assignment: Vec<usize>,
    }

    impl Search<'_> {
        fn recurse(&mut self, i: usize, current: f64) {
            if i == self.n {
                // Strictly better only: ties keep the earlier assignment.
                if current < self.best_value && !rel_eq(current, self.best_value) {
                    self.best_value = current;
                    self.best_assignment = self.assignment.clone();
                }
                return;
            }
            let used = self.members.iter().take_while(|m| !m.is_empty()).count();
            let limit = (used + 1).min(self.ell);
            for c in 0..limit {
                let mut val = current;
                for &p in &self.members[c] {
                    val = val.max(self.d[p][i]);
                }
                if val > self.best_value || rel_eq(val, self.best_value) {
                    continue;
                }
                self.members[c].push(i);
                self.assignment[i] = c;
                self.recurse(i + 1, val);
                self.members[c].pop();
            }
        }
    }

    let mut search = Search {
        d: &d,
        ell,
        n,
        assignment: vec![0; n],
        members: vec![Vec::new(); ell],
        best_value: f64::INFINITY,
        best_assignment: vec![0; n],
    };
    search.recurse(0, 0.0);
    debug_assert!(search.best_value.is_finite());
    Ok(DiameterPartition {
        assignment: search.best_assignment,
        value: search.best_value,
        exact: true,
    })
}

/// 1-D exact: optimal groups are intervals of the sorted order, found by a
/// dynamic program over split positions.
fn exact_partition_1d(xs: &[Point], ell: usize) -> Result<DiameterPartition> {
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        xs[a].coords()[0]
            .partial_cmp(&xs[b].coords()[0])
            .unwrap()
            .then(a.cmp(&b))
    });
    let a: Vec<f64> = order.iter().map(|&i| xs[i].coords()[0]).collect();

    // f[j] over the current layer: best max-range covering sorted points 0..=j.
    let mut f: Vec<f64> = (0..n).map(|j| a[j] - a[0]).collect();
    let mut splits: Vec<Vec<usize>> = Vec::with_capacity(ell.saturating_sub(1));
    for layer in 1..ell {
        let mut g = vec![f64::INFINITY; n];
        let mut split = vec![0usize; n];
        for j in 0..n {
            if j < layer {
                g[j] = 0.0;
                split[j] = j.saturating_sub(1);
                continue;
            }
            let mut best = f64::INFINITY;
            let mut best_m = layer - 1;
            for m in (layer - 1)..j {
                let v = f[m].max(a[j] - a[m + 1]);
                if v < best {
                    best = v;
                    best_m = m;
                }
            }
            g[j] = best;
            split[j] = best_m;
        }
        f = g;
        splits.push(split);
    }

    // Backtrack segment boundaries in sorted order.
    let value = f[n - 1].max(0.0);
    let mut assignment_sorted = vec![0usize; n];
    let mut hi = n - 1;
    for layer in (1..ell).rev() {
        let m = splits[layer - 1][hi];
        for idx in assignment_sorted.iter_mut().take(hi + 1).skip(m + 1) {
            *idx = layer;
        }
        hi = m;
        if hi == 0 && layer > 1 {
            // Degenerate: remaining layers collapse onto the first point.
            break;
        }
    }
    let mut assignment = vec![0usize; n];
    for (sorted_pos, &orig) in order.iter().enumerate() {
        assignment[orig] = assignment_sorted[sorted_pos];
    }
    // Canonicalize labels to first-appearance order over the original indices.
    let mut relabel: Vec<Option<usize>> = vec![None; ell];
    let mut next = 0usize;
    for slot in assignment.iter_mut() {
        let l = *relabel[*slot].get_or_insert_with(|| {
            let l = next;
            next += 1;
            l
        });
        *slot = l;
    }
    Ok(DiameterPartition {
        assignment,
        value,
        exact: true,
    })
}

/// Farthest-first traversal into `ell` groups. The returned value is at
/// least the optimum and at most twice the optimum.
fn gonzalez_partition(xs: &[Point], ell: usize) -> Result<DiameterPartition> {
    let n = xs.len();
    let mut center_idx = vec![0usize];
    let mut min_dist: Vec<f64> = xs.iter().map(|x| dist(x, &xs[0]).unwrap()).collect();
    while center_idx.len() < ell {
        let mut far = 0usize;
        let mut far_d = -1.0f64;
        for (i, &md) in min_dist.iter().enumerate() {
            if md > far_d {
                far_d = md;
                far = i;
            }
        }
        center_idx.push(far);
        for (i, slot) in min_dist.iter_mut().enumerate() {
            let d = dist(&xs[i], &xs[far])?;
            if d < *slot {
                *slot = d;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for (i, x) in xs.iter().enumerate() {
        let mut best = f64::INFINITY;
        let mut best_c = 0usize;
        for (c, &ci) in center_idx.iter().enumerate() {
            let d = dist(x, &xs[ci])?;
            if d < best {
                best = d;
                best_c = c;
            }
        }
        assignment[i] = best_c;
    }
    let mut groups: Vec<Vec<&Point>> = vec![Vec::new(); ell];
    for (i, &c) in assignment.iter().enumerate() {
        groups[c].push(&xs[i]);
    }
    let mut value = 0.0f64;
    for g in &groups {
        for i in 0..g.len() {
            for j in (i + 1)..g.len() {
                value = value.max(dist(g[i], g[j])?);
            }
        }
    }
    // Canonicalize labels by first appearance.
    let mut relabel: Vec<Option<usize>> = vec![None; ell];
    let mut next = 0usize;
    for slot in assignment.iter_mut() {
        let l = *relabel[*slot].get_or_insert_with(|| {
            let l = next;
            next += 1;
            l
        });
        *slot = l;
    }
    Ok(DiameterPartition {
        assignment,
        value,
        exact: false,
    })
}
