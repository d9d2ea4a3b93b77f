//! Offline k-clustering subroutines: two exact routes (partition enumeration
//! and 1-D dynamic programming) and k-means++ seeding with Lloyd refinement.
//!
//! The online algorithm takes one of these as its offline subroutine `A`; the
//! declared approximation factor of the chosen route feeds the reported
//! bounds.

mod dp1d;
mod enumerate;

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{assign_to_centers, squared_dist, Clustering};
use crate::point::Point;
use crate::tol::rel_eq;

pub(crate) use dp1d::kmeans_1d_assignment;
pub(crate) use enumerate::best_kmeans_partition;

/// Largest instance the exhaustive exact route accepts.
pub const EXACT_ENUM_MAX_N: usize = 12;
/// Largest 1-D instance the exact dynamic program accepts.
pub const EXACT_1D_MAX_N: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    ExactEnum,
    #[serde(rename = "exact-1d-dp")]
    Exact1dDp,
    KmeansppLloyd,
}

impl SolverKind {
    pub fn is_exact(self) -> bool {
        matches!(self, SolverKind::ExactEnum | SolverKind::Exact1dDp)
    }
}

/// Which offline algorithm to run and with what declared approximation
/// factor. `alpha_claim` is 1 for the exact kinds; for k-means++ it records
/// the seeding's expectation bound and is used for reporting only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    pub kind: SolverKind,
    pub alpha_claim: f64,
    pub lloyd_max_iters: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl SolverSpec {
    pub fn exact_enum() -> Self {
        SolverSpec {
            kind: SolverKind::ExactEnum,
            alpha_claim: 1.0,
            lloyd_max_iters: 0,
            restarts: 1,
            seed: 0,
        }
    }

    pub fn exact_1d_dp() -> Self {
        SolverSpec {
            kind: SolverKind::Exact1dDp,
            alpha_claim: 1.0,
            lloyd_max_iters: 0,
            restarts: 1,
            seed: 0,
        }
    }

    /// k-means++ with Lloyd refinement. The claimed factor is the seeding
    /// expectation bound 8(ln k + 2); it is reported, never enforced.
    pub fn kmeanspp(k: usize, seed: u64) -> Self {
        SolverSpec {
            kind: SolverKind::KmeansppLloyd,
            alpha_claim: 8.0 * ((k.max(1) as f64).ln() + 2.0),
            lloyd_max_iters: 50,
            restarts: 3,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha_claim < 1.0 {
            return Err(Error::invalid("alpha_claim must be >= 1"));
        }
        if self.kind.is_exact() && self.alpha_claim != 1.0 {
            return Err(Error::invalid("exact solver kinds must claim alpha = 1"));
        }
        if self.restarts == 0 {
            return Err(Error::invalid("restarts must be >= 1"));
        }
        Ok(())
    }
}

/// Result of one offline solve: a clustering whose centers are the cluster
/// means, with no empty clusters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OfflineResult {
    pub clustering: Clustering,
    #[serde(skip, default)]
    pub elapsed: Duration,
    pub exact: bool,
}

/// Run the offline algorithm named by `spec` on `xs` with `k` clusters.
/// Deterministic given the point order, `k`, and `spec.seed`.
pub fn solve(xs: &[Point], k: usize, spec: &SolverSpec) -> Result<OfflineResult> {
    spec.validate()?;
    if xs.is_empty() {
        return Err(Error::invalid("cannot cluster an empty point set"));
    }
    if k == 0 {
        return Err(Error::invalid("k must be >= 1"));
    }
    let start = Instant::now();
    let (clustering, exact) = match spec.kind {
        SolverKind::ExactEnum => {
            if xs.len() > EXACT_ENUM_MAX_N {
                return Err(Error::unsupported(format!(
                    "exact-enum limited to n <= {EXACT_ENUM_MAX_N}, got {}",
                    xs.len()
                )));
            }
            let (_, assignment) = best_kmeans_partition(xs, k);
            (Clustering::from_assignment(xs, &assignment)?, true)
        }
        SolverKind::Exact1dDp => {
            if xs[0].dim() != 1 {
                return Err(Error::unsupported(format!(
                    "exact-1d-dp requires 1-D input, got dimension {}",
                    xs[0].dim()
                )));
            }
            if xs.len() > EXACT_1D_MAX_N {
                return Err(Error::unsupported(format!(
                    "exact-1d-dp limited to n <= {EXACT_1D_MAX_N}, got {}",
                    xs.len()
                )));
            }
            let values: Vec<f64> = xs.iter().map(|p| p.coords()[0]).collect();
            let assignment = kmeans_1d_assignment(&values, k);
            (Clustering::from_assignment(xs, &assignment)?, true)
        }
        SolverKind::KmeansppLloyd => {
            let mut best: Option<Clustering> = None;
            for restart in 0..spec.restarts {
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                rng.set_stream(restart as u64);
                let centers = kmeanspp_seed_rng(xs, k, &mut rng)?;
                let candidate = lloyd_refine(xs, centers, spec.lloyd_max_iters)?;
                let replace = match &best {
                    None => true,
                    Some(b) => {
                        candidate.total_cost < b.total_cost
                            && !rel_eq(candidate.total_cost, b.total_cost)
                    }
                };
                if replace {
                    best = Some(candidate);
                }
            }
            (best.expect("restarts >= 1"), false)
        }
    };
    Ok(OfflineResult {
        clustering,
        elapsed: start.elapsed(),
        exact,
    })
}

/// D^2-weighted seeding: first center uniform, each next center drawn with
/// probability proportional to squared distance to the nearest chosen
/// center. Deterministic given the seed. Duplicate centers are possible when
/// `k` exceeds the number of distinct points.
pub fn kmeanspp_seed(xs: &[Point], k: usize, seed: u64) -> Result<Vec<Point>> {
    if xs.is_empty() {
        return Err(Error::invalid("cannot seed from an empty point set"));
    }
    if k == 0 {
        return Err(Error::invalid("k must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    kmeanspp_seed_rng(xs, k, &mut rng)
}

fn kmeanspp_seed_rng(xs: &[Point], k: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Point>> {
    let n = xs.len();
    let first = rng.random_range(0..n);
    let mut centers = vec![xs[first].clone()];
    let mut min_d2: Vec<f64> = xs
        .iter()
        .map(|x| squared_dist(x, &centers[0]).unwrap())
        .collect();
    while centers.len() < k {
        let total: f64 = min_d2.iter().sum();
        let pick = if total > 0.0 {
            let r = rng.random::<f64>() * total;
            let mut cum = 0.0;
            let mut idx = n - 1;
            for (i, &w) in min_d2.iter().enumerate() {
                cum += w;
                if r < cum {
                    idx = i;
                    break;
                }
            }
            idx
        } else {
            rng.random_range(0..n)
        };
        centers.push(xs[pick].clone());
        for (i, slot) in min_d2.iter_mut().enumerate() {
            let d2 = squared_dist(&xs[i], &xs[pick])?;
            if d2 < *slot {
                *slot = d2;
            }
        }
    }
    Ok(centers)
}

/// Lloyd iterations from the given centers: nearest-center assignment (ties
/// to the lowest center index) alternating with mean recomputation. Stops at
/// `max_iters` or when the total cost improves by less than 1e-12 relative.
/// Empty clusters are dropped.
pub fn lloyd_refine(xs: &[Point], centers: Vec<Point>, max_iters: usize) -> Result<Clustering> {
    if centers.is_empty() {
        return Err(Error::invalid("lloyd_refine needs at least one center"));
    }
    let assignment = assign_to_centers(xs, &centers)?;
    let mut current = Clustering::from_assignment(xs, &assignment)?;
    for _ in 0..max_iters {
        let assignment = assign_to_centers(xs, &current.centers)?;
        let next = Clustering::from_assignment(xs, &assignment)?;
        let improvement = current.total_cost - next.total_cost;
        let done = improvement < 1e-12 * current.total_cost.max(1e-300);
        current = next;
        if done {
            break;
        }
    }
    Ok(current)
}
