//! Exact k-means by exhaustive enumeration of canonical assignments, with
//! branch-and-bound pruning. Only viable for a dozen points; this is the
//! ground-truth route the rest of the crate is validated against.

use crate::point::Point;
use crate::tol::rel_eq;

struct ClusterStats {
    count: usize,
    sum: Vec<f64>,
    sumsq: f64,
}

impl ClusterStats {
    fn new(dim: usize) -> Self {
        ClusterStats {
            count: 0,
            sum: vec![0.0; dim],
            sumsq: 0.0,
        }
    }

    fn sse(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        let norm2: f64 = self.sum.iter().map(|s| s * s).sum();
        (self.sumsq - norm2 / self.count as f64).max(0.0)
    }

    fn add(&mut self, p: &Point) {
        self.count += 1;
        for (s, c) in self.sum.iter_mut().zip(p.coords()) {
            *s += c;
        }
        self.sumsq += p.coords().iter().map(|c| c * c).sum::<f64>();
    }

    fn remove(&mut self, p: &Point) {
        self.count -= 1;
        for (s, c) in self.sum.iter_mut().zip(p.coords()) {
            *s -= c;
        }
        self.sumsq -= p.coords().iter().map(|c| c * c).sum::<f64>();
    }
}

/// Best k-means partition over all assignments into at most `k` nonempty
/// clusters. Assignments are enumerated in lexicographic canonical order and
/// only strictly better costs replace the incumbent, so the lexicographically
/// smallest assignment wins among ties.
pub(crate) fn best_kmeans_partition(xs: &[Point], k: usize) -> (f64, Vec<usize>) {
    let n = xs.len();
    let k = k.min(n);
    let dim = xs[0].dim();

    struct Search<'a> {
        xs: &'a [Point],
        k: usize,
        stats: Vec<ClusterStats>,
        assignment: Vec<usize>,
        used: usize,
        best_cost: f64,
        best_assignment: Vec<usize>,
    }

    impl Search<'_> {
        fn recurse(&mut self, i: usize, running: f64) {
            if i == self.xs.len() {
                if running < self.best_cost && !rel_eq(running, self.best_cost) {
                    self.best_cost = running;
                    self.best_assignment = self.assignment.clone();
                }
                return;
            }
            let limit = (self.used + 1).min(self.k);
            for c in 0..limit {
                let before = self.stats[c].sse();
                self.stats[c].add(&self.xs[i]);
                let next = running - before + self.stats[c].sse();
                if next < self.best_cost && !rel_eq(next, self.best_cost) {
                    self.assignment[i] = c;
                    let opened = c == self.used;
                    if opened {
                        self.used += 1;
                    }
                    self.recurse(i + 1, next);
                    if opened {
                        self.used -= 1;
                    }
                }
                self.stats[c].remove(&self.xs[i]);
            }
        }
    }

    let mut search = Search {
        xs,
        k,
        stats: (0..k).map(|_| ClusterStats::new(dim)).collect(),
        assignment: vec![0; n],
        used: 0,
        best_cost: f64::INFINITY,
        best_assignment: vec![0; n],
    };
    search.recurse(0, 0.0);
    (search.best_cost, search.best_assignment)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(values: &[f64]) -> Vec<Point> {
        values.iter().map(|&v| Point::scalar(v).unwrap()).collect()
    }

    #[test]
    fn two_far_points_split() {
        let (cost, a) = best_kmeans_partition(&pts(&[0.0, 10.0]), 2);
        assert_eq!(cost, 0.0);
        assert_eq!(a, vec![0, 1]);
    }

    #[test]
    fn three_points_two_clusters() {
        let (cost, a) = best_kmeans_partition(&pts(&[0.0, 2.0, 10.0]), 2);
        assert!((cost - 2.0).abs() < 1e-12);
        assert_eq!(a, vec![0, 0, 1]);
    }

    #[test]
    fn pairs_example() {
        let (cost, _) = best_kmeans_partition(&pts(&[0.0, 1.0, 9.0, 10.0]), 2);
        assert!((cost - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_points_prefer_fewer_clusters() {
        let (cost, a) = best_kmeans_partition(&pts(&[1.0, 1.0, 1.0]), 2);
        assert_eq!(cost, 0.0);
        // All-zero assignment is lexicographically smallest among ties.
        assert_eq!(a, vec![0, 0, 0]);
    }
}
