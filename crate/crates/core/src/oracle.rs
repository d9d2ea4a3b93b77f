//! Exact optimal k-means cost for small instances, used as the ground truth
//! in tests and reports. Dispatches by input shape: 1-D dynamic programming
//! up to n = 5000, exhaustive enumeration up to n = 12 in any dimension.

use crate::error::{Error, Result};
use crate::metric::Clustering;
use crate::point::Point;
use crate::solver::{
    best_kmeans_partition, kmeans_1d_assignment, EXACT_1D_MAX_N, EXACT_ENUM_MAX_N,
};

/// Exact optimal k-means cost of `xs`, or an unsupported-instance error when
/// the instance fits neither exact regime.
pub fn opt_kmeans_cost_oracle(xs: &[Point], k: usize) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::invalid("oracle needs a nonempty point set"));
    }
    if k == 0 {
        return Err(Error::invalid("k must be >= 1"));
    }
    let n = xs.len();
    let assignment = if xs[0].dim() == 1 && n <= EXACT_1D_MAX_N {
        let values: Vec<f64> = xs.iter().map(|p| p.coords()[0]).collect();
        kmeans_1d_assignment(&values, k)
    } else if n <= EXACT_ENUM_MAX_N {
        best_kmeans_partition(xs, k).1
    } else {
        return Err(Error::unsupported(format!(
            "no exact oracle regime for n={n}, dim={}",
            xs[0].dim()
        )));
    };
    Ok(Clustering::from_assignment(xs, &assignment)?.total_cost)
}
