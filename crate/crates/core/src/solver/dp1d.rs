//! Exact 1-D k-means by dynamic programming over the sorted order.
//!
//! Optimal 1-D clusters are intervals of the sorted values; the layered DP
//! over split positions is sped up with divide-and-conquer monotonicity of
//! the optimal split.

/// Exact k-means assignment for 1-D values. Returns a per-value cluster
/// index (in original order). At most `k` nonempty clusters are used; if a
/// smaller number of intervals reaches the same optimal cost (within
/// tolerance), the smaller number wins.
pub(crate) fn kmeans_1d_assignment(values: &[f64], k: usize) -> Vec<usize> {
    let n = values.len();
    let k = k.min(n);
    if k <= 1 {
        return vec![0; n];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)));
    let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();

    let mut s1 = vec![0.0f64; n + 1];
    let mut s2 = vec![0.0f64; n + 1];
    for (i, &v) in sorted.iter().enumerate() {
        s1[i + 1] = s1[i] + v;
        s2[i + 1] = s2[i] + v * v;
    }
    // SSE of sorted[i..=j] about its mean.
    let seg = |i: usize, j: usize| -> f64 {
        let cnt = (j + 1 - i) as f64;
        let sum = s1[j + 1] - s1[i];
        let sum2 = s2[j + 1] - s2[i];
        (sum2 - sum * sum / cnt).max(0.0)
    };

    // layer_cost[i][j]: best cost of covering sorted[0..=j] with i+1 intervals.
    let mut prev: Vec<f64> = (0..n).map(|j| seg(0, j)).collect();
    let mut layer_costs = vec![prev[n - 1]];
    let mut splits: Vec<Vec<usize>> = Vec::with_capacity(k - 1);

    for layer in 1..k {
        let mut cur = vec![f64::INFINITY; n];
        let mut split = vec![usize::MAX; n];

        // Divide and conquer over j with a monotone optimal split index.
        #[allow(clippy::too_many_arguments, clippy::needless_range_loop)]
        fn fill(
            lo: usize,
            hi: usize,
            mlo: usize,
            mhi: usize,
            layer: usize,
            prev: &[f64],
            cur: &mut [f64],
            split: &mut [usize],
            seg: &dyn Fn(usize, usize) -> f64,
        ) {
            if lo > hi {
                return;
            }
            let mid = (lo + hi) / 2;
            let m_from = mlo.max(layer - 1);
            let m_to = mhi.min(mid.saturating_sub(1));
            let mut best = f64::INFINITY;
            let mut best_m = m_from;
            for m in m_from..=m_to.min(mid.saturating_sub(1)) {
                if m >= mid {
                    break;
                }
                let v = prev[m] + seg(m + 1, mid);
                if v < best {
                    best = v;
                    best_m = m;
                }
            }
            cur[mid] = best;
            split[mid] = best_m;
            if mid > lo {
                fill(lo, mid - 1, mlo, best_m, layer, prev, cur, split, seg);
            }
            if mid < hi {
                fill(mid + 1, hi, best_m, mhi, layer, prev, cur, split, seg);
            }
        }

        fill(
            layer,
            n - 1,
            layer - 1,
            n - 2,
            layer,
            &prev,
            &mut cur,
            &mut split,
            &seg,
        );
        layer_costs.push(cur[n - 1]);
        splits.push(split);
        prev = cur;
    }

    // Prefer the smallest number of intervals achieving the optimal cost.
    let optimal = layer_costs[k - 1];
    let mut used = k;
    for (i, &c) in layer_costs.iter().enumerate() {
        if crate::tol::rel_eq(c, optimal) || c <= optimal {
            used = i + 1;
            break;
        }
    }

    let mut assignment_sorted = vec![0usize; n];
    let mut hi = n - 1;
    for layer in (1..used).rev() {
        let m = splits[layer - 1][hi];
        for slot in assignment_sorted.iter_mut().take(hi + 1).skip(m + 1) {
            *slot = layer;
        }
        hi = m;
    }

    let mut assignment = vec![0usize; n];
    for (pos, &orig) in order.iter().enumerate() {
        assignment[orig] = assignment_sorted[pos];
    }
    assignment
}
