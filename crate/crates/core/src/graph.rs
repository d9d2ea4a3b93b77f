//! Per-run analysis graph: each step points at the prefix points it merged
//! with (P_t) and the points left expensive by the merge (Q_t). Independent
//! sets of this graph, read in arrival order, form (2, k)-sequences, which is
//! what ties the number of selected centers to the order complexity.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::dist;
use crate::online::OnlineRun;
use crate::point::Point;
use crate::tol::ge_snapped;

/// Sizes of the per-step sets and the resulting out-degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSets {
    /// 1-based arrival time.
    pub t: usize,
    pub p_size: usize,
    pub q_size: usize,
    pub out_degree: usize,
}

/// The analysis graph of a traced run. Vertices are 1-based arrival times;
/// an edge (j, i) means x_i was in P_j or Q_j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisGraph {
    pub n: usize,
    pub step_sets: Vec<StepSets>,
    pub edges: Vec<(usize, usize)>,
    /// Greedy independent set (1-based, ascending).
    pub independent_set: Vec<usize>,
}

/// Build the analysis graph from a run recorded with cluster snapshots.
pub fn build_analysis_graph(run: &OnlineRun, points: &[Point]) -> Result<AnalysisGraph> {
    let trace = run
        .trace
        .as_ref()
        .ok_or_else(|| Error::invalid("analysis graph needs a recorded trace"))?;
    let snapshots = run
        .step_clusters
        .as_ref()
        .ok_or_else(|| Error::invalid("analysis graph needs per-step cluster snapshots"))?;
    if trace.len() != points.len() || snapshots.len() != points.len() {
        return Err(Error::invalid("trace does not cover the dataset"));
    }

    let n = points.len();
    let mut step_sets = Vec::with_capacity(n);
    let mut edges = Vec::new();
    for (idx, record) in trace.iter().enumerate() {
        let t = idx + 1;
        let snap = &snapshots[idx];
        let v = record.v_t;

        let mut p_members: Vec<usize> = snap.members[..v].iter().flatten().copied().collect();
        p_members.sort_unstable();
        debug_assert_eq!(p_members.len(), record.s_t);

        let mut q_members = Vec::new();
        if record.r_t.is_finite() {
            let cutoff = record.r_t / 5.0;
            for (j, cluster) in snap.members.iter().enumerate().skip(v) {
                let center = &snap.centers[j];
                for &i in cluster {
                    if ge_snapped(dist(&points[i - 1], center)?, cutoff) {
                        q_members.push(i);
                    }
                }
            }
            q_members.sort_unstable();
        }

        step_sets.push(StepSets {
            t,
            p_size: p_members.len(),
            q_size: q_members.len(),
            out_degree: p_members.len() + q_members.len(),
        });
        // The newcomer's own membership in P_t carries no constraint;
        // only cross-time edges are materialized.
        for i in p_members.into_iter().chain(q_members) {
            if i != t {
                edges.push((t, i));
            }
        }
    }

    let zero_based: Vec<(usize, usize)> = edges.iter().map(|&(j, i)| (j - 1, i - 1)).collect();
    let mut independent_set: Vec<usize> = greedy_independent_set(n, &zero_based)
        .into_iter()
        .map(|v| v + 1)
        .collect();
    independent_set.sort_unstable();

    Ok(AnalysisGraph {
        n,
        step_sets,
        edges,
        independent_set,
    })
}

/// Greedy independent set of an undirected graph (edge orientation and
/// self-loops are ignored). Takes the best of a min-degree peeling pass and
/// 32 seeded random orders; the result is guaranteed to reach the
/// average-degree bound `ceil(n / (avg_degree + 1))`.
pub fn greedy_independent_set(num_vertices: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    if num_vertices == 0 {
        return Vec::new();
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); num_vertices];
    let mut edge_count = 0usize;
    for &(a, b) in edges {
        if a == b || a >= num_vertices || b >= num_vertices {
            continue;
        }
        if !adj[a].contains(&b) {
            adj[a].push(b);
            adj[b].push(a);
            edge_count += 1;
        }
    }

    let greedy_in_order = |order: &[usize]| -> Vec<usize> {
        let mut blocked = vec![false; num_vertices];
        let mut taken = vec![false; num_vertices];
        let mut set = Vec::new();
        for &v in order {
            if !blocked[v] {
                taken[v] = true;
                set.push(v);
                for &u in &adj[v] {
                    blocked[u] = true;
                }
                blocked[v] = true;
            }
        }
        set
    };

    // Min-degree peeling achieves the Turan bound deterministically.
    let mut best = {
        let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
        let mut removed = vec![false; num_vertices];
        let mut set = Vec::new();
        loop {
            let mut pick = None;
            for v in 0..num_vertices {
                if !removed[v] && pick.is_none_or(|p: usize| degree[v] < degree[p]) {
                    pick = Some(v);
                }
            }
            let Some(v) = pick else { break };
            set.push(v);
            removed[v] = true;
            for &u in &adj[v] {
                if !removed[u] {
                    removed[u] = true;
                    for &w in &adj[u] {
                        degree[w] = degree[w].saturating_sub(1);
                    }
                }
            }
        }
        set
    };

    for seed in 0..32u64 {
        let mut order: Vec<usize> = (0..num_vertices).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..order.len()).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        let cand = greedy_in_order(&order);
        if cand.len() > best.len() {
            best = cand;
        }
    }

    best.sort_unstable();
    debug_assert!({
        let avg = if num_vertices > 0 {
            2.0 * edge_count as f64 / num_vertices as f64
        } else {
            0.0
        };
        best.len() as f64 >= (num_vertices as f64 / (avg + 1.0)).ceil() - 1e-9
    });
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diameter::DiamMode;
    use crate::online::{run_online, OnlineConfig};
    use crate::point::Dataset;
    use crate::sequence::{verify_alpha_k_sequence, OC_ALPHA};
    use crate::solver::SolverSpec;

    #[test]
    fn edgeless_graph_keeps_everything() {
        assert_eq!(greedy_independent_set(4, &[]), vec![0, 1, 2, 3]);
    }

    #[test]
    fn complete_graph_keeps_one() {
        let mut edges = Vec::new();
        for a in 0..5 {
            for b in (a + 1)..5 {
                edges.push((a, b));
            }
        }
        assert_eq!(greedy_independent_set(5, &edges).len(), 1);
    }

    #[test]
    fn path_graph_meets_turan_bound() {
        let edges = [(0, 1), (1, 2), (2, 3), (3, 4)];
        let set = greedy_independent_set(5, &edges);
        assert!(set.len() >= 2);
        for (i, &a) in set.iter().enumerate() {
            for &b in &set[i + 1..] {
                assert!(!edges.contains(&(a, b)) && !edges.contains(&(b, a)));
            }
        }
    }

    #[test]
    fn self_loops_are_ignored_for_independence() {
        let edges = [(0, 0), (1, 1), (0, 1)];
        let set = greedy_independent_set(2, &edges);
        assert_eq!(set.len(), 1);
    }

    fn traced_run(values: &[f64], k: usize, seed: u64) -> (OnlineRun, Dataset) {
        let ds = Dataset::from_values(values).unwrap();
        let cfg = OnlineConfig::new(k, SolverSpec::exact_1d_dp(), seed).with_clusterings();
        let run = run_online(&ds, &cfg).unwrap();
        (run, ds)
    }

    #[test]
    fn single_point_graph_is_one_merged_vertex() {
        let (run, ds) = traced_run(&[7.0], 2, 1);
        let g = build_analysis_graph(&run, ds.points()).unwrap();
        assert_eq!(g.n, 1);
        assert_eq!(g.step_sets[0].p_size, 1);
        assert_eq!(g.step_sets[0].q_size, 0);
        assert_eq!(g.step_sets[0].out_degree, 1);
        // The newcomer's own membership in P_t is not an edge.
        assert!(g.edges.is_empty());
        assert_eq!(g.independent_set, vec![1]);
    }

    #[test]
    #[allow(clippy::int_plus_one)]
    fn out_degree_respects_mass_bound() {
        let values = [0.0, 0.3, 5.0, 5.2, 11.0, 0.1, 5.1, 24.0, 24.2, 0.2];
        let (run, ds) = traced_run(&values, 2, 3);
        let g = build_analysis_graph(&run, ds.points()).unwrap();
        let trace = run.trace.as_ref().unwrap();
        for (sets, rec) in g.step_sets.iter().zip(trace) {
            assert!(sets.out_degree <= 2 * rec.s_t - 1, "t={}", sets.t);
            assert_eq!(sets.p_size, rec.s_t);
        }
    }

    #[test]
    fn independent_set_reads_as_sequence() {
        let values = [0.0, 9.0, 0.2, 27.0, 9.1, 81.5, 0.1, 81.6];
        let (run, ds) = traced_run(&values, 2, 5);
        let g = build_analysis_graph(&run, ds.points()).unwrap();
        let order: Vec<usize> = g.independent_set.iter().map(|&t| t - 1).collect();
        let out =
            verify_alpha_k_sequence(ds.points(), &order, OC_ALPHA, 2, DiamMode::Exact).unwrap();
        assert!(out.is_accepted(), "independent set {order:?}");
    }

    #[test]
    fn missing_snapshots_is_an_error() {
        let ds = Dataset::from_values(&[1.0, 2.0]).unwrap();
        let cfg = OnlineConfig::new(2, SolverSpec::exact_1d_dp(), 0).with_trace();
        let run = run_online(&ds, &cfg).unwrap();
        assert!(build_analysis_graph(&run, ds.points()).is_err());
    }
}
