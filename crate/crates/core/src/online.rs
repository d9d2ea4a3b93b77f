//! The online no-substitution selection engine.
//!
//! Each arriving point triggers an offline solve of the prefix, a maximal
//! merge of the clusters nearest the new point (bounded by a constant factor
//! of the offline cost), and one Bernoulli draw with probability inversely
//! proportional to the merged mass. Decisions are irrevocable and fully
//! traced.

use std::io::Write;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{cost_of_centers, dist, squared_dist};
use crate::point::{Dataset, Point};
use crate::solver::{solve, SolverSpec};
use crate::tol::le_snapped;

/// Merge-budget constant: clusters are merged while the merge overhead stays
/// within this multiple of the offline cost.
pub const DEFAULT_MERGE_BUDGET: f64 = 100.0;
/// Sampling-scale constant: a point is taken with probability
/// `min(1, scale * k * ln(k) / s_t)`.
pub const DEFAULT_SAMPLE_SCALE: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnlineConfig {
    pub k: usize,
    pub solver: SolverSpec,
    pub merge_budget: f64,
    pub sample_scale: f64,
    pub seed: u64,
    /// Keep per-step records in the run.
    pub record_trace: bool,
    /// Additionally keep per-step cluster snapshots (needed to build the
    /// analysis graph); heavier than the flat trace.
    #[serde(default)]
    pub record_clusterings: bool,
}

impl OnlineConfig {
    pub fn new(k: usize, solver: SolverSpec, seed: u64) -> Self {
        OnlineConfig {
            k,
            solver,
            merge_budget: DEFAULT_MERGE_BUDGET,
            sample_scale: DEFAULT_SAMPLE_SCALE,
            seed,
            record_trace: false,
            record_clusterings: false,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }

    pub fn with_clusterings(mut self) -> Self {
        self.record_trace = true;
        self.record_clusterings = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::invalid(
                "k must be >= 2: the sampling probability degenerates at k = 1",
            ));
        }
        if !self.merge_budget.is_finite() || self.merge_budget <= 0.0 {
            return Err(Error::invalid("merge_budget must be positive"));
        }
        if !self.sample_scale.is_finite() || self.sample_scale <= 0.0 {
            return Err(Error::invalid("sample_scale must be positive"));
        }
        self.solver.validate()
    }
}

fn serialize_maybe_inf<S: serde::Serializer>(
    v: &f64,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_some(v)
    } else {
        s.serialize_none()
    }
}

fn deserialize_maybe_inf<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

/// One step of the run. `t` is the 1-based arrival index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    /// Offline cost of the prefix clustering, centers at cluster means.
    pub offline_cost: f64,
    /// Merge index: clusters 1..=v_t (sorted by center distance to x_t) are
    /// treated as one mass.
    pub v_t: usize,
    /// Merged mass: total size of clusters 1..=v_t.
    pub s_t: usize,
    /// Selection probability, clamped to [0, 1].
    pub p_t: f64,
    pub selected: bool,
    /// Distance from x_t to the nearest unmerged center; +inf when every
    /// cluster was merged (serialized as null in JSON).
    #[serde(
        serialize_with = "serialize_maybe_inf",
        deserialize_with = "deserialize_maybe_inf"
    )]
    pub r_t: f64,
    /// Prefix cost after replacing the merged clusters' centers with the
    /// single center c_{v_t}.
    pub merged_cost: f64,
}

/// Per-step cluster snapshot, sorted by center distance to the arriving
/// point. Member lists hold 1-based arrival indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepClusters {
    pub members: Vec<Vec<usize>>,
    pub centers: Vec<Point>,
}

/// A completed online run. `centers` holds the 1-based arrival indices of
/// the points irrevocably taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnlineRun {
    pub centers: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<Vec<StepRecord>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub step_clusters: Option<Vec<StepClusters>>,
    /// Cost of assigning every point of the dataset to its nearest selected
    /// center.
    pub final_cost: f64,
    pub config: OnlineConfig,
}

/// Largest i (1-based) such that replacing the centers of clusters 1..=i by
/// c_i costs at most `merge_budget * offline_cost`. Clusters must already be
/// sorted by center distance to the arriving point. Always >= 1: at i = 1
/// the replacement sum is zero.
pub fn merge_index(
    sizes: &[usize],
    centers: &[Point],
    offline_cost: f64,
    merge_budget: f64,
) -> Result<usize> {
    let ell = sizes.len();
    if ell == 0 || centers.len() != ell {
        return Err(Error::invalid(
            "merge_index needs matching nonempty clusters",
        ));
    }
    let budget = merge_budget * offline_cost;
    for i in (1..=ell).rev() {
        let target = &centers[i - 1];
        let mut sum = 0.0;
        for j in 0..i {
            sum += sizes[j] as f64 * squared_dist(&centers[j], target)?;
        }
        if le_snapped(sum, budget) {
            return Ok(i);
        }
    }
    unreachable!("i = 1 always satisfies the merge inequality");
}

/// Cost of the prefix under the merged clustering: points in clusters
/// 1..=v is assigned to c_v, every other cluster keeps its own center.
/// Members are 0-based positions into `prefix`.
pub fn merged_cost(
    prefix: &[Point],
    members: &[Vec<usize>],
    centers: &[Point],
    v: usize,
) -> Result<f64> {
    if v == 0 || v > centers.len() {
        return Err(Error::invalid("merge index out of range"));
    }
    let mut total = 0.0;
    for (j, cluster) in members.iter().enumerate() {
        let target = if j < v { &centers[v - 1] } else { &centers[j] };
        for &m in cluster {
            total += squared_dist(&prefix[m], target)?;
        }
    }
    Ok(total)
}

/// The deterministic quantities of one step (everything except the coin).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub offline_cost: f64,
    pub v_t: usize,
    pub s_t: usize,
    pub p_t: f64,
    #[serde(
        serialize_with = "serialize_maybe_inf",
        deserialize_with = "deserialize_maybe_inf"
    )]
    pub r_t: f64,
    pub merged_cost: f64,
}

/// The deterministic part of a run: per-step outcomes given the prefix
/// clusterings. Only the Bernoulli draws vary across seeds, so one schedule
/// can be replayed under many seeds.
#[derive(Debug, Clone)]
pub struct Schedule {
    config: OnlineConfig,
    steps: Vec<StepOutcome>,
    clusters: Option<Vec<StepClusters>>,
}

/// Run the offline solver on the prefix ending at `x_t` and evaluate the
/// merge and sampling quantities of that step.
fn compute_step(prefix: &[Point], config: &OnlineConfig) -> Result<(StepOutcome, StepClusters)> {
    let t = prefix.len();
    let x_t = &prefix[t - 1];
    let offline = solve(prefix, config.k, &config.solver)?;
    let clustering = offline.clustering;
    let ell = clustering.num_clusters();

    // Sort clusters by center distance to x_t, ties to the lower index.
    let mut order: Vec<usize> = (0..ell).collect();
    let dists: Vec<f64> = clustering
        .centers
        .iter()
        .map(|c| squared_dist(c, x_t).unwrap())
        .collect();
    order.sort_by(|&a, &b| dists[a].partial_cmp(&dists[b]).unwrap().then(a.cmp(&b)));

    let raw_members = clustering.members();
    let members: Vec<Vec<usize>> = order.iter().map(|&c| raw_members[c].clone()).collect();
    let centers: Vec<Point> = order
        .iter()
        .map(|&c| clustering.centers[c].clone())
        .collect();
    let sizes: Vec<usize> = members.iter().map(|m| m.len()).collect();

    let v_t = merge_index(&sizes, &centers, clustering.total_cost, config.merge_budget)?;
    let s_t: usize = sizes[..v_t].iter().sum();
    let k = config.k as f64;
    let p_t = (config.sample_scale * k * k.ln() / s_t as f64).min(1.0);
    let r_t = if v_t < ell {
        dist(x_t, &centers[v_t])?
    } else {
        f64::INFINITY
    };
    let merged = merged_cost(prefix, &members, &centers, v_t)?;

    let snapshot = StepClusters {
        members: members
            .iter()
            .map(|m| m.iter().map(|&i| i + 1).collect())
            .collect(),
        centers,
    };
    Ok((
        StepOutcome {
            offline_cost: clustering.total_cost,
            v_t,
            s_t,
            p_t,
            r_t,
            merged_cost: merged,
        },
        snapshot,
    ))
}

/// Evaluate the deterministic step quantities for every prefix of `points`.
pub fn compute_schedule(points: &[Point], config: &OnlineConfig) -> Result<Schedule> {
    config.validate()?;
    if points.is_empty() {
        return Err(Error::invalid("online run needs at least one point"));
    }
    let mut steps = Vec::with_capacity(points.len());
    let mut clusters = config.record_clusterings.then(Vec::new);
    for t in 1..=points.len() {
        let (outcome, snapshot) = compute_step(&points[..t], config)?;
        steps.push(outcome);
        if let Some(cs) = clusters.as_mut() {
            cs.push(snapshot);
        }
    }
    Ok(Schedule {
        config: config.clone(),
        steps,
        clusters,
    })
}

impl Schedule {
    pub fn steps(&self) -> &[StepOutcome] {
        &self.steps
    }

    /// Exact expected number of centers: the sum of the per-step selection
    /// probabilities.
    pub fn expected_centers(&self) -> f64 {
        self.steps.iter().map(|s| s.p_t).sum()
    }

    /// Variance of the center count (independent Bernoulli steps).
    pub fn centers_variance(&self) -> f64 {
        self.steps.iter().map(|s| s.p_t * (1.0 - s.p_t)).sum()
    }

    /// Draw the per-step coins with the given seed and assemble the run.
    pub fn replay(&self, points: &[Point], seed: u64) -> Result<OnlineRun> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut selected_idx = Vec::new();
        let mut trace = self.config.record_trace.then(Vec::new);
        for (i, step) in self.steps.iter().enumerate() {
            let u: f64 = rng.random();
            let selected = u < step.p_t;
            if selected {
                selected_idx.push(i + 1);
            }
            if let Some(tr) = trace.as_mut() {
                tr.push(StepRecord {
                    t: i + 1,
                    offline_cost: step.offline_cost,
                    v_t: step.v_t,
                    s_t: step.s_t,
                    p_t: step.p_t,
                    selected,
                    r_t: step.r_t,
                    merged_cost: step.merged_cost,
                });
            }
        }
        if selected_idx.is_empty() {
            return Err(Error::invalid(
                "no centers selected; p_1 = 1 makes this unreachable for valid configs",
            ));
        }
        let center_points: Vec<Point> = selected_idx
            .iter()
            .map(|&t| points[t - 1].clone())
            .collect();
        let final_cost = cost_of_centers(points, &center_points)?;
        let mut config = self.config.clone();
        config.seed = seed;
        Ok(OnlineRun {
            centers: selected_idx,
            trace,
            step_clusters: self.clusters.clone(),
            final_cost,
            config,
        })
    }
}

/// Run the online algorithm over the dataset's arrival order.
pub fn run_online(dataset: &Dataset, config: &OnlineConfig) -> Result<OnlineRun> {
    let schedule = compute_schedule(dataset.points(), config)?;
    schedule.replay(dataset.points(), config.seed)
}

/// Incremental runner: feed points as they arrive and get each irrevocable
/// decision back immediately. Equivalent, coin for coin, to [`run_online`]
/// over the same arrival order.
pub struct OnlineState {
    config: OnlineConfig,
    points: Vec<Point>,
    rng: ChaCha8Rng,
    records: Vec<StepRecord>,
    snapshots: Option<Vec<StepClusters>>,
    selected: Vec<usize>,
}

impl OnlineState {
    pub fn new(config: OnlineConfig) -> Result<Self> {
        config.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        let snapshots = config.record_clusterings.then(Vec::new);
        Ok(OnlineState {
            config,
            points: Vec::new(),
            rng,
            records: Vec::new(),
            snapshots,
            selected: Vec::new(),
        })
    }

    /// Observe the next arrival and decide whether to take it as a center.
    pub fn step(&mut self, x: Point) -> Result<StepRecord> {
        self.points.push(x);
        let (outcome, snapshot) = compute_step(&self.points, &self.config)?;
        let u: f64 = self.rng.random();
        let selected = u < outcome.p_t;
        let t = self.points.len();
        if selected {
            self.selected.push(t);
        }
        if let Some(snaps) = self.snapshots.as_mut() {
            snaps.push(snapshot);
        }
        let record = StepRecord {
            t,
            offline_cost: outcome.offline_cost,
            v_t: outcome.v_t,
            s_t: outcome.s_t,
            p_t: outcome.p_t,
            selected,
            r_t: outcome.r_t,
            merged_cost: outcome.merged_cost,
        };
        self.records.push(record.clone());
        Ok(record)
    }

    /// Arrival indices (1-based) taken so far.
    pub fn centers(&self) -> &[usize] {
        &self.selected
    }

    /// Close the stream and assemble the run record.
    pub fn finish(self) -> Result<OnlineRun> {
        if self.selected.is_empty() {
            return Err(Error::invalid(
                "no centers selected; p_1 = 1 makes this unreachable for valid configs",
            ));
        }
        let center_points: Vec<Point> = self
            .selected
            .iter()
            .map(|&t| self.points[t - 1].clone())
            .collect();
        let final_cost = cost_of_centers(&self.points, &center_points)?;
        Ok(OnlineRun {
            centers: self.selected,
            trace: self.config.record_trace.then_some(self.records),
            step_clusters: self.snapshots,
            final_cost,
            config: self.config,
        })
    }
}

/// Write a trace as CSV with columns
/// `t,offline_cost,v_t,s_t,p_t,selected,r_t,merged_cost`.
pub fn trace_to_csv<W: Write>(trace: &[StepRecord], mut w: W) -> Result<()> {
    writeln!(w, "t,offline_cost,v_t,s_t,p_t,selected,r_t,merged_cost")?;
    for r in trace {
        let r_t = if r.r_t.is_finite() {
            format!("{}", r.r_t)
        } else {
            "inf".to_string()
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.t, r.offline_cost, r.v_t, r.s_t, r.p_t, r.selected, r_t, r.merged_cost
        )?;
    }
    Ok(())
}
