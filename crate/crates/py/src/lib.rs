//! Python bindings for the online no-substitution clustering toolkit.
//!
//! Points cross the boundary as plain lists of floats; structured results
//! come back as dicts. Everything is seeded and deterministic, matching the
//! Rust API.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use nosub_core::datagen;
use nosub_core::diameter::{self, DiamMode};
use nosub_core::error::Error;
use nosub_core::metric;
use nosub_core::online::{self, OnlineConfig};
use nosub_core::oracle;
use nosub_core::point::{Dataset, Point};
use nosub_core::sequence::{self, OcEstimate, OcMethod, VerifyOutcome};
use nosub_core::solver::{self, SolverKind, SolverSpec};

type LabeledPoints = (Vec<Vec<f64>>, Option<Vec<usize>>);

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::UnsupportedInstance(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_points(raw: Vec<Vec<f64>>) -> PyResult<Vec<Point>> {
    raw.into_iter()
        .map(|coords| Point::new(coords).map_err(to_py_err))
        .collect()
}

fn from_points(points: &[Point]) -> Vec<Vec<f64>> {
    points.iter().map(|p| p.coords().to_vec()).collect()
}

fn parse_diam_mode(mode: &str) -> PyResult<DiamMode> {
    match mode {
        "exact" => Ok(DiamMode::Exact),
        "approx" => Ok(DiamMode::Approx),
        "auto" => Ok(DiamMode::Auto),
        other => Err(PyValueError::new_err(format!(
            "unknown diameter mode {other:?}; use exact, approx, or auto"
        ))),
    }
}

fn build_solver_spec(
    solver: &str,
    k: usize,
    seed: u64,
    restarts: usize,
    lloyd_max_iters: usize,
) -> PyResult<SolverSpec> {
    let mut spec = match solver {
        "exact-enum" => SolverSpec::exact_enum(),
        "exact-1d-dp" => SolverSpec::exact_1d_dp(),
        "kmeanspp" => SolverSpec::kmeanspp(k, seed),
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown solver {other:?}; use exact-enum, exact-1d-dp, or kmeanspp"
            )))
        }
    };
    if spec.kind == SolverKind::KmeansppLloyd {
        spec.restarts = restarts;
        spec.lloyd_max_iters = lloyd_max_iters;
    }
    Ok(spec)
}

fn clustering_dict<'py>(
    py: Python<'py>,
    clustering: &metric::Clustering,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("assignment", clustering.assignment.clone())?;
    d.set_item("centers", from_points(&clustering.centers))?;
    d.set_item("per_cluster_cost", clustering.per_cluster_cost.clone())?;
    d.set_item("total_cost", clustering.total_cost)?;
    Ok(d)
}

fn oc_dict<'py>(py: Python<'py>, est: &OcEstimate) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("lower", est.lower)?;
    d.set_item("upper", est.upper)?;
    d.set_item("exact", est.exact)?;
    let method = match est.method {
        OcMethod::Exhaustive => "exhaustive",
        OcMethod::GreedyRestart => "greedy-restart",
        OcMethod::AspectBound => "aspect-bound",
    };
    d.set_item("method", method)?;
    d.set_item("witness", est.witness.as_ref().map(|w| w.indices.clone()))?;
    Ok(d)
}

/// Squared Euclidean distance between two points.
#[pyfunction]
fn squared_dist(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    let a = Point::new(a).map_err(to_py_err)?;
    let b = Point::new(b).map_err(to_py_err)?;
    metric::squared_dist(&a, &b).map_err(to_py_err)
}

/// Sum of squared distances from every point to the center.
#[pyfunction]
fn cost_with_center(points: Vec<Vec<f64>>, center: Vec<f64>) -> PyResult<f64> {
    let points = to_points(points)?;
    let center = Point::new(center).map_err(to_py_err)?;
    metric::cost_with_center(&points, &center).map_err(to_py_err)
}

/// Coordinate-wise mean.
#[pyfunction]
fn mean(points: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    let points = to_points(points)?;
    Ok(metric::mean(&points).map_err(to_py_err)?.coords().to_vec())
}

/// Indices whose single-center cost is within 3x the optimal 1-means cost.
#[pyfunction]
fn good_points(points: Vec<Vec<f64>>) -> PyResult<Vec<usize>> {
    metric::good_points(&to_points(points)?).map_err(to_py_err)
}

/// Max pairwise distance over min pairwise distance.
#[pyfunction]
fn aspect_ratio(points: Vec<Vec<f64>>) -> PyResult<f64> {
    metric::aspect_ratio(&to_points(points)?).map_err(to_py_err)
}

/// Exact optimal k-means cost (1-D dynamic program or exhaustive search).
#[pyfunction]
fn opt_kmeans_cost(points: Vec<Vec<f64>>, k: usize) -> PyResult<f64> {
    oracle::opt_kmeans_cost_oracle(&to_points(points)?, k).map_err(to_py_err)
}

/// Partition into at most `ell` groups minimizing the largest intra-group
/// diameter. Returns (value, assignment, exact).
#[pyfunction]
#[pyo3(signature = (points, ell, mode = "auto"))]
fn min_max_diameter(
    points: Vec<Vec<f64>>,
    ell: usize,
    mode: &str,
) -> PyResult<(f64, Vec<usize>, bool)> {
    let part =
        diameter::min_max_diameter_partition(&to_points(points)?, ell, parse_diam_mode(mode)?)
            .map_err(to_py_err)?;
    Ok((part.value, part.assignment, part.exact))
}

/// Offline k-clustering with the named solver.
#[pyfunction]
#[pyo3(signature = (points, k, solver = "exact-enum", seed = 0, restarts = 3, lloyd_max_iters = 50))]
fn solve_offline<'py>(
    py: Python<'py>,
    points: Vec<Vec<f64>>,
    k: usize,
    solver: &str,
    seed: u64,
    restarts: usize,
    lloyd_max_iters: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let points = to_points(points)?;
    let spec = build_solver_spec(solver, k, seed, restarts, lloyd_max_iters)?;
    let result = solver::solve(&points, k, &spec).map_err(to_py_err)?;
    let d = clustering_dict(py, &result.clustering)?;
    d.set_item("exact", result.exact)?;
    Ok(d)
}

/// D^2-weighted seeding.
#[pyfunction]
fn kmeanspp_seed(points: Vec<Vec<f64>>, k: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    let centers = solver::kmeanspp_seed(&to_points(points)?, k, seed).map_err(to_py_err)?;
    Ok(from_points(&centers))
}

/// Lloyd iterations from the given centers.
#[pyfunction]
fn lloyd_refine<'py>(
    py: Python<'py>,
    points: Vec<Vec<f64>>,
    centers: Vec<Vec<f64>>,
    max_iters: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let points = to_points(points)?;
    let centers = to_points(centers)?;
    let clustering = solver::lloyd_refine(&points, centers, max_iters).map_err(to_py_err)?;
    clustering_dict(py, &clustering)
}

/// Run the online no-substitution algorithm over the arrival order.
/// Returns a dict with the 1-based selected indices, the final cost, and
/// optionally the per-step trace.
#[pyfunction]
#[pyo3(signature = (points, k, solver = "exact-1d-dp", seed = 0, merge_budget = 100.0,
                    sample_scale = 20.0, record_trace = false, restarts = 3,
                    lloyd_max_iters = 50))]
#[allow(clippy::too_many_arguments)]
fn run_online<'py>(
    py: Python<'py>,
    points: Vec<Vec<f64>>,
    k: usize,
    solver: &str,
    seed: u64,
    merge_budget: f64,
    sample_scale: f64,
    record_trace: bool,
    restarts: usize,
    lloyd_max_iters: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let points = to_points(points)?;
    let dataset = Dataset::new(points, None, None).map_err(to_py_err)?;
    let mut config = OnlineConfig::new(
        k,
        build_solver_spec(solver, k, seed, restarts, lloyd_max_iters)?,
        seed,
    );
    config.merge_budget = merge_budget;
    config.sample_scale = sample_scale;
    config.record_trace = record_trace;
    let run = online::run_online(&dataset, &config).map_err(to_py_err)?;

    let d = PyDict::new(py);
    d.set_item("centers", run.centers.clone())?;
    d.set_item("final_cost", run.final_cost)?;
    match &run.trace {
        Some(trace) => {
            let rows: Vec<Bound<'py, PyDict>> = trace
                .iter()
                .map(|r| {
                    let row = PyDict::new(py);
                    row.set_item("t", r.t)?;
                    row.set_item("offline_cost", r.offline_cost)?;
                    row.set_item("v_t", r.v_t)?;
                    row.set_item("s_t", r.s_t)?;
                    row.set_item("p_t", r.p_t)?;
                    row.set_item("selected", r.selected)?;
                    row.set_item("r_t", r.r_t.is_finite().then_some(r.r_t))?;
                    row.set_item("merged_cost", r.merged_cost)?;
                    Ok(row)
                })
                .collect::<PyResult<_>>()?;
            d.set_item("trace", rows)?;
        }
        None => d.set_item("trace", py.None())?,
    }
    Ok(d)
}

/// Check whether `order` (0-based indices) forms an (alpha, k)-sequence.
#[pyfunction]
#[pyo3(signature = (points, order, alpha, k, mode = "auto"))]
fn verify_sequence<'py>(
    py: Python<'py>,
    points: Vec<Vec<f64>>,
    order: Vec<usize>,
    alpha: f64,
    k: usize,
    mode: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let points = to_points(points)?;
    let outcome =
        sequence::verify_alpha_k_sequence(&points, &order, alpha, k, parse_diam_mode(mode)?)
            .map_err(to_py_err)?;
    let d = PyDict::new(py);
    match outcome {
        VerifyOutcome::Accepted(cert) => {
            d.set_item("accepted", true)?;
            let margins: Vec<Option<f64>> = cert
                .margins
                .iter()
                .map(|&m| m.is_finite().then_some(m))
                .collect();
            d.set_item("margins", margins)?;
            d.set_item("diam_exact", cert.diam_exact)?;
        }
        VerifyOutcome::Rejected(rej) => {
            d.set_item("accepted", false)?;
            d.set_item("position", rej.position)?;
            d.set_item("min_dist", rej.min_dist)?;
            d.set_item("threshold", rej.threshold)?;
            d.set_item("definitive", rej.definitive)?;
        }
    }
    Ok(d)
}

/// Exact order complexity (n <= 15).
#[pyfunction]
fn oc_exact<'py>(py: Python<'py>, points: Vec<Vec<f64>>, k: usize) -> PyResult<Bound<'py, PyDict>> {
    let est = sequence::oc_exact(&to_points(points)?, k).map_err(to_py_err)?;
    oc_dict(py, &est)
}

/// Greedy lower bracket with an aspect-ratio upper bound.
#[pyfunction]
#[pyo3(signature = (points, k, restarts = 8, seed = 0))]
fn oc_greedy<'py>(
    py: Python<'py>,
    points: Vec<Vec<f64>>,
    k: usize,
    restarts: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let est =
        sequence::oc_greedy_lower(&to_points(points)?, k, restarts, seed).map_err(to_py_err)?;
    oc_dict(py, &est)
}

/// Aspect-ratio upper bound on the order complexity.
#[pyfunction]
fn oc_upper_aspect(points: Vec<Vec<f64>>, k: usize) -> PyResult<usize> {
    sequence::oc_upper_bound_aspect(&to_points(points)?, k).map_err(to_py_err)
}

/// Convert a verified (alpha, k)-sequence into a (beta, k)-sequence.
/// Returns the extracted 0-based indices.
#[pyfunction]
fn extract_subsequence(
    points: Vec<Vec<f64>>,
    order: Vec<usize>,
    alpha: f64,
    k: usize,
    beta: f64,
) -> PyResult<Vec<usize>> {
    let points = to_points(points)?;
    let cert = sequence::verify_alpha_k_sequence(&points, &order, alpha, k, DiamMode::Auto)
        .map_err(to_py_err)?
        .accepted()
        .ok_or_else(|| PyValueError::new_err("order is not an (alpha, k)-sequence"))?;
    let out = sequence::extract_beta_subsequence(&points, &cert, beta).map_err(to_py_err)?;
    Ok(out.indices)
}

/// Minimum expected centers any alpha-approximation must take.
#[pyfunction]
fn lower_bound_centers(oc: usize, k: usize, n: usize, alpha: f64) -> PyResult<f64> {
    sequence::lower_bound_centers(oc, k, n, alpha).map_err(to_py_err)
}

/// Draw n labeled points from a mixture spec (JSON, same schema as the CLI).
#[pyfunction]
fn sample_mixture(spec_json: &str, n: usize, seed: u64) -> PyResult<(Vec<Vec<f64>>, Vec<usize>)> {
    let spec: datagen::MixtureSpec =
        serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let ds = datagen::sample_mixture(&spec, n, seed).map_err(to_py_err)?;
    let labels = ds.labels().map(<[usize]>::to_vec).unwrap_or_default();
    Ok((from_points(ds.points()), labels))
}

/// The adversarial series (2*alpha)^t for t = 1..=n.
#[pyfunction]
fn exponential_adversary(n: usize, alpha: f64) -> PyResult<Vec<Vec<f64>>> {
    let ds = datagen::exponential_adversary(n, alpha).map_err(to_py_err)?;
    Ok(from_points(ds.points()))
}

/// Certified hard sequence; returns (points, factor).
#[pyfunction]
fn make_hard_sequence(n: usize, alpha: f64, k: usize) -> PyResult<(Vec<Vec<f64>>, f64)> {
    let (ds, cert) = datagen::make_hard_sequence(n, alpha, k).map_err(to_py_err)?;
    Ok((from_points(ds.points()), cert.alpha))
}

/// Permute arrival order; labels (optional) move with their points.
#[pyfunction]
#[pyo3(signature = (points, labels = None, policy = "uniform-random-permutation", seed = 0))]
fn apply_ordering(
    points: Vec<Vec<f64>>,
    labels: Option<Vec<usize>>,
    policy: &str,
    seed: u64,
) -> PyResult<LabeledPoints> {
    let policy = match policy {
        "as-generated" => datagen::OrderingPolicy::AsGenerated,
        "uniform-random-permutation" => datagen::OrderingPolicy::UniformRandomPermutation,
        "sorted-by-norm" => datagen::OrderingPolicy::SortedByNorm,
        "reverse-sorted" => datagen::OrderingPolicy::ReverseSorted,
        "interleave-components" => datagen::OrderingPolicy::InterleaveComponents,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown ordering policy {other:?}"
            )))
        }
    };
    let ds = Dataset::new(to_points(points)?, labels, None).map_err(to_py_err)?;
    let out =
        datagen::apply_ordering(&ds, &datagen::OrderingSpec { policy, seed }).map_err(to_py_err)?;
    let labels = out.labels().map(<[usize]>::to_vec);
    Ok((from_points(out.points()), labels))
}

/// Read the dataset CSV format; returns (points, labels or None).
#[pyfunction]
fn read_dataset_csv(path: &str) -> PyResult<LabeledPoints> {
    let ds = Dataset::read_csv_path(path).map_err(to_py_err)?;
    let labels = ds.labels().map(<[usize]>::to_vec);
    Ok((from_points(ds.points()), labels))
}

/// Write points (optionally labeled) in the dataset CSV format.
#[pyfunction]
#[pyo3(signature = (path, points, labels = None))]
fn write_dataset_csv(
    path: &str,
    points: Vec<Vec<f64>>,
    labels: Option<Vec<usize>>,
) -> PyResult<()> {
    let ds = Dataset::new(to_points(points)?, labels, None).map_err(to_py_err)?;
    ds.write_csv_path(path).map_err(to_py_err)
}

#[pymodule]
fn nosub_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(squared_dist, m)?)?;
    m.add_function(wrap_pyfunction!(cost_with_center, m)?)?;
    m.add_function(wrap_pyfunction!(mean, m)?)?;
    m.add_function(wrap_pyfunction!(good_points, m)?)?;
    m.add_function(wrap_pyfunction!(aspect_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(opt_kmeans_cost, m)?)?;
    m.add_function(wrap_pyfunction!(min_max_diameter, m)?)?;
    m.add_function(wrap_pyfunction!(solve_offline, m)?)?;
    m.add_function(wrap_pyfunction!(kmeanspp_seed, m)?)?;
    m.add_function(wrap_pyfunction!(lloyd_refine, m)?)?;
    m.add_function(wrap_pyfunction!(run_online, m)?)?;
    m.add_function(wrap_pyfunction!(verify_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(oc_exact, m)?)?;
    m.add_function(wrap_pyfunction!(oc_greedy, m)?)?;
    m.add_function(wrap_pyfunction!(oc_upper_aspect, m)?)?;
    m.add_function(wrap_pyfunction!(extract_subsequence, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bound_centers, m)?)?;
    m.add_function(wrap_pyfunction!(sample_mixture, m)?)?;
    m.add_function(wrap_pyfunction!(exponential_adversary, m)?)?;
    m.add_function(wrap_pyfunction!(make_hard_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(apply_ordering, m)?)?;
    m.add_function(wrap_pyfunction!(read_dataset_csv, m)?)?;
    m.add_function(wrap_pyfunction!(write_dataset_csv, m)?)?;
    Ok(())
}
