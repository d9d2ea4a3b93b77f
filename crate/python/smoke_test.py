#!/usr/bin/env python3
"""Smoke test for the nosub_py extension module.

Builds are produced by cargo as lib<name>.so; this script stages the shared
object under the importable module name, imports it, and exercises the main
operations against hand-checked values.

Usage:
    cargo build -p nosub-py --release
    python3 python/smoke_test.py
"""

import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def stage_module() -> Path:
    candidates = [
        REPO / "target" / "release" / "libnosub_py.so",
        REPO / "target" / "debug" / "libnosub_py.so",
        REPO / "target" / "release" / "libnosub_py.dylib",
        REPO / "target" / "debug" / "libnosub_py.dylib",
    ]
    built = [p for p in candidates if p.exists()]
    if not built:
        sys.exit("no built extension found; run `cargo build -p nosub-py --release` first")
    newest = max(built, key=lambda p: p.stat().st_mtime)
    stage = Path(tempfile.mkdtemp(prefix="nosub_py_"))
    shutil.copy2(newest, stage / "nosub_py.so")
    return stage


def approx(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def main() -> None:
    sys.path.insert(0, str(stage_module()))
    import nosub_py as np

    # Geometric primitives.
    assert np.squared_dist([1.0, 2.0], [4.0, 6.0]) == 25.0
    assert np.cost_with_center([[0.0], [2.0]], [1.0]) == 2.0
    assert np.mean([[0.0, 0.0], [2.0, 0.0], [1.0, 3.0]]) == [1.0, 1.0]
    assert np.good_points([[0.0], [0.0], [0.0], [9.0]]) == [0, 1, 2]
    assert approx(np.aspect_ratio([[0.0], [1.0], [4.0]]), 4.0)

    # Exact solvers and the diameter partition.
    assert approx(np.opt_kmeans_cost([[0.0], [2.0], [10.0]], 2), 2.0)
    value, assignment, exact = np.min_max_diameter([[0.0], [1.0], [10.0]], 2, mode="exact")
    assert exact and approx(value, 1.0) and assignment == [0, 0, 1]
    offline = np.solve_offline([[0.0], [1.0], [9.0], [10.0]], 2, solver="exact-1d-dp")
    assert approx(offline["total_cost"], 1.0)

    refined = np.lloyd_refine([[0.0], [2.0], [10.0]], [[1.0], [10.0]], 10)
    assert approx(refined["total_cost"], 2.0)

    # Online run over the adversarial series: everything gets selected.
    series = np.exponential_adversary(12, 2.0)
    run = np.run_online(series, 2, solver="exact-1d-dp", seed=3, record_trace=True)
    assert run["centers"] == list(range(1, 13))
    assert run["final_cost"] == 0.0
    assert run["trace"][0]["p_t"] == 1.0 and run["trace"][0]["r_t"] is None

    # Order complexity: the series maxes it out.
    est = np.oc_exact(series, 2)
    assert est["lower"] == est["upper"] == 12 and est["exact"]
    greedy = np.oc_greedy(series, 2, restarts=4, seed=0)
    assert greedy["lower"] == 12
    assert np.oc_upper_aspect(series, 2) >= 12

    # Sequence machinery.
    order = list(range(12))
    check = np.verify_sequence(series, order, 2.0, 2, mode="exact")
    assert check["accepted"] and check["diam_exact"]
    sub = np.extract_subsequence(series, order, 2.0, 2, 8.0)
    assert len(sub) >= 2
    recheck = np.verify_sequence(series, sub, 8.0, 2, mode="exact")
    assert recheck["accepted"]

    assert approx(np.lower_bound_centers(1024, 2, 1024, 1.0), 115.2)

    # Generators and orderings.
    spec = {
        "components": [
            {"kind": "gaussian", "location": [0.0], "scale": 1.0},
            {"kind": "gaussian", "location": [25.0], "scale": 1.0},
        ],
        "weights": [0.5, 0.5],
        "dim": 1,
        "seed": 0,
    }
    points, labels = np.sample_mixture(json.dumps(spec), 64, 9)
    assert len(points) == 64 and len(labels) == 64 and set(labels) == {0, 1}

    hard, factor = np.make_hard_sequence(32, 16.0, 2)
    assert len(hard) == 32 and approx(factor, 0.5 * math.sqrt(32 * 16.0))

    shuffled, shuffled_labels = np.apply_ordering(points, labels, policy="reverse-sorted", seed=0)
    assert sorted(map(tuple, shuffled)) == sorted(map(tuple, points))
    assert len(shuffled_labels) == 64

    # CSV round trip.
    with tempfile.TemporaryDirectory() as tmp:
        path = str(Path(tmp) / "data.csv")
        np.write_dataset_csv(path, points, labels)
        back_points, back_labels = np.read_dataset_csv(path)
        assert back_points == points and back_labels == labels

    # Error mapping.
    try:
        np.aspect_ratio([[0.0], [0.0]])
    except ValueError:
        pass
    else:
        raise AssertionError("duplicate-only aspect ratio must raise ValueError")

    print("smoke test passed")


if __name__ == "__main__":
    main()
