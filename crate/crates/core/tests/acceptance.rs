//! Acceptance suite. Each test checks one guarantee end to end at desk scale
//! and prints a PASS line (visible with `cargo test -- --nocapture`). All
//! randomness is seeded; the suite is deterministic.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nosub_core::datagen::{
    exponential_adversary, make_hard_sequence, sample_mixture, ComponentKind, ComponentSpec,
    MixtureSpec,
};
use nosub_core::diameter::DiamMode;
use nosub_core::experiment::{run_scaling, ScalingSpec, APPROX_CONSTANT, CENTERS_CONSTANT};
use nosub_core::graph::build_analysis_graph;
use nosub_core::metric::{cost_with_center, good_points, mean, one_means_cost, squared_dist};
use nosub_core::online::{compute_schedule, run_online, OnlineConfig};
use nosub_core::oracle::opt_kmeans_cost_oracle;
use nosub_core::point::{Dataset, Point};
use nosub_core::sequence::{
    conversion_length_bounds, extract_beta_subsequence, oc_exact, oc_greedy_lower,
    verify_alpha_k_sequence, OC_ALPHA,
};
use nosub_core::solver::{solve, SolverSpec};
use nosub_core::tol::le_snapped;

fn gaussian(loc: f64, scale: f64) -> ComponentSpec {
    ComponentSpec {
        kind: ComponentKind::Gaussian,
        location: Point::scalar(loc).unwrap(),
        scale,
    }
}

fn uniform(loc: f64, scale: f64) -> ComponentSpec {
    ComponentSpec {
        kind: ComponentKind::UniformBox,
        location: Point::scalar(loc).unwrap(),
        scale,
    }
}

fn exponential(loc: f64, scale: f64) -> ComponentSpec {
    ComponentSpec {
        kind: ComponentKind::Exponential,
        location: Point::scalar(loc).unwrap(),
        scale,
    }
}

#[test]
fn criterion_01_center_shifting_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    for _ in 0..1000 {
        let n = rng.random_range(1..=50);
        let d = rng.random_range(1..=5);
        let xs: Vec<Point> = (0..n)
            .map(|_| Point::new((0..d).map(|_| rng.random_range(-50.0..50.0)).collect()).unwrap())
            .collect();
        let c = Point::new((0..d).map(|_| rng.random_range(-80.0..80.0)).collect()).unwrap();
        let mu = mean(&xs).unwrap();
        let lhs = cost_with_center(&xs, &c).unwrap();
        let rhs = one_means_cost(&xs).unwrap() + n as f64 * squared_dist(&c, &mu).unwrap();
        let magnitude = lhs.abs().max(rhs.abs());
        assert!(
            (lhs - rhs).abs() <= 1e-9 * (1.0 + magnitude),
            "identity violated: {lhs} vs {rhs}"
        );
    }
    println!("PASS criterion 1: center-shifting identity on 1000 random instances");
}

#[test]
fn criterion_02_good_points_majority() {
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    for trial in 0..500 {
        let n = rng.random_range(1..=60);
        let d = rng.random_range(1..=3);
        let xs: Vec<Point> = (0..n)
            .map(|_| {
                // A quarter of the sets carry heavy outliers, another quarter
                // duplicate mass.
                let v: Vec<f64> = match trial % 4 {
                    0 => (0..d).map(|_| rng.random_range(-5.0..5.0)).collect(),
                    1 => {
                        let outlier = rng.random_range(0.0..1.0) < 0.15;
                        let spread = if outlier { 400.0 } else { 2.0 };
                        (0..d).map(|_| rng.random_range(-spread..spread)).collect()
                    }
                    2 => vec![rng.random_range(0..3) as f64; d],
                    _ => (0..d).map(|_| rng.random_range(-100.0..100.0)).collect(),
                };
                Point::new(v).unwrap()
            })
            .collect();
        let good = good_points(&xs).unwrap();
        assert!(
            good.len() as f64 > xs.len() as f64 / 2.0,
            "trial {trial}: {} of {} good",
            good.len(),
            xs.len()
        );
    }
    println!("PASS criterion 2: good points are a strict majority on 500 random sets");
}

#[test]
fn criterion_03_merged_cost_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    for dataset_idx in 0..100 {
        let k = 2 + dataset_idx % 2;
        let n = rng.random_range(50..=200);
        let comps = rng.random_range(1..=3);
        let values: Vec<f64> = (0..n)
            .map(|_| {
                let c = rng.random_range(0..comps) as f64;
                c * 25.0 + rng.random_range(-2.0..2.0)
            })
            .collect();
        let ds = Dataset::from_values(&values).unwrap();
        let cfg = OnlineConfig::new(k, SolverSpec::exact_1d_dp(), 0);
        let schedule = compute_schedule(ds.points(), &cfg).unwrap();
        for (idx, step) in schedule.steps().iter().enumerate() {
            let t = idx + 1;
            let lk = opt_kmeans_cost_oracle(&ds.points()[..t], k).unwrap();
            assert!(
                le_snapped(step.merged_cost, 101.0 * lk),
                "dataset {dataset_idx} step {t}: merged {} vs 101*opt {}",
                step.merged_cost,
                101.0 * lk
            );
        }
    }
    println!("PASS criterion 3: merged cost within 101x the prefix optimum on 100 runs");
}

#[test]
fn criterion_04_approximation_bound() {
    let datasets: Vec<(MixtureSpec, usize, u64)> = vec![
        (
            MixtureSpec::uniform_weights(vec![gaussian(0.0, 1.0), gaussian(8.0, 1.0)], 1, 0),
            2,
            101,
        ),
        (
            MixtureSpec {
                components: vec![gaussian(0.0, 1.0), gaussian(100.0, 1.0)],
                weights: vec![0.8, 0.2],
                dim: 1,
                seed: 0,
            },
            2,
            102,
        ),
        (
            MixtureSpec::uniform_weights(vec![gaussian(0.0, 1.0), uniform(30.0, 2.0)], 1, 0),
            2,
            103,
        ),
        (
            MixtureSpec::uniform_weights(
                vec![
                    gaussian(-30.0, 1.0),
                    gaussian(0.0, 1.0),
                    gaussian(30.0, 1.0),
                ],
                1,
                0,
            ),
            3,
            104,
        ),
        (
            MixtureSpec::uniform_weights(
                vec![
                    gaussian(0.0, 1.0),
                    exponential(200.0, 2.0),
                    uniform(220.0, 1.5),
                ],
                1,
                0,
            ),
            3,
            105,
        ),
    ];

    let trials = 200;
    for (idx, (mixture, k, seed)) in datasets.iter().enumerate() {
        let ds = sample_mixture(mixture, 500, *seed).unwrap();
        let cfg = OnlineConfig::new(*k, SolverSpec::exact_1d_dp(), 0);
        let schedule = compute_schedule(ds.points(), &cfg).unwrap();
        let opt = opt_kmeans_cost_oracle(ds.points(), *k).unwrap();
        let rhs = APPROX_CONSTANT * 1.0 * (*k as f64).powi(3) * opt;
        let mut successes = 0;
        for trial in 0..trials {
            let run = schedule.replay(ds.points(), 7000 + trial as u64).unwrap();
            if le_snapped(run.final_cost, rhs) {
                successes += 1;
            }
        }
        let rate = successes as f64 / trials as f64;
        assert!(
            rate >= 0.85,
            "dataset {idx}: success rate {rate} below 0.85 (rhs {rhs:.3e})"
        );
    }
    println!("PASS criterion 4: 1358*k^3 cost bound held in >= 85% of 200 trials on 5 datasets");
}

#[test]
fn criterion_05_center_count_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(1005);
    let trials = 100usize;

    let check = |points: &[Point], k: usize, oc_value: usize, label: &str| {
        let solver = if points[0].dim() == 1 {
            SolverSpec::exact_1d_dp()
        } else {
            SolverSpec::exact_enum()
        };
        let cfg = OnlineConfig::new(k, solver, 0);
        let schedule = compute_schedule(points, &cfg).unwrap();
        let mut total = 0usize;
        for trial in 0..trials {
            total += schedule
                .replay(points, 9000 + trial as u64)
                .unwrap()
                .centers
                .len();
        }
        let mean_centers = total as f64 / trials as f64;
        let n = points.len() as f64;
        let k_f = k as f64;
        let bound = CENTERS_CONSTANT * k_f * k_f.ln() * oc_value as f64 * (n.log2() + 1.0);
        assert!(
            mean_centers <= bound,
            "{label}: mean {mean_centers} above bound {bound}"
        );
        let expectation = schedule.expected_centers();
        let se = (schedule.centers_variance() / trials as f64).sqrt();
        assert!(
            (mean_centers - expectation).abs() <= 5.0 * se + 1e-12,
            "{label}: mean {mean_centers} vs sum p_t {expectation} (se {se})"
        );
    };

    for i in 0..20 {
        let k = 2 + i % 2;
        if i % 3 == 2 {
            // Two-dimensional small instances run the enumeration solver.
            let n = rng.random_range(8..=12);
            let xs: Vec<Point> = (0..n)
                .map(|_| {
                    let c = rng.random_range(0..2) as f64 * 10.0;
                    Point::new(vec![
                        c + rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    ])
                    .unwrap()
                })
                .collect();
            let oc = oc_exact(&xs, 2).unwrap();
            check(&xs, 2, oc.lower, &format!("2-D dataset {i}"));
        } else {
            let n = rng.random_range(8..=15);
            let values: Vec<f64> = (0..n)
                .map(|_| rng.random_range(0..3) as f64 * 12.0 + rng.random_range(-1.0..1.0))
                .collect();
            let xs: Vec<Point> = values.iter().map(|&v| Point::scalar(v).unwrap()).collect();
            let oc = oc_exact(&xs, k).unwrap();
            check(&xs, k, oc.lower, &format!("1-D dataset {i}"));
        }
    }

    // The adversarial series has the largest order complexity possible: n.
    let series = exponential_adversary(64, 2.0).unwrap();
    let greedy = oc_greedy_lower(series.points(), 2, 4, 1).unwrap();
    assert_eq!(greedy.lower, 64, "series order complexity must reach n");
    check(series.points(), 2, 64, "exponential series");

    println!("PASS criterion 5: expected-centers bound and sum form on 21 datasets x 100 trials");
}

#[test]
fn criterion_06_mixture_scaling() {
    let families: Vec<(&str, MixtureSpec)> = vec![
        (
            "gaussian",
            MixtureSpec::uniform_weights(vec![gaussian(0.0, 1.0), gaussian(20.0, 1.0)], 1, 0),
        ),
        (
            "uniform",
            MixtureSpec::uniform_weights(vec![uniform(0.0, 1.0), uniform(20.0, 1.0)], 1, 0),
        ),
    ];
    let n_grid = vec![64usize, 128, 256, 512, 1024];
    let seeds = 20usize;
    let k = 2usize;
    let k2 = (k * k) as f64;

    let mut total_rows = 0usize;
    let mut passing = 0usize;
    for (name, mixture) in families {
        let spec = ScalingSpec {
            mixture,
            k,
            n_grid: n_grid.clone(),
            seeds,
            base_seed: 600,
            greedy_restarts: 2,
        };
        let rows = run_scaling(&spec).unwrap();
        // Calibrate the additive constant on the smallest grid point.
        let c0 = rows
            .iter()
            .filter(|r| r.n == n_grid[0])
            .map(|r| {
                r.k2_log2_max_asp.expect("aspect defined") / k2 - 3.0 * (n_grid[0] as f64).log2()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        for row in &rows {
            total_rows += 1;
            let value = row.k2_log2_max_asp.expect("aspect defined");
            let budget = 2.0 * k2 * (3.0 * (row.n as f64).log2() + c0);
            if value <= budget {
                passing += 1;
            }
            // The greedy bracket stays valid along the way.
            assert!(row.oc_lower <= row.oc_upper, "{name} n={} bracket", row.n);
        }
    }
    let rate = passing as f64 / total_rows as f64;
    assert!(rate >= 0.95, "scaling bound held on {rate} of rows");
    println!(
        "PASS criterion 6: k^2 log2(asp) scaling bound held on {passing}/{total_rows} mixture rows"
    );
}

#[test]
fn criterion_07_adversarial_necessity() {
    // The guarantee of our own algorithm with an exact solver and k = 2.
    let alpha = APPROX_CONSTANT * 8.0;
    let n = 64usize;
    let (ds, cert) = make_hard_sequence(n, alpha, 2).unwrap();
    assert_eq!(cert.len(), n);

    let cfg = OnlineConfig::new(2, SolverSpec::exact_1d_dp(), 0);
    let schedule = compute_schedule(ds.points(), &cfg).unwrap();
    let trials = 100;
    let mut total = 0usize;
    for trial in 0..trials {
        total += schedule
            .replay(ds.points(), trial as u64)
            .unwrap()
            .centers
            .len();
    }
    let mean_fraction = total as f64 / (trials * n) as f64;
    assert!(
        mean_fraction >= 0.9,
        "selected fraction {mean_fraction} below 0.9"
    );
    println!(
        "PASS criterion 7: hard sequence forces {:.3} of points taken (>= 0.9)",
        mean_fraction
    );
}

#[test]
fn criterion_08_sequence_conversion() {
    let mut rng = ChaCha8Rng::seed_from_u64(1008);
    let mut tested = 0usize;
    while tested < 100 {
        let alpha = [2.0, 4.0][tested % 2];
        let k = 2 + (tested / 2) % 2;
        let n = rng.random_range(4..=64);
        // Random geometric growth with per-step ratio in [2.2a, 3a] keeps
        // every prefix strictly verifiable.
        let mut value = 1.0f64;
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            values.push(value);
            value *= alpha * rng.random_range(2.2..3.0);
        }
        let points: Vec<Point> = values.iter().map(|&v| Point::scalar(v).unwrap()).collect();
        let order: Vec<usize> = (0..n).collect();
        let cert = verify_alpha_k_sequence(&points, &order, alpha, k, DiamMode::Auto)
            .unwrap()
            .accepted()
            .expect("generated sequence must verify");

        for beta in [alpha, alpha * alpha, 8.0] {
            let out = extract_beta_subsequence(&points, &cert, beta).unwrap();
            let (bound, _) = conversion_length_bounds(n, k, alpha, beta);
            assert!(
                out.len() >= bound.max(1),
                "n={n} k={k} alpha={alpha} beta={beta}: len {} < bound {bound}",
                out.len()
            );
        }
        tested += 1;
    }
    println!(
        "PASS criterion 8: beta-subsequence extraction re-verified on 100 sequences x 3 betas"
    );
}

#[test]
#[allow(clippy::int_plus_one)]
fn criterion_09_analysis_graph_diagnostics() {
    let mut rng = ChaCha8Rng::seed_from_u64(1009);
    for run_idx in 0..50 {
        let two_d = run_idx % 3 == 2;
        let (points, k, solver) = if two_d {
            let n = rng.random_range(8..=12);
            let pts: Vec<Point> = (0..n)
                .map(|_| {
                    let c = rng.random_range(0..2) as f64 * 8.0;
                    Point::new(vec![
                        c + rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    ])
                    .unwrap()
                })
                .collect();
            (pts, 2usize, SolverSpec::exact_enum())
        } else {
            let n = rng.random_range(8..=15);
            let k = 2 + run_idx % 2;
            let pts: Vec<Point> = (0..n)
                .map(|_| {
                    let c = rng.random_range(0..3) as f64 * 15.0;
                    Point::scalar(c + rng.random_range(-1.0..1.0)).unwrap()
                })
                .collect();
            (pts, k, SolverSpec::exact_1d_dp())
        };
        let ds = Dataset::new(points, None, None).unwrap();
        let cfg = OnlineConfig::new(k, solver, run_idx as u64).with_clusterings();
        let run = run_online(&ds, &cfg).unwrap();
        let graph = build_analysis_graph(&run, ds.points()).unwrap();
        let trace = run.trace.as_ref().unwrap();

        // Out-degree bound from the merge maximality.
        for (sets, rec) in graph.step_sets.iter().zip(trace) {
            assert!(
                sets.out_degree <= 2 * rec.s_t - 1,
                "run {run_idx} t={}: degree {} vs 2s-1={}",
                sets.t,
                sets.out_degree,
                2 * rec.s_t - 1
            );
        }

        // Any independent set, read in arrival order, is a (2, k)-sequence.
        let order: Vec<usize> = graph.independent_set.iter().map(|&t| t - 1).collect();
        let outcome =
            verify_alpha_k_sequence(ds.points(), &order, OC_ALPHA, k, DiamMode::Exact).unwrap();
        assert!(
            outcome.is_accepted(),
            "run {run_idx}: independent set {order:?} is not a (2,{k})-sequence"
        );

        // Chained bound: (1 / (8 (log2 n + 1))) * sum 1/s_t <= OC.
        let harmonic: f64 = trace.iter().map(|r| 1.0 / r.s_t as f64).sum();
        let lhs = harmonic / (8.0 * ((ds.len() as f64).log2() + 1.0));
        let oc = oc_exact(ds.points(), k).unwrap();
        assert!(
            lhs <= oc.lower as f64 + 1e-9,
            "run {run_idx}: chained bound {lhs} vs OC {}",
            oc.lower
        );
    }
    println!("PASS criterion 9: analysis-graph diagnostics held on 50 traced runs");
}

#[test]
fn criterion_10_oracle_agreement() {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    for trial in 0..200 {
        let n = rng.random_range(2..=12);
        let k = rng.random_range(1..=4);
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
        let xs: Vec<Point> = values.iter().map(|&v| Point::scalar(v).unwrap()).collect();
        let dp = solve(&xs, k, &SolverSpec::exact_1d_dp()).unwrap();
        let en = solve(&xs, k, &SolverSpec::exact_enum()).unwrap();
        assert_eq!(
            dp.clustering.total_cost, en.clustering.total_cost,
            "trial {trial}: dp vs enum on {values:?} with k={k}"
        );
    }
    println!("PASS criterion 10: 1-D dynamic program equals enumeration exactly on 200 instances");
}
