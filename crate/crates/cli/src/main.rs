//! Command-line front end: dataset generation, seeded online-clustering
//! experiments, order-complexity brackets, lower-bound evaluation, scaling
//! sweeps, and a quick selftest.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use nosub_core::datagen::{apply_ordering, OrderingSpec};
use nosub_core::error::Error;
use nosub_core::experiment::{
    load_dataset, run_experiment, run_scaling, scaling_csv, CheckKind, DatasetSource,
    ExperimentSpec, OutputSpec, ScalingSpec,
};
use nosub_core::metric::{cost_with_center, good_points, mean, one_means_cost, squared_dist};
use nosub_core::online::{run_online, trace_to_csv, OnlineConfig};
use nosub_core::oracle::opt_kmeans_cost_oracle;
use nosub_core::point::{Dataset, Point};
use nosub_core::sequence::{
    lower_bound_centers, oc_exact, oc_greedy_lower, oc_upper_bound_aspect, OcEstimate, OcMethod,
    OC_EXACT_MAX_N,
};
use nosub_core::solver::{solve, SolverSpec};

const TRACE_COLUMNS: &str = "t,offline_cost,v_t,s_t,p_t,selected,r_t,merged_cost";
const ROWS_COLUMNS: &str = "trial,seed,centers_taken,final_cost,oracle_cost,cost_ratio,runtime_ms";
const SCALING_COLUMNS: &str =
    "n,seed_index,seed,max_component_asp,k2_log2_max_asp,oc_lower,oc_upper,centers_taken";

#[derive(Parser)]
#[command(
    name = "nosub",
    version,
    about = "Online no-substitution k-means for arbitrary arrival order",
    long_about = None,
    after_help = format!(
        "Environment:\n  NOSUB_THREADS  caps the trial worker pool\n\n\
         Exit codes:\n  0 success, 2 invalid input, 3 unsupported instance, 4 check failure\n\n\
         CSV columns:\n  dataset: x0,x1,...[,label]\n  trace:   {TRACE_COLUMNS}\n  \
         rows:    {ROWS_COLUMNS}\n  scaling: {SCALING_COLUMNS}"
    )
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    /// Exhaustive exact search (n <= 12).
    ExactEnum,
    /// Exact 1-D dynamic programming (n <= 5000).
    #[value(name = "exact-1d-dp")]
    Exact1dDp,
    /// k-means++ seeding with Lloyd refinement.
    Kmeanspp,
}

impl SolverArg {
    fn to_spec(self, k: usize, seed: u64) -> SolverSpec {
        match self {
            SolverArg::ExactEnum => SolverSpec::exact_enum(),
            SolverArg::Exact1dDp => SolverSpec::exact_1d_dp(),
            SolverArg::Kmeanspp => SolverSpec::kmeanspp(k, seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckArg {
    ApproxBound,
    CentersBound,
    SumForm,
}

impl From<CheckArg> for CheckKind {
    fn from(value: CheckArg) -> Self {
        match value {
            CheckArg::ApproxBound => CheckKind::ApproxBound,
            CheckArg::CentersBound => CheckKind::CentersBound,
            CheckArg::SumForm => CheckKind::SumForm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OcModeArg {
    /// Exhaustive search when it fits, greedy bracket otherwise.
    Auto,
    Exact,
    Greedy,
    Aspect,
}

/// Generator spec file: a dataset source plus an optional arrival ordering.
#[derive(Debug, Serialize, Deserialize)]
struct GenerateSpec {
    source: DatasetSource,
    #[serde(default)]
    ordering: Option<OrderingSpec>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset CSV from a JSON generator spec.
    Generate {
        /// Generator spec file (JSON: {"source": {...}, "ordering": {...}?}).
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run seeded online trials over a dataset and write a report.
    Run {
        /// Dataset CSV (columns x0,x1,...[,label]).
        #[arg(long)]
        data: PathBuf,
        #[arg(long, short)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        /// Base seed; trial i runs with seed + i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SolverArg::Exact1dDp)]
        solver: SolverArg,
        /// Report JSON path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-trial rows CSV path.
        #[arg(long)]
        rows: Option<PathBuf>,
        /// Per-step trace CSV of the base-seed trial.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Named checks to evaluate (repeatable).
        #[arg(long = "check", value_enum)]
        checks: Vec<CheckArg>,
    },
    /// Print the order-complexity bracket of a dataset.
    Oc {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, short)]
        k: usize,
        #[arg(long, value_enum, default_value_t = OcModeArg::Auto)]
        mode: OcModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random restarts for the greedy estimator.
        #[arg(long, default_value_t = 8)]
        restarts: usize,
    },
    /// Minimum expected centers any algorithm with the given approximation
    /// factor must take.
    LowerBound {
        /// Dataset CSV; its order-complexity lower bracket is used.
        #[arg(long, conflicts_with = "oc")]
        data: Option<PathBuf>,
        /// Order complexity supplied directly.
        #[arg(long, requires = "n")]
        oc: Option<usize>,
        #[arg(long, short)]
        k: usize,
        /// Dataset size (required with --oc).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Scaling sweep: sample mixtures over an n grid and record aspect
    /// ratios, order-complexity brackets, and centers taken.
    Scaling {
        /// Mixture spec file (JSON MixtureSpec).
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, short)]
        k: usize,
        /// Comma-separated ascending dataset sizes.
        #[arg(long, value_delimiter = ',')]
        n_grid: Vec<usize>,
        /// Seeded datasets per grid point.
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Quick self-check of the core guarantees.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::UnsupportedInstance(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Generate { spec, out } => cmd_generate(&spec, &out),
        Command::Run {
            data,
            k,
            trials,
            seed,
            solver,
            out,
            rows,
            trace,
            checks,
        } => cmd_run(&data, k, trials, seed, solver, out, rows, trace, &checks),
        Command::Oc {
            data,
            k,
            mode,
            seed,
            restarts,
        } => cmd_oc(&data, k, mode, seed, restarts),
        Command::LowerBound {
            data,
            oc,
            k,
            n,
            alpha,
            seed,
        } => cmd_lower_bound(data, oc, k, n, alpha, seed),
        Command::Scaling {
            spec,
            k,
            n_grid,
            trials,
            seed,
            out,
        } => cmd_scaling(&spec, k, n_grid, trials, seed, &out),
        Command::Selftest => cmd_selftest(),
    }
}

fn cmd_generate(spec_path: &PathBuf, out: &PathBuf) -> Result<ExitCode, Error> {
    let text = std::fs::read_to_string(spec_path)?;
    let spec: GenerateSpec = serde_json::from_str(&text)?;
    let mut dataset = load_dataset(&spec.source)?;
    if let Some(ordering) = &spec.ordering {
        dataset = apply_ordering(&dataset, ordering)?;
    }
    dataset.write_csv_path(out)?;
    let k_gen = match &spec.source {
        DatasetSource::Mixture { spec, .. } => spec.components.len(),
        _ => 1,
    };
    println!("n={} d={} k_gen={}", dataset.len(), dataset.dim(), k_gen);
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    data: &PathBuf,
    k: usize,
    trials: usize,
    seed: u64,
    solver: SolverArg,
    out: Option<PathBuf>,
    rows: Option<PathBuf>,
    trace: Option<PathBuf>,
    checks: &[CheckArg],
) -> Result<ExitCode, Error> {
    let spec = ExperimentSpec {
        dataset: DatasetSource::File { path: data.clone() },
        ordering: None,
        online: OnlineConfig::new(k, solver.to_spec(k, seed), seed),
        trials,
        base_seed: seed,
        outputs: OutputSpec {
            report_json: out,
            rows_csv: rows,
        },
        checks: checks.iter().map(|&c| c.into()).collect(),
    };
    let report = run_experiment(&spec)?;

    if let Some(trace_path) = trace {
        let dataset = Dataset::read_csv_path(data)?;
        let config = OnlineConfig::new(k, solver.to_spec(k, seed), seed).with_trace();
        let run = run_online(&dataset, &config)?;
        let mut buf = Vec::new();
        trace_to_csv(run.trace.as_ref().expect("trace recorded"), &mut buf)?;
        std::fs::write(trace_path, buf)?;
    }

    println!(
        "n={} d={} k={} trials={} mean_centers={:.3} mean_final_cost={:.6e}",
        report.n,
        report.dim,
        report.k,
        report.trials,
        report.aggregates.mean_centers,
        report.aggregates.mean_final_cost
    );
    if let Some(oracle) = report.bounds.oracle_cost {
        println!(
            "oracle_cost={oracle:.6e} approx_rhs={:.6e}",
            report.bounds.approx_rhs.unwrap_or(f64::NAN)
        );
    }
    println!(
        "oc_bracket: {} \u{2264} OC \u{2264} {}",
        report.oc.lower, report.oc.upper
    );
    for check in &report.checks {
        println!(
            "check {}: {} ({})",
            check.name,
            if check.pass { "pass" } else { "FAIL" },
            check.detail
        );
    }
    if report.all_checks_pass() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(4))
    }
}

fn method_name(method: OcMethod) -> &'static str {
    match method {
        OcMethod::Exhaustive => "exhaustive",
        OcMethod::GreedyRestart => "greedy-restart",
        OcMethod::AspectBound => "aspect-bound",
    }
}

fn cmd_oc(
    data: &PathBuf,
    k: usize,
    mode: OcModeArg,
    seed: u64,
    restarts: usize,
) -> Result<ExitCode, Error> {
    let dataset = Dataset::read_csv_path(data)?;
    let points = dataset.points();
    let estimate: OcEstimate = match mode {
        OcModeArg::Exact => oc_exact(points, k)?,
        OcModeArg::Greedy => oc_greedy_lower(points, k, restarts, seed)?,
        OcModeArg::Aspect => {
            let upper = oc_upper_bound_aspect(points, k)?;
            let distinct = points
                .iter()
                .enumerate()
                .filter(|(i, p)| !points[..*i].contains(p))
                .count();
            OcEstimate {
                lower: distinct.min(k - 1).max(1),
                upper: upper.min(distinct.max(1)),
                exact: false,
                method: OcMethod::AspectBound,
                witness: None,
            }
        }
        OcModeArg::Auto => {
            if points.len() <= OC_EXACT_MAX_N {
                oc_exact(points, k)?
            } else {
                oc_greedy_lower(points, k, restarts, seed)?
            }
        }
    };
    println!(
        "{} \u{2264} OC \u{2264} {} ({})",
        estimate.lower,
        estimate.upper,
        method_name(estimate.method)
    );
    if let Some(witness) = &estimate.witness {
        let indices: Vec<String> = witness.indices.iter().map(|i| i.to_string()).collect();
        println!("witness (0-based rows): [{}]", indices.join(", "));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_lower_bound(
    data: Option<PathBuf>,
    oc: Option<usize>,
    k: usize,
    n: Option<usize>,
    alpha: f64,
    seed: u64,
) -> Result<ExitCode, Error> {
    let (oc_value, n_value, provenance) = match (data, oc) {
        (Some(path), None) => {
            let dataset = Dataset::read_csv_path(&path)?;
            let points = dataset.points();
            let est = if points.len() <= OC_EXACT_MAX_N {
                oc_exact(points, k)?
            } else {
                oc_greedy_lower(points, k, 8, seed)?
            };
            // The lower bracket keeps the bound conservative.
            (est.lower, dataset.len(), method_name(est.method))
        }
        (None, Some(oc)) => (
            oc,
            n.ok_or_else(|| Error::invalid("--n is required with --oc"))?,
            "given",
        ),
        _ => {
            return Err(Error::invalid(
                "provide exactly one of --data or --oc (with --n)",
            ))
        }
    };
    let value = lower_bound_centers(oc_value, k, n_value, alpha)?;
    println!(
        "required_centers >= {value:.3} (oc={oc_value} [{provenance}], k={k}, n={n_value}, alpha={alpha})"
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_scaling(
    spec_path: &PathBuf,
    k: usize,
    n_grid: Vec<usize>,
    trials: usize,
    seed: u64,
    out: &PathBuf,
) -> Result<ExitCode, Error> {
    let text = std::fs::read_to_string(spec_path)?;
    let mixture = serde_json::from_str(&text)?;
    let spec = ScalingSpec {
        mixture,
        k,
        n_grid,
        seeds: trials,
        base_seed: seed,
        greedy_restarts: 4,
    };
    let rows = run_scaling(&spec)?;
    std::fs::write(out, scaling_csv(&rows))?;
    println!("wrote {} rows to {}", rows.len(), out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_selftest() -> Result<ExitCode, Error> {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    let mut failures = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(99);

    // Center-shifting identity.
    let mut ok = true;
    for _ in 0..100 {
        let n = rng.random_range(1..=30);
        let xs: Vec<Point> = (0..n)
            .map(|_| Point::scalar(rng.random_range(-50.0..50.0)).unwrap())
            .collect();
        let c = Point::scalar(rng.random_range(-80.0..80.0)).unwrap();
        let mu = mean(&xs).unwrap();
        let lhs = cost_with_center(&xs, &c).unwrap();
        let rhs = one_means_cost(&xs).unwrap() + n as f64 * squared_dist(&c, &mu).unwrap();
        ok &= (lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs().max(rhs.abs()));
    }
    println!(
        "{} center-shifting identity (100 instances)",
        if ok { "pass" } else { "FAIL" }
    );
    failures += usize::from(!ok);

    // Good-point majority.
    let mut ok = true;
    for _ in 0..100 {
        let n = rng.random_range(1..=40);
        let xs: Vec<Point> = (0..n)
            .map(|_| Point::scalar(rng.random_range(-20.0..20.0)).unwrap())
            .collect();
        ok &= good_points(&xs).unwrap().len() as f64 > n as f64 / 2.0;
    }
    println!(
        "{} good points are a strict majority (100 sets)",
        if ok { "pass" } else { "FAIL" }
    );
    failures += usize::from(!ok);

    // Exact solver agreement.
    let mut ok = true;
    for _ in 0..20 {
        let n = rng.random_range(2..=10);
        let xs: Vec<Point> = (0..n)
            .map(|_| Point::scalar(rng.random_range(-50.0..50.0)).unwrap())
            .collect();
        let k = rng.random_range(1..=3);
        let dp = solve(&xs, k, &SolverSpec::exact_1d_dp())?;
        let en = solve(&xs, k, &SolverSpec::exact_enum())?;
        ok &= dp.clustering.total_cost == en.clustering.total_cost;
    }
    println!(
        "{} 1-D dynamic program equals enumeration (20 instances)",
        if ok { "pass" } else { "FAIL" }
    );
    failures += usize::from(!ok);

    // Online merged-cost bound on one run.
    let values: Vec<f64> = (0..80)
        .map(|_| rng.random_range(0..3) as f64 * 20.0 + rng.random_range(-1.0..1.0))
        .collect();
    let ds = Dataset::from_values(&values)?;
    let cfg = OnlineConfig::new(2, SolverSpec::exact_1d_dp(), 7).with_trace();
    let run = run_online(&ds, &cfg)?;
    let mut ok = true;
    for (idx, rec) in run.trace.as_ref().unwrap().iter().enumerate() {
        let lk = opt_kmeans_cost_oracle(&ds.points()[..=idx], 2)?;
        ok &= nosub_core::tol::le_snapped(rec.merged_cost, 101.0 * lk);
    }
    println!(
        "{} merged cost within 101x the prefix optimum (80 steps)",
        if ok { "pass" } else { "FAIL" }
    );
    failures += usize::from(!ok);

    // Adversarial series has full order complexity.
    let series = nosub_core::datagen::exponential_adversary(12, 2.0)?;
    let est = oc_exact(series.points(), 2)?;
    let ok = est.lower == 12;
    println!(
        "{} exponential series order complexity equals n",
        if ok { "pass" } else { "FAIL" }
    );
    failures += usize::from(!ok);

    if failures == 0 {
        println!("selftest: all checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("selftest: {failures} check(s) failed");
        Ok(ExitCode::from(4))
    }
}
