//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any
//! criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use janossy_core::ensemble::EnsembleOptions;
use janossy_core::kernels::correlation_kernel;
use janossy_core::measure_space::{DiscretizedSpace, Window, WindowFamily};
use janossy_core::models::{build_unitary, Potential};
use janossy_core::oracle::quad_oracle_m1;
use janossy_core::verify::{verify_suite, Status, Suite, SuiteReport, VerifyOptions};
use statrs::function::erf::erf;

const SEED: u64 = 20_240_611;
const THREADS: usize = 4;

const PARTITION_INSTANCES: usize = 200;
const PARTITION_REL_TOL: f64 = 1e-10;
const PARTITION_LIMIT: Duration = Duration::from_secs(30);
const CORRELATION_TOL: f64 = 1e-10;
const CORRELATION_LIMIT: Duration = Duration::from_secs(60);
const THEOREM_INSTANCES: usize = 100;
const THEOREM_TOL: f64 = 1e-8;
const THEOREM_LIMIT: Duration = Duration::from_secs(60);
const JANOSSY_TOL: f64 = 1e-10;
const GAP_TOL: f64 = 1e-10;
const COUNTING_TOL: f64 = 1e-10;
const EXTREMES_TOL: f64 = 1e-6;
const EXTREMES_LIMIT: Duration = Duration::from_secs(30);
const EXTREMES_POINTS: [f64; 4] = [-1.0, 0.0, 1.0, 2.0];
const MARGINAL_INSTANCES: usize = 50;
const MARGINAL_TOL: f64 = 1e-10;
const HEINE_INSTANCES: usize = 50;
const HEINE_TOL: f64 = 1e-10;
const DYSON_MEHTA_INSTANCES: usize = 200;
const DYSON_MEHTA_TOL: f64 = 1e-10;

struct Outcome {
    passed: bool,
    detail: String,
}

fn run_suite(suite: Suite, instances: usize, tol: f64) -> SuiteReport {
    let opts = VerifyOptions {
        tolerance: Some(tol),
        ..Default::default()
    };
    verify_suite(suite, instances, SEED, &opts).expect("suite runs")
}

fn suite_outcome(report: &SuiteReport, elapsed: Option<(Duration, Duration)>) -> Outcome {
    let mut passed = report.passed;
    let mut detail = format!(
        "{} instances, max error {:.2e} (tolerance {:.0e}), {} failing",
        report.instances, report.max_error, report.tolerance, report.failures
    );
    if let Some((took, limit)) = elapsed {
        passed &= took <= limit;
        detail.push_str(&format!(", {:.2} s (limit {} s)", took.as_secs_f64(), limit.as_secs()));
    }
    if let Some(bad) = report.results.iter().find(|r| r.status == Status::Fail) {
        detail.push_str(&format!("; first failure #{}: {}", bad.index, bad.instance));
        if let Some(note) = &bad.note {
            detail.push_str(&format!(" ({note})"));
        }
    }
    Outcome { passed, detail }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn partition() -> Outcome {
    let (report, took) = timed(|| run_suite(Suite::Partition, PARTITION_INSTANCES, PARTITION_REL_TOL));
    suite_outcome(&report, Some((took, PARTITION_LIMIT)))
}

fn correlations() -> Outcome {
    let (report, took) = timed(|| run_suite(Suite::Correlations, PARTITION_INSTANCES, CORRELATION_TOL));
    suite_outcome(&report, Some((took, CORRELATION_LIMIT)))
}

fn theorem() -> Outcome {
    let (report, took) = timed(|| run_suite(Suite::Theorem, THEOREM_INSTANCES, THEOREM_TOL));
    suite_outcome(&report, Some((took, THEOREM_LIMIT)))
}

fn janossy() -> Outcome {
    suite_outcome(&run_suite(Suite::Janossy, THEOREM_INSTANCES, JANOSSY_TOL), None)
}

fn gap() -> Outcome {
    suite_outcome(&run_suite(Suite::Gap, THEOREM_INSTANCES, GAP_TOL), None)
}

fn counting() -> Outcome {
    suite_outcome(&run_suite(Suite::Counting, THEOREM_INSTANCES, COUNTING_TOL), None)
}

/// `Pr(λ_max ≤ s)` for two particles with weight `e^{-x²}`.
fn two_particle_gaussian_cdf(s: f64) -> f64 {
    let a0 = PI.sqrt() / 2.0 * (1.0 + erf(s));
    let a1 = -(-s * s).exp() / 2.0;
    let a2 = a0 / 2.0 - s * (-s * s).exp() / 2.0;
    (2.0 * a0 * a2 - 2.0 * a1 * a1) / PI
}

fn extremes() -> Outcome {
    let (result, took) = timed(|| {
        let space = DiscretizedSpace::composite_quadrature(&[-6.0, -1.0, 0.0, 1.0, 2.0, 6.0], 32).unwrap();
        let ens = build_unitary(&Potential::quadratic(1.0), 2, space, EnsembleOptions::default()).unwrap();
        let kernel = correlation_kernel(&ens).unwrap();
        let mut worst_oracle: f64 = 0.0;
        let mut worst_closed: f64 = 0.0;
        for s in EXTREMES_POINTS {
            let wf = WindowFamily::new(ens.space(), vec![Window::at_or_above(ens.space(), s)]).unwrap();
            let fd = kernel.restrict(&wf).unwrap().fredholm_det().re;
            let oracle = quad_oracle_m1(&ens, s, 0).unwrap();
            worst_oracle = worst_oracle.max((fd - oracle).abs());
            worst_closed = worst_closed.max((fd - two_particle_gaussian_cdf(s)).abs());
        }
        (ens.nodes(), worst_oracle, worst_closed)
    });
    let (nodes, vs_oracle, vs_closed) = result;
    Outcome {
        passed: vs_oracle <= EXTREMES_TOL && vs_closed <= EXTREMES_TOL && took <= EXTREMES_LIMIT,
        detail: format!(
            "{nodes} nodes on [-6, 6], s in {EXTREMES_POINTS:?}: |det - quadrature| {vs_oracle:.2e}, \
             |det - erf form| {vs_closed:.2e} (tolerance {EXTREMES_TOL:.0e}), {:.2} s (limit {} s)",
            took.as_secs_f64(),
            EXTREMES_LIMIT.as_secs()
        ),
    }
}

fn marginal() -> Outcome {
    suite_outcome(&run_suite(Suite::Marginal, MARGINAL_INSTANCES, MARGINAL_TOL), None)
}

fn heine() -> Outcome {
    suite_outcome(&run_suite(Suite::Heine, HEINE_INSTANCES, HEINE_TOL), None)
}

fn dyson_mehta() -> Outcome {
    let first = run_suite(Suite::DysonMehta, DYSON_MEHTA_INSTANCES, DYSON_MEHTA_TOL);
    let second = run_suite(Suite::DysonMehta, DYSON_MEHTA_INSTANCES, DYSON_MEHTA_TOL);
    let rows_a = serde_json::to_string(&first.residuals).unwrap();
    let rows_b = serde_json::to_string(&second.residuals).unwrap();
    let unchecked: Vec<_> = first.residuals.iter().filter(|r| !r.checked).collect();
    let max_stated = unchecked.iter().map(|r| r.stated).fold(0.0, f64::max);
    let max_flipped = unchecked.iter().map(|r| r.sign_flipped).fold(0.0, f64::max);
    let mut out = suite_outcome(&first, None);
    out.passed &= rows_a == rows_b;
    out.detail.push_str(&format!(
        "; {} off-diagonal rows recorded (stated form residual up to {max_stated:.2e}, \
         sign-flipped form up to {max_flipped:.2e}), rerun identical: {}",
        unchecked.len(),
        rows_a == rows_b
    ));
    out
}

fn determinism() -> Outcome {
    let run_all = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            [Suite::Heine, Suite::Partition, Suite::Janossy, Suite::Theorem, Suite::DysonMehta, Suite::Counting]
                .into_iter()
                .map(|s| verify_suite(s, 20, SEED + 1, &VerifyOptions::default()).unwrap().to_json())
                .collect::<Vec<_>>()
        })
    };
    let a = run_all(THREADS);
    let b = run_all(THREADS);
    let c = run_all(1);
    Outcome {
        passed: a == b,
        detail: format!(
            "6 suites x 20 instances rerun with {THREADS} threads: byte-identical {}; single-thread run identical {}",
            a == b,
            a == c
        ),
    }
}

fn main() {
    rayon::ThreadPoolBuilder::new().num_threads(THREADS).build_global().ok();
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("partition function", partition),
        ("correlation determinants", correlations),
        ("explicit vs resolvent Janossy kernel", theorem),
        ("Janossy densities", janossy),
        ("gap probabilities", gap),
        ("counting closure", counting),
        ("largest-particle distribution", extremes),
        ("marginal floors", marginal),
        ("Heine identity", heine),
        ("kernel composition", dyson_mehta),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let out = check();
        if !out.passed {
            failures += 1;
        }
        println!("{} [{}] {name}: {}", if out.passed { "PASS" } else { "FAIL" }, i + 1, out.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
