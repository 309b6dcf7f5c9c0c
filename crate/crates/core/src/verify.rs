//! Seeded cross-check suites comparing closed forms against the
//! brute-force oracles on random discrete instances.
//!
//! Reports contain no timings, so a rerun with the same seed serializes to
//! the same bytes.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ensemble::{ChainEnsemble, EnsembleOptions, GramVariant};
use crate::error::{Error, Result};
use crate::janossy::{count_probability_complex, janossy_kernel_explicit};
use crate::kernels::correlation_kernel;
use crate::linalg::{self, C64};
use crate::measure_space::{Window, WindowFamily};
use crate::models::build_random_with;
use crate::oracle::{enumerate_density, heine_lhs, OracleRecord};

/// Random windows are redrawn until both condition numbers are below this.
pub const WINDOW_CONDITION_LIMIT: f64 = 1e6;
const MAX_DRAWS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Heine,
    Partition,
    Correlations,
    Janossy,
    Theorem,
    DysonMehta,
    Marginal,
    Gap,
    Counting,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Heine,
        Suite::Partition,
        Suite::Correlations,
        Suite::Janossy,
        Suite::Theorem,
        Suite::DysonMehta,
        Suite::Marginal,
        Suite::Gap,
        Suite::Counting,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Heine => "heine",
            Suite::Partition => "partition",
            Suite::Correlations => "correlations",
            Suite::Janossy => "janossy",
            Suite::Theorem => "theorem",
            Suite::DysonMehta => "dyson-mehta",
            Suite::Marginal => "marginal",
            Suite::Gap => "gap",
            Suite::Counting => "counting",
        }
    }

    /// Default agreement threshold. `partition` is relative to `|Z|`,
    /// `theorem` relative to `1 + max |resolvent kernel|`; the rest are
    /// absolute.
    pub fn default_tolerance(self) -> f64 {
        match self {
            Suite::Theorem => 1e-8,
            _ => 1e-10,
        }
    }

    fn needs_windows(self) -> bool {
        matches!(self, Suite::Janossy | Suite::Theorem | Suite::Gap | Suite::Counting)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|suite| suite.name() == s).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "unknown suite {s:?}; known suites: {}",
                Suite::ALL.iter().map(|s| s.name()).join(", ")
            ))
        })
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub ensemble: EnsembleOptions,
    /// Replaces the suite's default tolerance.
    pub tolerance: Option<f64>,
    /// Give this instance full windows on every floor; it must then fail
    /// with a singular complement Gram matrix.
    pub force_full_windows: Option<usize>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            ensemble: EnsembleOptions::default(),
            tolerance: None,
            force_full_windows: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    ExpectedError,
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceResult {
    pub index: usize,
    pub seed: u64,
    pub instance: String,
    pub status: Status,
    pub comparisons: usize,
    /// Largest error in the suite's metric.
    pub max_error: f64,
    /// The comparison with the largest error.
    pub worst: Option<OracleRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Composition residuals for one floor pair of one instance, maximized over
/// node pairs.
#[derive(Clone, Debug, Serialize)]
pub struct DysonMehtaRow {
    pub instance: usize,
    pub floors: usize,
    pub k: usize,
    pub m: usize,
    pub stated: f64,
    pub sign_flipped: f64,
    /// Rows with `k == m` or a single floor are held to the tolerance.
    pub checked: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub instances: usize,
    pub tolerance: f64,
    pub passed: bool,
    pub failures: usize,
    pub expected_errors: usize,
    pub max_error: f64,
    pub results: Vec<InstanceResult>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub residuals: Vec<DysonMehtaRow>,
}

impl SuiteReport {
    /// One line per instance.
    pub fn lines(&self) -> Vec<String> {
        self.results
            .iter()
            .map(|r| {
                let tag = match r.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::ExpectedError => "EXPECTED-ERROR",
                };
                format!(
                    "{tag} {} #{} max_error={:.3e} comparisons={} {}{}",
                    self.suite,
                    r.index,
                    r.max_error,
                    r.comparisons,
                    r.instance,
                    r.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default()
                )
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct Instance {
    index: usize,
    seed: u64,
    ens: ChainEnsemble,
    windows: Option<WindowFamily>,
    description: String,
}

fn instance_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn well_conditioned(ens: &ChainEnsemble, wf: &WindowFamily) -> bool {
    let gram_ok = ens
        .gram_matrix(GramVariant::Complement(wf))
        .map(|g| g.condition() <= WINDOW_CONDITION_LIMIT)
        .unwrap_or(false);
    gram_ok
        && correlation_kernel(ens)
            .and_then(|k| k.restrict(wf))
            .map(|r| r.id_minus_condition() <= WINDOW_CONDITION_LIMIT)
            .unwrap_or(false)
}

fn draw_instance(suite: Suite, seed: u64, index: usize, opts: &VerifyOptions) -> Result<Instance> {
    let mut rng = instance_rng(seed, index);
    let forced = opts.force_full_windows == Some(index);
    for _ in 0..MAX_DRAWS {
        let (n, floors) = match suite {
            Suite::Heine => (rng.random_range(1..=3), 1),
            Suite::Marginal => (rng.random_range(1..=2), 3),
            _ => (rng.random_range(1..=2), rng.random_range(1..=3)),
        };
        let nodes = rng.random_range(n.max(2)..=5);
        let ens_seed: u64 = rng.random();
        let Ok(ens) = build_random_with(ens_seed, nodes, n, floors, opts.ensemble) else {
            continue;
        };
        let windows = if forced {
            Some(WindowFamily::full(ens.space(), floors))
        } else if suite.needs_windows() {
            let masks: Vec<Window> = (0..floors)
                .map(|_| Window::from_mask(ens.space(), (0..nodes).map(|_| rng.random_bool(0.5)).collect()))
                .collect::<Result<_>>()?;
            let wf = WindowFamily::new(ens.space(), masks)?;
            if !well_conditioned(&ens, &wf) {
                continue;
            }
            Some(wf)
        } else {
            None
        };
        let description = format!(
            "seed={ens_seed} P={nodes} n={n} M={floors}{}",
            windows.as_ref().map(|w| format!(" windows={}", w.describe())).unwrap_or_default()
        );
        return Ok(Instance {
            index,
            seed: ens_seed,
            ens,
            windows,
            description,
        });
    }
    Err(Error::InvalidArgument(format!(
        "no well-conditioned instance after {MAX_DRAWS} draws (suite {suite}, seed {seed}, index {index})"
    )))
}

/// Running maximum of errors against per-comparison tolerances.
struct Tally {
    comparisons: usize,
    max_error: f64,
    worst_ratio: f64,
    worst: Option<OracleRecord>,
}

impl Tally {
    fn new() -> Self {
        Self {
            comparisons: 0,
            max_error: 0.0,
            worst_ratio: 0.0,
            worst: None,
        }
    }

    fn add(&mut self, record: OracleRecord, error: f64, tolerance: f64) {
        self.comparisons += 1;
        let ratio = if error.is_nan() { f64::INFINITY } else { error / tolerance };
        if ratio > self.worst_ratio || self.worst.is_none() {
            self.worst_ratio = ratio;
            self.worst = Some(record);
        }
        self.max_error = self.max_error.max(if error.is_nan() { f64::INFINITY } else { error });
    }

    fn passed(&self) -> bool {
        self.worst_ratio <= 1.0
    }
}

fn count_vectors(floors: usize, max_each: &[usize], max_total: usize) -> Vec<Vec<usize>> {
    (0..floors)
        .map(|l| 0..=max_each[l])
        .multi_cartesian_product()
        .filter(|c| c.iter().sum::<usize>() <= max_total)
        .collect()
}

fn point_sets(choices: &[Vec<usize>], counts: &[usize]) -> Vec<Vec<(usize, usize)>> {
    choices
        .iter()
        .zip(counts)
        .enumerate()
        .map(|(l, (nodes, k))| {
            nodes
                .iter()
                .copied()
                .combinations(*k)
                .map(|c| c.into_iter().map(|x| (l, x)).collect::<Vec<_>>())
                .collect::<Vec<_>>()
        })
        .multi_cartesian_product()
        .map(|parts| parts.concat())
        .collect()
}

fn describe_points(points: &[(usize, usize)]) -> String {
    format!("[{}]", points.iter().map(|(l, x)| format!("({l},{x})")).join(","))
}

fn run_instance(
    suite: Suite,
    inst: &Instance,
    tol: f64,
    residuals: &mut Vec<DysonMehtaRow>,
) -> Result<Tally> {
    let ens = &inst.ens;
    let (n, floors, p) = (ens.particles(), ens.floors(), ens.nodes());
    let rec = |q: String, oracle: C64, closed: C64| OracleRecord::new(inst.seed, inst.description.clone(), q, oracle, closed);
    let mut tally = Tally::new();
    match suite {
        Suite::Heine => {
            let lhs = heine_lhs(ens.space(), ens.f(), ens.phi(), ens.options().budget)?;
            let rhs = linalg::det(ens.gram());
            let r = rec("det A".into(), lhs, rhs);
            let e = r.abs_err;
            tally.add(r, e, tol);
        }
        Suite::Partition => {
            let d = enumerate_density(ens)?;
            let r = rec("Z".into(), d.z_enumerated(), d.z_closed());
            let e = r.abs_err / d.z_closed().norm();
            tally.add(r, e, tol);
        }
        Suite::Correlations => {
            let d = enumerate_density(ens)?;
            let k = correlation_kernel(ens)?;
            let all: Vec<Vec<usize>> = vec![(0..p).collect(); floors];
            for counts in count_vectors(floors, &vec![n; floors], 3) {
                for pts in point_sets(&all, &counts) {
                    let r = rec(
                        format!("rho{}", describe_points(&pts)),
                        d.brute_correlation(&pts)?,
                        k.correlation_function(&pts)?,
                    );
                    let e = r.abs_err;
                    tally.add(r, e, tol);
                }
            }
        }
        Suite::Janossy => {
            let wf = inst.windows.as_ref().expect("janossy instances carry windows");
            let d = enumerate_density(ens)?;
            let jk = janossy_kernel_explicit(ens, wf)?;
            let inside: Vec<Vec<usize>> = wf.windows().iter().map(Window::indices).collect();
            let caps: Vec<usize> = inside.iter().map(|w| w.len().min(n)).collect();
            for counts in count_vectors(floors, &caps, 2) {
                for pts in point_sets(&inside, &counts) {
                    let r = rec(
                        format!("J{}", describe_points(&pts)),
                        d.brute_janossy(wf, &pts)?,
                        jk.janossy_density(&pts)?,
                    );
                    let e = r.abs_err;
                    tally.add(r, e, tol);
                }
            }
        }
        Suite::Theorem => {
            let wf = inst.windows.as_ref().expect("theorem instances carry windows");
            let explicit = janossy_kernel_explicit(ens, wf)?;
            let k = correlation_kernel(ens)?;
            let resolvent = k.resolvent_kernel(wf)?;
            let mut max_res: f64 = 0.0;
            let mut worst = (0.0, C64::default(), C64::default(), String::new());
            for (l, wl) in wf.windows().iter().enumerate() {
                for (m, wm) in wf.windows().iter().enumerate() {
                    for x in wl.indices() {
                        for y in wm.indices() {
                            let a = resolvent.value(l, x, m, y);
                            let b = explicit.value(l, x, m, y);
                            max_res = max_res.max(a.norm());
                            if (a - b).norm() >= worst.0 {
                                worst = ((a - b).norm(), a, b, format!("L({l},{x};{m},{y})"));
                            }
                        }
                    }
                }
            }
            let r = rec(worst.3, worst.1, worst.2);
            tally.add(r, worst.0 / (1.0 + max_res), tol);
            let fd = k.restrict(wf)?.fredholm_det();
            let r = rec("const".into(), fd, explicit.constant());
            let e = r.abs_err;
            tally.add(r, e, tol);
        }
        Suite::DysonMehta => {
            let k = correlation_kernel(ens)?;
            for a in 0..floors {
                for b in 0..floors {
                    let checked = floors == 1 || a == b;
                    let (mut stated, mut flipped) = (0.0f64, 0.0f64);
                    let mut worst = (0usize, 0usize);
                    for x in 0..p {
                        for z in 0..p {
                            let res = k.dyson_mehta_check(a, b, x, z)?;
                            if res.stated >= stated {
                                worst = (x, z);
                            }
                            stated = stated.max(res.stated);
                            flipped = flipped.max(res.sign_flipped);
                        }
                    }
                    residuals.push(DysonMehtaRow {
                        instance: inst.index,
                        floors,
                        k: a,
                        m: b,
                        stated,
                        sign_flipped: flipped,
                        checked,
                    });
                    if checked {
                        let r = rec(
                            format!("KK-K({a},{},{b},{})", worst.0, worst.1),
                            C64::new(stated, 0.0),
                            C64::default(),
                        );
                        tally.add(r, stated, tol);
                    }
                }
            }
        }
        Suite::Marginal => {
            let parent = correlation_kernel(ens)?;
            for l in 0..floors {
                let marginal = ens.marginal(&[l])?;
                let km = correlation_kernel(&marginal)?;
                let sets: Vec<Vec<usize>> = (1..=n.min(2)).flat_map(|k| (0..p).combinations(k)).collect();
                for xs in sets {
                    let child: Vec<(usize, usize)> = xs.iter().map(|x| (0, *x)).collect();
                    let full: Vec<(usize, usize)> = xs.iter().map(|x| (l, *x)).collect();
                    let r = rec(
                        format!("rho_floor{l}{}", describe_points(&child)),
                        parent.correlation_function(&full)?,
                        km.correlation_function(&child)?,
                    );
                    let e = r.abs_err;
                    tally.add(r, e, tol);
                }
            }
        }
        Suite::Gap => {
            let wf = inst.windows.as_ref().expect("gap instances carry windows");
            let d = enumerate_density(ens)?;
            let k = correlation_kernel(ens)?;
            let fd = k.restrict(wf)?.fredholm_det();
            let r = rec("det(Id-K_I)".into(), d.brute_count_probability(wf, &vec![0; floors])?, fd);
            let e = r.abs_err;
            tally.add(r, e, tol);
            let full = k.restrict(&WindowFamily::full(ens.space(), floors))?.fredholm_det();
            let r = rec("det(Id-K_X)".into(), C64::default(), full);
            tally.add(r, full.norm(), 1e-8);
            let empty = k.restrict(&WindowFamily::empty(ens.space(), floors))?.fredholm_det();
            let r = rec("det(Id-K_empty)".into(), C64::new(1.0, 0.0), empty);
            let exact = if empty == C64::new(1.0, 0.0) { 0.0 } else { f64::INFINITY };
            tally.add(r, exact, tol);
        }
        Suite::Counting => {
            let wf = inst.windows.as_ref().expect("counting instances carry windows");
            let d = enumerate_density(ens)?;
            let mut total = linalg::CompensatedSum::default();
            for counts in count_vectors(floors, &vec![n; floors], usize::MAX) {
                let value = count_probability_complex(ens, wf, &counts)?;
                total.add(value);
                let r = rec(format!("Pr(counts={counts:?})"), d.brute_count_probability(wf, &counts)?, value);
                let e = r.abs_err;
                tally.add(r, e, tol);
            }
            let r = rec("sum over counts".into(), C64::new(1.0, 0.0), total.value());
            let e = r.abs_err;
            tally.add(r, e, 1e-9);
        }
    }
    Ok(tally)
}

/// Runs `instances` seeded random instances of `suite`.
pub fn verify_suite(suite: Suite, instances: usize, seed: u64, opts: &VerifyOptions) -> Result<SuiteReport> {
    let tolerance = opts.tolerance.unwrap_or(suite.default_tolerance());
    if !(tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tolerance}")));
    }
    let outcomes: Vec<(InstanceResult, Vec<DysonMehtaRow>)> = (0..instances)
        .into_par_iter()
        .map(|index| {
            let forced = opts.force_full_windows == Some(index);
            let inst = match draw_instance(suite, seed, index, opts) {
                Ok(inst) => inst,
                Err(e) => {
                    let result = InstanceResult {
                        index,
                        seed,
                        instance: String::new(),
                        status: Status::Fail,
                        comparisons: 0,
                        max_error: f64::INFINITY,
                        worst: None,
                        note: Some(e.to_string()),
                    };
                    return (result, Vec::new());
                }
            };
            let mut rows = Vec::new();
            let outcome = run_instance(suite, &inst, tolerance, &mut rows);
            let (status, tally, note) = match outcome {
                Ok(t) if forced => (Status::Fail, t, Some("forced full windows did not fail".to_string())),
                Ok(t) => (if t.passed() { Status::Pass } else { Status::Fail }, t, None),
                Err(e @ Error::Singular { .. }) if forced => (Status::ExpectedError, Tally::new(), Some(e.to_string())),
                Err(e) => {
                    let mut t = Tally::new();
                    t.max_error = f64::INFINITY;
                    (Status::Fail, t, Some(e.to_string()))
                }
            };
            let result = InstanceResult {
                index,
                seed: inst.seed,
                instance: inst.description,
                status,
                comparisons: tally.comparisons,
                max_error: tally.max_error,
                worst: tally.worst,
                note,
            };
            (result, rows)
        })
        .collect();
    let mut results = Vec::with_capacity(instances);
    let mut residuals = Vec::new();
    for (r, rows) in outcomes {
        results.push(r);
        residuals.extend(rows);
    }
    let failures = results.iter().filter(|r| r.status == Status::Fail).count();
    let expected_errors = results.iter().filter(|r| r.status == Status::ExpectedError).count();
    let max_error = results
        .iter()
        .filter(|r| r.status != Status::ExpectedError)
        .map(|r| r.max_error)
        .fold(0.0, f64::max);
    Ok(SuiteReport {
        suite,
        seed,
        instances,
        tolerance,
        passed: failures == 0,
        failures,
        expected_errors,
        max_error,
        results,
        residuals,
    })
}
